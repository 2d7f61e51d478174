//! Rank censuses over random instances: every eigenstate of every sampled
//! Hamiltonian is pushed through the recovery pipeline and ranks are
//! collected per sector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{
    build_symmetry_basis, spin_from_casimir, HalfInteger, IrrepLabel, LabeledBasis, StateClassification,
};
use crate::error::{Error, Result};
use crate::family::{family_for, sample_parameters, HamiltonianFamily, ModelKind, ParameterVector, SamplingPolicy};
use crate::operator::{check_sites, total_spin_squared, HermitianOperator};
use crate::scalar::Real;
use crate::tolerance::Tolerances;

use super::constraint::{build_constraint_matrix, rank_of, ConstraintMode, RowPart};
use super::eigen::{classified_eigenstates, eigenstates, EigenstateRecord};
use super::predict::Outcome;
use super::solve::{misalignment, solve_recovery, RecoveryReport, Verdict};

/// Kernel residual bound `‖Q x*‖ ≤ KERNEL_TOL · ‖Q‖₂`.
pub const KERNEL_TOL: f64 = 1e-10;
/// Largest accepted `1 − |cos|` between recovered and true couplings.
pub const ALIGNMENT_TOL: f64 = 1e-8;
/// Coupling factor used by the scale-invariance check.
pub const SCALE_FACTOR: f64 = 3.0;
/// Weight a state may carry outside its sector and still be assigned to it.
pub const SECTOR_LEAKAGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CensusModel {
    #[serde(rename = "xxx")]
    Xxx,
    #[serde(rename = "xxz")]
    Xxz,
    /// XXZ family probed with XXX instances (`J^z = J^{xy}` per bond).
    #[serde(rename = "xxz-accidental")]
    Accidental,
}

impl CensusModel {
    pub fn name(self) -> &'static str {
        match self {
            CensusModel::Xxx => "xxx",
            CensusModel::Xxz => "xxz",
            CensusModel::Accidental => "xxz-accidental",
        }
    }

    /// Family whose terms make up `Q`.
    pub fn family_kind(self) -> ModelKind {
        match self {
            CensusModel::Xxx => ModelKind::Xxx,
            CensusModel::Xxz | CensusModel::Accidental => ModelKind::Xxz,
        }
    }

    pub fn policy(self) -> SamplingPolicy {
        match self {
            CensusModel::Accidental => SamplingPolicy::AccidentalXxx,
            _ => SamplingPolicy::Generic,
        }
    }
}

impl fmt::Display for CensusModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CensusModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xxx" => Ok(CensusModel::Xxx),
            "xxz" => Ok(CensusModel::Xxz),
            "xxz-accidental" | "accidental" => Ok(CensusModel::Accidental),
            _ => Err(Error::Parse {
                kind: "model",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub model: CensusModel,
    pub sites: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: Tolerances,
    /// Also run the per-instance invariant checks (mode equality, kernel
    /// residual, scale invariance, …).
    pub invariants: bool,
}

impl CensusConfig {
    pub fn new(model: CensusModel, sites: usize, trials: usize, seed: u64) -> Self {
        Self {
            model,
            sites,
            trials,
            seed,
            tol: Tolerances::default(),
            invariants: false,
        }
    }
}

/// Seed of trial `trial` in a census seeded with `seed` (SplitMix64 mixing).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(seed ^ mix(trial))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorCensus {
    /// `S` (XXX and accidental censuses) or `|m|` (XXZ).
    pub sector: HalfInteger,
    pub states: usize,
    pub ranks: BTreeSet<usize>,
    pub verdict: Outcome,
    /// Worst coupling misalignment over recoverable states.
    pub max_coupling_alignment: Option<f64>,
    /// Singular spectrum of the first state (in trial, index order) that
    /// produced each rank.
    pub spectra: BTreeMap<usize, Vec<f64>>,
}

/// Counts of invariant checks and their failures over a census.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct InvariantTally {
    pub states: usize,
    pub max_eigen_residual: f64,
    /// Largest `‖Q x*‖ / ‖Q‖₂`.
    pub max_kernel_ratio: f64,
    pub kernel_violations: usize,
    pub mode_mismatches: usize,
    pub imaginary_rows: usize,
    pub rank_overflows: usize,
    pub block_rank_violations: usize,
    pub solver_inconsistencies: usize,
    pub scale_checks: usize,
    pub scale_mismatches: usize,
    /// Largest `1 − |cos|` between solutions for `θ` and `3θ`.
    pub max_scale_deviation: f64,
    /// States that could not be assigned a single sector.
    pub unassigned_states: usize,
}

impl InvariantTally {
    fn merge(&mut self, o: &InvariantTally) {
        self.states += o.states;
        self.max_eigen_residual = self.max_eigen_residual.max(o.max_eigen_residual);
        self.max_kernel_ratio = self.max_kernel_ratio.max(o.max_kernel_ratio);
        self.kernel_violations += o.kernel_violations;
        self.mode_mismatches += o.mode_mismatches;
        self.imaginary_rows += o.imaginary_rows;
        self.rank_overflows += o.rank_overflows;
        self.block_rank_violations += o.block_rank_violations;
        self.solver_inconsistencies += o.solver_inconsistencies;
        self.scale_checks += o.scale_checks;
        self.scale_mismatches += o.scale_mismatches;
        self.max_scale_deviation = self.max_scale_deviation.max(o.max_scale_deviation);
        self.unassigned_states += o.unassigned_states;
    }

    /// Human-readable list of failed checks; empty when everything holds.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |count: usize, what: &str| {
            if count > 0 {
                out.push(format!("{count} state(s): {what}"));
            }
        };
        check(self.kernel_violations, "kernel residual above bound");
        check(self.mode_mismatches, "full-basis rank differs from symmetry-block rank");
        check(self.imaginary_rows, "imaginary row retained in a real basis");
        check(self.rank_overflows, "rank exceeds N");
        check(self.block_rank_violations, "irrep block rank exceeds its degeneracy");
        check(self.solver_inconsistencies, "solver output inconsistent with rank");
        check(self.scale_mismatches, "normalized solution changed under rescaling");
        check(self.unassigned_states, "state not assignable to a single sector");
        out
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub model: CensusModel,
    pub sites: usize,
    pub trials: usize,
    pub seed: u64,
    pub term_count: usize,
    pub sectors: Vec<SectorCensus>,
    pub invariants: Option<InvariantTally>,
}

impl CensusReport {
    pub fn sector(&self, sector: HalfInteger) -> Option<&SectorCensus> {
        self.sectors.iter().find(|s| s.sector == sector)
    }
}

struct Context<T: Real> {
    model: CensusModel,
    family: HamiltonianFamily<T>,
    basis: LabeledBasis<T>,
    multiplicities: BTreeMap<IrrepLabel, usize>,
    spin_squared: Option<HermitianOperator<T>>,
    tol: Tolerances,
    invariants: bool,
}

struct StateResult {
    sector: HalfInteger,
    rank: usize,
    singular_values: Vec<f64>,
    coupling_alignment: Option<f64>,
}

struct TrialResult {
    states: Vec<StateResult>,
    tally: InvariantTally,
}

impl<T: Real> Context<T> {
    fn new(model: CensusModel, sites: usize, tol: &Tolerances, invariants: bool) -> Result<Self> {
        check_sites(sites, 2)?;
        let family = family_for::<T>(model.family_kind(), sites, tol)?;
        let basis = build_symmetry_basis(&family, tol)?;
        let multiplicities = basis.multiplicities()?;
        let spin_squared = match model {
            CensusModel::Accidental => Some(total_spin_squared::<T>(sites)?),
            _ => None,
        };
        Ok(Self {
            model,
            family,
            basis,
            multiplicities,
            spin_squared,
            tol: *tol,
            invariants,
        })
    }

    fn sector_of(&self, record: &EigenstateRecord<T>) -> Option<HalfInteger> {
        match &self.spin_squared {
            Some(s2) => {
                let x = crate::scalar::to_f64(s2.expectation(&record.state));
                let spin = spin_from_casimir(x);
                let s = spin.value();
                ((x - s * (s + 1.0)).abs() <= 1e-6).then_some(spin)
            }
            None => record
                .classification
                .as_ref()
                .and_then(|c| c.dominant(1.0 - SECTOR_LEAKAGE))
                .map(|l| l.sector()),
        }
    }

    fn trial(&self, seed: u64) -> Result<TrialResult> {
        let params = sample_parameters(&self.family, seed, self.model.policy())?;
        let records = classified_eigenstates(&self.family, &params, &self.basis, &self.tol)?;
        let scaled = if self.invariants {
            Some(eigenstates(&self.family, &params.scaled(SCALE_FACTOR), &self.tol)?)
        } else {
            None
        };
        let n = self.family.term_count();
        let mut tally = InvariantTally::default();
        let mut states = Vec::with_capacity(records.len());
        for rec in &records {
            let Some(sector) = self.sector_of(rec) else {
                tally.unassigned_states += 1;
                continue;
            };
            let q = build_constraint_matrix(
                &self.family,
                rec,
                &self.basis,
                ConstraintMode::SymmetryBlocks,
                &self.tol,
            )?;
            let truth = rec.ground_truth();
            let report = solve_recovery(&q, Some(&truth), &self.tol)?;
            if self.invariants {
                tally.states += 1;
                tally.max_eigen_residual = tally.max_eigen_residual.max(rec.residual);
                let norm = report.singular_values.first().copied().unwrap_or(0.0);
                let ratio = q.apply_norm(&truth.solution_vector())? / norm.max(f64::MIN_POSITIVE);
                tally.max_kernel_ratio = tally.max_kernel_ratio.max(ratio);
                if ratio > KERNEL_TOL {
                    tally.kernel_violations += 1;
                }
                let full =
                    build_constraint_matrix(&self.family, rec, &self.basis, ConstraintMode::FullBasis, &self.tol)?;
                if rank_of(full.rows(), self.tol.rank).rank != report.rank {
                    tally.mode_mismatches += 1;
                }
                if self.family.has_real_structure() {
                    tally.imaginary_rows += q.count_rows(RowPart::Imaginary);
                }
                if report.rank > n {
                    tally.rank_overflows += 1;
                }
                for label in q.irreps() {
                    let nu = self.multiplicities.get(label).copied().unwrap_or(0);
                    let block = crate::scalar::Real::singular_values(&q.block(label));
                    let block_rank = block
                        .into_iter()
                        .filter(|&s| crate::scalar::to_f64(s) > self.tol.rank * norm)
                        .count();
                    if block_rank > nu {
                        tally.block_rank_violations += 1;
                    }
                }
                if !self.solver_consistent(&report, norm) {
                    tally.solver_inconsistencies += 1;
                }
                if let Some(scaled) = &scaled {
                    self.scale_check(&report, &scaled[rec.index], &mut tally)?;
                }
            }
            states.push(StateResult {
                sector,
                rank: report.rank,
                coupling_alignment: report.coupling_alignment.filter(|_| report.rank == n),
                singular_values: report.singular_values,
            });
        }
        Ok(TrialResult { states, tally })
    }

    fn solver_consistent(&self, report: &RecoveryReport, top: f64) -> bool {
        let threshold = self.tol.rank * top;
        match report.verdict {
            Verdict::Recoverable => {
                let gap = report
                    .singular_values
                    .get(report.term_count - 1)
                    .copied()
                    .unwrap_or(0.0);
                gap > threshold
                    && report.alignment.map(|a| a <= ALIGNMENT_TOL).unwrap_or(false)
                    && report.residual <= self.tol.solve * top
            }
            Verdict::Unrecoverable => {
                report
                    .gram_spectrum
                    .iter()
                    .filter(|&&l| l <= threshold * threshold)
                    .count()
                    >= 2
            }
        }
    }

    fn scale_check(
        &self,
        original: &RecoveryReport,
        scaled: &EigenstateRecord<T>,
        tally: &mut InvariantTally,
    ) -> Result<()> {
        if original.verdict != Verdict::Recoverable {
            return Ok(());
        }
        let q = build_constraint_matrix(
            &self.family,
            scaled,
            &self.basis,
            ConstraintMode::SymmetryBlocks,
            &self.tol,
        )?;
        let report = solve_recovery(&q, Some(&scaled.ground_truth()), &self.tol)?;
        if report.verdict != Verdict::Recoverable {
            // A different mixture inside a degenerate level; rank verdicts
            // are compared by the census itself.
            return Ok(());
        }
        tally.scale_checks += 1;
        let deviation = misalignment(&original.solution.couplings, &report.solution.couplings);
        tally.max_scale_deviation = tally.max_scale_deviation.max(deviation);
        if deviation > ALIGNMENT_TOL || report.coupling_alignment.map(|a| a > ALIGNMENT_TOL).unwrap_or(true) {
            tally.scale_mismatches += 1;
        }
        Ok(())
    }
}

/// Runs `trials` random instances and aggregates ranks per sector. Trials run
/// in parallel; aggregation is in trial order, so the report depends only on
/// the configuration.
pub fn recovery_census<T: Real>(config: &CensusConfig) -> Result<CensusReport> {
    if config.trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    config.tol.validate()?;
    let ctx = Context::<T>::new(config.model, config.sites, &config.tol, config.invariants)?;
    let n = ctx.family.term_count();
    let trials: Vec<TrialResult> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| ctx.trial(trial_seed(config.seed, t)))
        .collect::<Result<_>>()?;

    let mut sectors: BTreeMap<HalfInteger, SectorCensus> = BTreeMap::new();
    let mut tally = InvariantTally::default();
    for trial in &trials {
        tally.merge(&trial.tally);
        for s in &trial.states {
            let entry = sectors.entry(s.sector).or_insert_with(|| SectorCensus {
                sector: s.sector,
                states: 0,
                ranks: BTreeSet::new(),
                verdict: Outcome::X,
                max_coupling_alignment: None,
                spectra: BTreeMap::new(),
            });
            entry.states += 1;
            entry.ranks.insert(s.rank);
            entry.spectra.entry(s.rank).or_insert_with(|| s.singular_values.clone());
            if let Some(a) = s.coupling_alignment {
                entry.max_coupling_alignment = Some(entry.max_coupling_alignment.map_or(a, |b: f64| b.max(a)));
            }
        }
    }
    let mut sectors: Vec<SectorCensus> = sectors.into_values().collect();
    for s in &mut sectors {
        s.verdict = Outcome::from_ranks(&s.ranks, n);
    }
    Ok(CensusReport {
        model: config.model,
        sites: config.sites,
        trials: config.trials,
        seed: config.seed,
        term_count: n,
        sectors,
        invariants: config.invariants.then_some(tally),
    })
}

/// Accidental-symmetry census: XXX instances probed against the XXZ family,
/// sectors keyed by total spin.
pub fn rank_census(sites: usize, trials: usize, seed: u64, tol: &Tolerances) -> Result<CensusReport> {
    let mut config = CensusConfig::new(CensusModel::Accidental, sites, trials, seed);
    config.tol = *tol;
    recovery_census::<f64>(&config)
}

/// One eigenstate of one sampled instance (the census's first trial for the
/// same seed) pushed through the whole pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceReport {
    pub model: CensusModel,
    pub sites: usize,
    pub seed: u64,
    pub index: usize,
    pub parameters: ParameterVector,
    pub energy: f64,
    pub sector: Option<HalfInteger>,
    pub classification: StateClassification,
    pub recovery: RecoveryReport,
}

pub fn recover_instance<T: Real>(
    model: CensusModel,
    sites: usize,
    seed: u64,
    index: usize,
    tol: &Tolerances,
) -> Result<InstanceReport> {
    tol.validate()?;
    let ctx = Context::<T>::new(model, sites, tol, false)?;
    let params = sample_parameters(&ctx.family, trial_seed(seed, 0), model.policy())?;
    let records = classified_eigenstates(&ctx.family, &params, &ctx.basis, tol)?;
    let rec = records.get(index).ok_or(Error::IndexOutOfRange {
        index,
        dim: records.len(),
    })?;
    let q = build_constraint_matrix(&ctx.family, rec, &ctx.basis, ConstraintMode::SymmetryBlocks, tol)?;
    let recovery = solve_recovery(&q, Some(&rec.ground_truth()), tol)?;
    Ok(InstanceReport {
        model,
        sites,
        seed,
        index,
        parameters: params.clone(),
        energy: rec.energy,
        sector: ctx.sector_of(rec),
        classification: rec.classification.clone().expect("classified above"),
        recovery,
    })
}
