use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::basis::{block_structure, build_symmetry_basis, DecompositionReport, HalfInteger, IrrepLabel, Parity};
use crate::error::{Error, Result};
use crate::family::{family_for, ModelKind};
use crate::recovery::{
    predict_accidental, recover_instance, recovery_census, CensusConfig, CensusModel, CensusReport, InstanceReport,
    InvariantTally, ALIGNMENT_TOL, KERNEL_TOL,
};

use super::artifact::{cells_to_csv, to_json, Provenance, TableArtifact, TableId, FORBIDDEN, SCHEMA_VERSION};
use super::config::{OutputFormat, RunConfig};
use super::golden::{golden_cell, has_golden_row};

/// Chain lengths up to which the exhaustive cross-block check runs.
pub const CROSS_BLOCK_MAX_SITES: usize = 5;
pub const CROSS_BLOCK_TOL: f64 = 1e-10;

/// Singular spectra behind a cell, keyed by rank.
type SpectraLookup<'a> = dyn Fn(usize, &str) -> BTreeMap<usize, Vec<f64>> + 'a;

fn provenance(config: &RunConfig) -> Provenance {
    Provenance::new(config.seed, config.trials, config.tol)
}

fn allowed(sites: usize, twice: i64) -> bool {
    twice >= 0 && twice <= sites as i64 && (sites as i64 - twice) % 2 == 0
}

fn spin_columns(max_sites: usize) -> Vec<String> {
    (0..=max_sites as i64)
        .map(|t| HalfInteger::from_twice(t).to_string())
        .collect()
}

fn xxz_columns(max_sites: usize) -> Vec<IrrepLabel> {
    let mut v = vec![
        IrrepLabel::magnetization(HalfInteger::ZERO, Some(Parity::Even)),
        IrrepLabel::magnetization(HalfInteger::ZERO, Some(Parity::Odd)),
    ];
    v.extend((1..=max_sites as i64).map(|t| IrrepLabel::magnetization(HalfInteger::from_twice(t), None)));
    v
}

fn decomposition_model(id: TableId) -> ModelKind {
    match id {
        TableId::XxxDecomp => ModelKind::Xxx,
        _ => ModelKind::Xxz,
    }
}

fn decomposition_reports(kind: ModelKind, config: &RunConfig) -> Result<Vec<DecompositionReport>> {
    config
        .sites()
        .map(|l| crate::basis::decomposition_report(kind, l, &config.tol))
        .collect()
}

fn decomposition_artifact(id: TableId, reports: &[DecompositionReport], config: &RunConfig) -> TableArtifact {
    match id {
        TableId::XxxDecomp => {
            let mut t = TableArtifact::new(id, spin_columns(config.max_sites), provenance(config));
            for r in reports {
                t.push_row(r.sites, |col| {
                    let s: HalfInteger = col.parse().ok()?;
                    r.multiplicity(&IrrepLabel::spin(s)).map(|n| n.to_string())
                });
                t.expressions.insert(r.sites, r.expression());
            }
            t
        }
        _ => {
            let labels = xxz_columns(config.max_sites);
            let columns = labels.iter().map(IrrepLabel::notation).collect();
            let mut t = TableArtifact::new(id, columns, provenance(config));
            for r in reports {
                t.push_row(r.sites, |col| {
                    let label = labels.iter().find(|l| l.notation() == col)?;
                    r.multiplicity(label).map(|n| n.to_string())
                });
                t.expressions.insert(r.sites, r.expression());
            }
            t
        }
    }
}

fn predict_artifact(xxz: &[DecompositionReport], config: &RunConfig) -> Result<TableArtifact> {
    let id = TableId::AccidentalPredict;
    let mut t = TableArtifact::new(id, spin_columns(config.max_sites), provenance(config));
    for r in xxz {
        let mut err = None;
        t.push_row(r.sites, |col| {
            let s: HalfInteger = col.parse().ok()?;
            if !allowed(r.sites, s.twice()) {
                return None;
            }
            match predict_accidental(r, s) {
                Ok(o) => Some(o.to_string()),
                Err(e) => {
                    err.get_or_insert(e);
                    None
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(t)
}

fn censuses(model: CensusModel, first: usize, config: &RunConfig, invariants: bool) -> Result<Vec<CensusReport>> {
    (first.max(config.min_sites)..=config.max_sites)
        .map(|l| {
            let mut c = CensusConfig::new(model, l, config.trials, config.seed);
            c.tol = config.tol;
            c.invariants = invariants;
            recovery_census::<f64>(&c)
        })
        .collect()
}

fn census_artifact(id: TableId, reports: &[CensusReport], config: &RunConfig) -> TableArtifact {
    let mut t = TableArtifact::new(id, spin_columns(config.max_sites), provenance(config));
    for r in reports {
        t.push_row(r.sites, |col| {
            let s: HalfInteger = col.parse().ok()?;
            if !allowed(r.sites, s.twice()) {
                return None;
            }
            // An allowed sector no state landed in is reported, not hidden.
            let cell = match r.sector(s) {
                None => "?".to_string(),
                Some(sc) if id == TableId::AccidentalRanks => {
                    sc.ranks.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
                }
                Some(sc) => sc.verdict.to_string(),
            };
            Some(cell)
        });
    }
    t
}

fn census_model(id: TableId) -> Option<CensusModel> {
    match id {
        TableId::XxxRecovery => Some(CensusModel::Xxx),
        TableId::XxzRecovery => Some(CensusModel::Xxz),
        TableId::AccidentalRanks | TableId::AccidentalVerdicts => Some(CensusModel::Accidental),
        _ => None,
    }
}

/// Decomposition table for the configured model (`xxx` or `xxz`).
pub fn cmd_decompose(config: &RunConfig) -> Result<TableArtifact> {
    config.validate()?;
    let id = match config.model {
        Some(CensusModel::Xxx) => TableId::XxxDecomp,
        Some(CensusModel::Xxz) => TableId::XxzDecomp,
        other => {
            return Err(Error::InvalidConfig(format!(
                "decompose needs model xxx or xxz, got {}",
                other.map(|m| m.name()).unwrap_or("none")
            )))
        }
    };
    cmd_table(config, id)
}

/// Full pipeline on eigenstate `index` of the instance drawn for `seed`.
/// Needs a single chain length.
pub fn cmd_recover(config: &RunConfig, index: usize) -> Result<InstanceReport> {
    config.validate()?;
    let model = config
        .model
        .ok_or_else(|| Error::InvalidConfig("recover needs a model".into()))?;
    if config.min_sites != config.max_sites {
        return Err(Error::InvalidConfig("recover needs a single chain length".into()));
    }
    recover_instance::<f64>(model, config.min_sites, config.seed, index, &config.tol)
}

pub fn cmd_table(config: &RunConfig, id: TableId) -> Result<TableArtifact> {
    config.validate()?;
    if id.is_decomposition() {
        let reports = decomposition_reports(decomposition_model(id), config)?;
        return Ok(decomposition_artifact(id, &reports, config));
    }
    if id == TableId::AccidentalPredict {
        let reports = decomposition_reports(ModelKind::Xxz, config)?;
        return predict_artifact(&reports, config);
    }
    let model = census_model(id).expect("census table");
    let reports = censuses(model, id.min_sites(), config, false)?;
    Ok(census_artifact(id, &reports, config))
}

fn join_floats(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";")
}

/// Renders a single-instance report; CSV and markdown list one field per row.
pub fn render_instance(report: &InstanceReport, format: OutputFormat) -> Result<String> {
    if format == OutputFormat::Json {
        return to_json(report);
    }
    let rec = &report.recovery;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    let fields: Vec<(&str, String)> = vec![
        ("model", report.model.to_string()),
        ("L", report.sites.to_string()),
        ("seed", report.seed.to_string()),
        ("index", report.index.to_string()),
        ("energy", format!("{:e}", report.energy)),
        ("sector", report.sector.map(|s| s.to_string()).unwrap_or_default()),
        (
            "irreps",
            report
                .classification
                .labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(";"),
        ),
        ("N", rec.term_count.to_string()),
        ("rows", rec.row_count.to_string()),
        ("rank", rec.rank.to_string()),
        ("verdict", format!("{:?}", rec.verdict).to_lowercase()),
        ("alignment", opt(rec.alignment)),
        ("coupling_alignment", opt(rec.coupling_alignment)),
        ("residual", format!("{:e}", rec.residual)),
        ("singular_values", join_floats(&rec.singular_values)),
        ("recovered", join_floats(&rec.solution.couplings)),
        ("true", join_floats(&report.parameters.couplings)),
    ];
    if format == OutputFormat::Md {
        let mut out = String::from("| field | value |\n|---|---|\n");
        for (k, v) in fields {
            let _ = writeln!(out, "| {k} | {v} |");
        }
        return Ok(out);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(["field", "value"])?;
    for (k, v) in fields {
        w.write_record([k, v.as_str()])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub table: TableId,
    pub sites: usize,
    pub sector: String,
    pub expected: String,
    pub got: String,
    /// Singular spectrum of `Q` (descending) for each observed rank.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub spectra: BTreeMap<usize, Vec<f64>>,
}

/// Outcome of a golden-table run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub sites: [usize; 2],
    pub passed: bool,
    pub graded_cells: usize,
    pub ungraded_cells: usize,
    pub mismatches: Vec<Mismatch>,
    pub checks: Vec<Check>,
    pub tables: Vec<TableArtifact>,
}

impl VerifyReport {
    pub fn table(&self, id: TableId) -> Option<&TableArtifact> {
        self.tables.iter().find(|t| t.id == id)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => to_json(self),
            OutputFormat::Csv => cells_to_csv(&self.tables),
            OutputFormat::Md => Ok(self.to_markdown()),
        }
    }

    /// Human-oriented summary: verdict, checks, mismatches with spectra.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verify-all L={}..={} seed={} trials={}: {} ({} cells graded, {} mismatched)",
            self.sites[0],
            self.sites[1],
            self.provenance.seed,
            self.provenance.trials,
            if self.passed { "PASS" } else { "FAIL" },
            self.graded_cells,
            self.mismatches.len()
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  [{}] {}: {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        for m in &self.mismatches {
            let _ = writeln!(
                out,
                "  mismatch {} L={} {}={}: expected {}, got {}",
                m.table,
                m.sites,
                m.table.axis(),
                m.sector,
                m.expected,
                m.got
            );
            for (rank, s) in &m.spectra {
                let list: Vec<String> = s.iter().map(|v| format!("{v:.3e}")).collect();
                let _ = writeln!(out, "    rank {rank}: σ = [{}]", list.join(", "));
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for t in &self.tables {
            out.push_str(&t.to_markdown());
            out.push('\n');
        }
        out.push_str("| check | result | detail |\n|---|---|---|\n");
        for c in &self.checks {
            let _ = writeln!(
                out,
                "| {} | {} | {} |",
                c.name,
                if c.passed { "ok" } else { "FAIL" },
                c.detail
            );
        }
        if !self.mismatches.is_empty() {
            out.push_str("\n| table | L | sector | expected | got |\n|---|---|---|---|---|\n");
            for m in &self.mismatches {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} |",
                    m.table, m.sites, m.sector, m.expected, m.got
                );
            }
        }
        out
    }
}

fn binomial(n: usize, k: i64) -> usize {
    if k < 0 || k as usize > n {
        return 0;
    }
    let k = (k as usize).min(n - k as usize);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Multiplicities predicted by counting magnetization states.
pub fn binomial_multiplicities(kind: ModelKind, sites: usize) -> BTreeMap<IrrepLabel, usize> {
    let mut out = BTreeMap::new();
    let l = sites as i64;
    for twice in (0..=l).filter(|t| (l - t) % 2 == 0) {
        let s = HalfInteger::from_twice(twice);
        let down = (l - twice) / 2;
        match kind {
            ModelKind::Xxx => {
                let nu = binomial(sites, down) - binomial(sites, down - 1);
                if nu > 0 {
                    out.insert(IrrepLabel::spin(s), nu);
                }
            }
            ModelKind::Xxz if twice == 0 => {
                let half = binomial(sites, down) / 2;
                out.insert(IrrepLabel::magnetization(s, Some(Parity::Even)), half);
                out.insert(IrrepLabel::magnetization(s, Some(Parity::Odd)), half);
            }
            ModelKind::Xxz => {
                out.insert(IrrepLabel::magnetization(s, None), binomial(sites, down));
            }
        }
    }
    out
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn grade(t: &TableArtifact, spectra: &SpectraLookup, out: &mut Vec<Mismatch>) -> (usize, usize) {
    let (mut graded, mut ungraded) = (0, 0);
    for c in &t.cells {
        if !has_golden_row(t.id, c.sites) {
            ungraded += 1;
            continue;
        }
        // Columns past the reference grid are forbidden for L ≤ 7.
        let expected = golden_cell(t.id, c.sites, &c.sector).unwrap_or(FORBIDDEN);
        graded += 1;
        if expected != c.value {
            out.push(Mismatch {
                table: t.id,
                sites: c.sites,
                sector: c.sector.clone(),
                expected: expected.to_string(),
                got: c.value.clone(),
                spectra: spectra(c.sites, &c.sector),
            });
        }
    }
    (graded, ungraded)
}

fn census_spectra(reports: &[CensusReport]) -> impl Fn(usize, &str) -> BTreeMap<usize, Vec<f64>> + '_ {
    move |sites, sector| {
        let Ok(s) = sector.parse::<HalfInteger>() else {
            return BTreeMap::new();
        };
        reports
            .iter()
            .find(|r| r.sites == sites)
            .and_then(|r| r.sector(s))
            .map(|sc| sc.spectra.clone())
            .unwrap_or_default()
    }
}

fn decomposition_checks(xxx: &[DecompositionReport], xxz: &[DecompositionReport], checks: &mut Vec<Check>) {
    let mut bad = Vec::new();
    for r in xxx.iter().chain(xxz) {
        if r.total_dim() != 1 << r.sites {
            bad.push(format!("{} L={}: {}", r.model, r.sites, r.total_dim()));
        }
    }
    checks.push(check(
        "dimension sums",
        bad.is_empty(),
        if bad.is_empty() {
            format!("Σ ν_p d_p = 2^L for {} decompositions", xxx.len() + xxz.len())
        } else {
            bad.join("; ")
        },
    ));

    let mut bad = Vec::new();
    for r in xxx.iter().chain(xxz) {
        let got: BTreeMap<IrrepLabel, usize> = r.irreps.iter().map(|c| (c.label, c.multiplicity)).collect();
        if got != binomial_multiplicities(r.model, r.sites) {
            bad.push(format!("{} L={}", r.model, r.sites));
        }
    }
    checks.push(check(
        "binomial multiplicities",
        bad.is_empty(),
        if bad.is_empty() {
            "every ν_p equals its binomial formula".to_string()
        } else {
            format!("disagree: {}", bad.join(", "))
        },
    ));
}

fn cross_block_check(config: &RunConfig) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut worst_spread = 0.0f64;
    let mut count = 0;
    for l in config.min_sites..=config.max_sites.min(CROSS_BLOCK_MAX_SITES) {
        for kind in [ModelKind::Xxx, ModelKind::Xxz] {
            let family = family_for::<f64>(kind, l, &config.tol)?;
            let basis = build_symmetry_basis(&family, &config.tol)?;
            for term in family.terms() {
                let b = block_structure(&basis, &term.operator)?;
                worst = worst.max(b.cross_block_max);
                worst_spread = worst_spread.max(b.reduced_spread);
                count += 1;
            }
        }
    }
    Ok(check(
        "cross-block vanishing",
        worst <= CROSS_BLOCK_TOL && worst_spread <= CROSS_BLOCK_TOL,
        format!(
            "{count} terms up to L={}: max cross-block {worst:.2e}, max reduced-block spread {worst_spread:.2e} (bound {CROSS_BLOCK_TOL:e})",
            config.max_sites.min(CROSS_BLOCK_MAX_SITES)
        ),
    ))
}

fn invariant_checks(censuses: &[&[CensusReport]], checks: &mut Vec<Check>) {
    let mut total = InvariantTally::default();
    let mut states = 0;
    let mut worst_alignment = 0.0f64;
    let mut misaligned = Vec::new();
    for r in censuses.iter().flat_map(|c| c.iter()) {
        let t = r.invariants.as_ref().expect("census ran with invariants");
        states += t.states;
        total.kernel_violations += t.kernel_violations;
        total.max_kernel_ratio = total.max_kernel_ratio.max(t.max_kernel_ratio);
        total.mode_mismatches += t.mode_mismatches;
        total.imaginary_rows += t.imaginary_rows;
        total.rank_overflows += t.rank_overflows;
        total.block_rank_violations += t.block_rank_violations;
        total.solver_inconsistencies += t.solver_inconsistencies;
        total.scale_checks += t.scale_checks;
        total.scale_mismatches += t.scale_mismatches;
        total.max_scale_deviation = total.max_scale_deviation.max(t.max_scale_deviation);
        total.unassigned_states += t.unassigned_states;
        for s in &r.sectors {
            if let Some(a) = s.max_coupling_alignment {
                worst_alignment = worst_alignment.max(a);
                if s.verdict == crate::recovery::Outcome::O && a > ALIGNMENT_TOL {
                    misaligned.push(format!("{} L={} {}", r.model, r.sites, s.sector));
                }
            }
        }
    }
    checks.push(check(
        "kernel residual",
        total.kernel_violations == 0,
        format!(
            "{states} states, max ‖Qx*‖/‖Q‖ = {:.2e} (bound {KERNEL_TOL:e}), {} above",
            total.max_kernel_ratio, total.kernel_violations
        ),
    ));
    checks.push(check(
        "mode rank equality",
        total.mode_mismatches == 0,
        format!(
            "{} states where full-basis and symmetry-block ranks differ",
            total.mode_mismatches
        ),
    ));
    checks.push(check(
        "scale invariance",
        total.scale_mismatches == 0,
        format!(
            "{} comparisons under θ → 3θ, max 1 − |cos| = {:.2e}, {} mismatched",
            total.scale_checks, total.max_scale_deviation, total.scale_mismatches
        ),
    ));
    checks.push(check(
        "imaginary rows",
        total.imaginary_rows == 0,
        format!("{} imaginary rows retained in real bases", total.imaginary_rows),
    ));
    checks.push(check(
        "rank bounds",
        total.rank_overflows == 0 && total.block_rank_violations == 0,
        format!(
            "{} ranks above N, {} irrep blocks above ν_p",
            total.rank_overflows, total.block_rank_violations
        ),
    ));
    checks.push(check(
        "solver consistency",
        total.solver_inconsistencies == 0,
        format!(
            "{} minimizers inconsistent with the rank verdict",
            total.solver_inconsistencies
        ),
    ));
    checks.push(check(
        "sector assignment",
        total.unassigned_states == 0,
        format!("{} states without a sector", total.unassigned_states),
    ));
    checks.push(check(
        "recovered couplings",
        misaligned.is_empty(),
        if misaligned.is_empty() {
            format!("max 1 − |cos| over recoverable states = {worst_alignment:.2e} (bound {ALIGNMENT_TOL:e})")
        } else {
            format!("O cells above {ALIGNMENT_TOL:e}: {}", misaligned.join(", "))
        },
    ));
}

/// Regenerates all seven tables over the configured chain lengths, grades
/// them against the reference values and runs the invariant suites.
pub fn cmd_verify_all(config: &RunConfig) -> Result<VerifyReport> {
    config.validate()?;
    let xxx_decomp = decomposition_reports(ModelKind::Xxx, config)?;
    let xxz_decomp = decomposition_reports(ModelKind::Xxz, config)?;
    let xxx = censuses(CensusModel::Xxx, TableId::XxxRecovery.min_sites(), config, true)?;
    let xxz = censuses(CensusModel::Xxz, TableId::XxzRecovery.min_sites(), config, true)?;
    let acc = censuses(
        CensusModel::Accidental,
        TableId::AccidentalRanks.min_sites(),
        config,
        true,
    )?;

    let tables = vec![
        decomposition_artifact(TableId::XxxDecomp, &xxx_decomp, config),
        decomposition_artifact(TableId::XxzDecomp, &xxz_decomp, config),
        census_artifact(TableId::XxxRecovery, &xxx, config),
        census_artifact(TableId::XxzRecovery, &xxz, config),
        predict_artifact(&xxz_decomp, config)?,
        census_artifact(TableId::AccidentalRanks, &acc, config),
        census_artifact(TableId::AccidentalVerdicts, &acc, config),
    ];

    let none = |_: usize, _: &str| BTreeMap::new();
    let xxx_spectra = census_spectra(&xxx);
    let xxz_spectra = census_spectra(&xxz);
    let acc_spectra = census_spectra(&acc);
    let mut mismatches = Vec::new();
    let (mut graded, mut ungraded) = (0, 0);
    for t in &tables {
        let spectra: &SpectraLookup = match t.id {
            TableId::XxxRecovery => &xxx_spectra,
            TableId::XxzRecovery => &xxz_spectra,
            TableId::AccidentalRanks | TableId::AccidentalVerdicts => &acc_spectra,
            _ => &none,
        };
        let (g, u) = grade(t, spectra, &mut mismatches);
        graded += g;
        ungraded += u;
    }

    let mut checks = Vec::new();
    decomposition_checks(&xxx_decomp, &xxz_decomp, &mut checks);
    if config.min_sites <= CROSS_BLOCK_MAX_SITES {
        checks.push(cross_block_check(config)?);
    }
    invariant_checks(&[&xxx, &xxz, &acc], &mut checks);

    let passed = mismatches.is_empty() && checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        schema_version: SCHEMA_VERSION,
        provenance: provenance(config),
        sites: [config.min_sites, config.max_sites],
        passed,
        graded_cells: graded,
        ungraded_cells: ungraded,
        mismatches,
        checks,
        tables,
    })
}
