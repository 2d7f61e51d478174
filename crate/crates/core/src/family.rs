//! Parameterized Hamiltonian families `H(a) = Σ a_n h_n` for the XXX and XXZ
//! chains, plus deterministic ground-truth sampling.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    check_sites, parity_x, partial_spin_squared, sum_pauli_strings, total_spin_component, Axis, HermitianOperator,
    Pauli, PauliString,
};
use crate::scalar::{lit, to_f64, Real};
use crate::tolerance::Tolerances;

/// Lower and upper bound of the sampled coupling magnitudes.
pub const COUPLING_RANGE: (f64, f64) = (0.1, 2.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Xxx,
    Xxz,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Xxx => "xxx",
            ModelKind::Xxz => "xxz",
        }
    }

    /// Number of family terms for a chain of `sites` spins.
    pub fn term_count(self, sites: usize) -> usize {
        match self {
            ModelKind::Xxx => sites - 1,
            ModelKind::Xxz => 2 * (sites - 1),
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xxx" => Ok(ModelKind::Xxx),
            "xxz" => Ok(ModelKind::Xxz),
            _ => Err(Error::Parse {
                kind: "model",
                value: s.to_string(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPolicy {
    Generic,
    AccidentalXxx,
}

impl SamplingPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SamplingPolicy::Generic => "generic",
            SamplingPolicy::AccidentalXxx => "accidental_xxx",
        }
    }
}

#[derive(Clone, Debug)]
pub struct NamedOperator<T: Real> {
    pub label: String,
    pub operator: HermitianOperator<T>,
}

impl<T: Real> NamedOperator<T> {
    pub fn new(label: impl Into<String>, operator: HermitianOperator<T>) -> Self {
        Self {
            label: label.into(),
            operator,
        }
    }
}

/// Known Hermitian terms with unknown real couplings, plus the operators that
/// describe the family's symmetry.
#[derive(Clone, Debug)]
pub struct HamiltonianFamily<T: Real> {
    kind: ModelKind,
    sites: usize,
    terms: Vec<NamedOperator<T>>,
    symmetry_generators: Vec<NamedOperator<T>>,
    labeling_operators: Vec<NamedOperator<T>>,
    has_real_structure: bool,
}

impl<T: Real> HamiltonianFamily<T> {
    /// Builds a family and checks its invariants: traceless, linearly
    /// independent terms; generators commuting with every term; pairwise
    /// commuting labeling operators.
    pub fn new(
        kind: ModelKind,
        sites: usize,
        terms: Vec<NamedOperator<T>>,
        symmetry_generators: Vec<NamedOperator<T>>,
        labeling_operators: Vec<NamedOperator<T>>,
        has_real_structure: bool,
        tol: &Tolerances,
    ) -> Result<Self> {
        check_sites(sites, 2)?;
        let dim = 1usize << sites;
        let all = terms.iter().chain(&symmetry_generators).chain(&labeling_operators);
        for op in all {
            if op.operator.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: op.operator.dim(),
                });
            }
        }
        if terms.is_empty() {
            return Err(Error::InvalidFamily("family has no terms".into()));
        }
        for t in &terms {
            let tr = nalgebra::ComplexField::modulus(t.operator.trace());
            if to_f64(tr) > tol.comm * dim as f64 {
                return Err(Error::InvalidFamily(format!("term {} is not traceless", t.label)));
            }
            if has_real_structure && !t.operator.is_real() {
                return Err(Error::InvalidFamily(format!(
                    "term {} is not real but the family claims a real structure",
                    t.label
                )));
            }
        }
        check_independent(&terms, tol)?;
        for g in &symmetry_generators {
            for t in &terms {
                let dev = to_f64(g.operator.commutator_max(&t.operator)?);
                if dev > tol.comm {
                    return Err(Error::NonCommuting {
                        left: g.label.clone(),
                        right: t.label.clone(),
                        deviation: dev,
                    });
                }
            }
        }
        for (i, a) in labeling_operators.iter().enumerate() {
            for b in &labeling_operators[i + 1..] {
                let dev = to_f64(a.operator.commutator_max(&b.operator)?);
                if dev > tol.comm {
                    return Err(Error::NonCommuting {
                        left: a.label.clone(),
                        right: b.label.clone(),
                        deviation: dev,
                    });
                }
            }
        }
        Ok(Self {
            kind,
            sites,
            terms,
            symmetry_generators,
            labeling_operators,
            has_real_structure,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[NamedOperator<T>] {
        &self.terms
    }

    pub fn symmetry_generators(&self) -> &[NamedOperator<T>] {
        &self.symmetry_generators
    }

    pub fn labeling_operators(&self) -> &[NamedOperator<T>] {
        &self.labeling_operators
    }

    pub fn has_real_structure(&self) -> bool {
        self.has_real_structure
    }

    pub fn descriptor(&self, policy: Option<SamplingPolicy>) -> FamilyDescriptor {
        FamilyDescriptor {
            model: self.kind,
            sites: self.sites,
            term_count: self.terms.len(),
            term_labels: self.terms.iter().map(|t| t.label.clone()).collect(),
            symmetry_generators: self.symmetry_generators.iter().map(|t| t.label.clone()).collect(),
            labeling_operators: self.labeling_operators.iter().map(|t| t.label.clone()).collect(),
            has_real_structure: self.has_real_structure,
            policy,
        }
    }
}

fn check_independent<T: Real>(terms: &[NamedOperator<T>], tol: &Tolerances) -> Result<()> {
    let n = terms.len();
    let gram = DMatrix::from_fn(n, n, |i, j| terms[i].operator.trace_inner(&terms[j].operator));
    let (eigs, _) = T::symmetric_eigen(&gram);
    let largest = to_f64(eigs[n - 1]);
    let smallest = to_f64(eigs[0]);
    if largest <= 0.0 || smallest <= tol.rank * largest {
        return Err(Error::InvalidFamily(format!(
            "terms are linearly dependent (Gram eigenvalues {smallest:e} .. {largest:e})"
        )));
    }
    Ok(())
}

/// Serializable summary of a family for report provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyDescriptor {
    pub model: ModelKind,
    pub sites: usize,
    pub term_count: usize,
    pub term_labels: Vec<String>,
    pub symmetry_generators: Vec<String>,
    pub labeling_operators: Vec<String>,
    pub has_real_structure: bool,
    pub policy: Option<SamplingPolicy>,
}

/// Couplings `a_n`, optionally with the energy when the vector is a solution
/// `x = (a_1, …, a_N, E)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub couplings: Vec<f64>,
    pub energy: Option<f64>,
}

impl ParameterVector {
    pub fn new(couplings: Vec<f64>) -> Self {
        Self {
            couplings,
            energy: None,
        }
    }

    pub fn with_energy(couplings: Vec<f64>, energy: f64) -> Self {
        Self {
            couplings,
            energy: Some(energy),
        }
    }

    pub fn len(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couplings.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            couplings: self.couplings.iter().map(|a| a * c).collect(),
            energy: self.energy.map(|e| e * c),
        }
    }

    /// `(a_1, …, a_N, E)`, with `E = 0` when absent.
    pub fn solution_vector(&self) -> Vec<f64> {
        let mut x = self.couplings.clone();
        x.push(self.energy.unwrap_or(0.0));
        x
    }

    pub fn coupling_norm(&self) -> f64 {
        self.couplings.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

fn pauli_sum<T: Real>(sites: usize, placed: &[&[(usize, Pauli)]]) -> Result<HermitianOperator<T>> {
    let strings: Vec<_> = placed
        .iter()
        .map(|p| PauliString::on_sites(sites, p, T::one()))
        .collect();
    sum_pauli_strings(sites, &strings)
}

/// `Σ_l J_l (σˣσˣ + σʸσʸ + σᶻσᶻ)_{l,l+1}` with `N = L − 1` terms.
pub fn xxx_family<T: Real>(sites: usize, tol: &Tolerances) -> Result<HamiltonianFamily<T>> {
    check_sites(sites, 2)?;
    let mut terms = Vec::with_capacity(sites - 1);
    for l in 0..sites - 1 {
        let op = pauli_sum(
            sites,
            &[
                &[(l, Pauli::X), (l + 1, Pauli::X)],
                &[(l, Pauli::Y), (l + 1, Pauli::Y)],
                &[(l, Pauli::Z), (l + 1, Pauli::Z)],
            ],
        )?;
        terms.push(NamedOperator::new(format!("XXX({},{})", l + 1, l + 2), op));
    }
    let generators = vec![
        NamedOperator::new("Sx", total_spin_component(Axis::X, sites)?),
        NamedOperator::new("Sy", total_spin_component(Axis::Y, sites)?),
        NamedOperator::new("Sz", total_spin_component(Axis::Z, sites)?),
    ];
    let mut labeling = vec![NamedOperator::new("Sz", total_spin_component(Axis::Z, sites)?)];
    for n in 2..=sites {
        labeling.push(NamedOperator::new(format!("S_{n}^2"), partial_spin_squared(n, sites)?));
    }
    HamiltonianFamily::new(ModelKind::Xxx, sites, terms, generators, labeling, true, tol)
}

/// `Σ_l J_lᶻ σᶻσᶻ + J_lˣʸ (σˣσˣ + σʸσʸ)` with `N = 2(L − 1)` terms ordered
/// (z-term, xy-term) per bond.
pub fn xxz_family<T: Real>(sites: usize, tol: &Tolerances) -> Result<HamiltonianFamily<T>> {
    check_sites(sites, 2)?;
    let mut terms = Vec::with_capacity(2 * (sites - 1));
    for l in 0..sites - 1 {
        let zz = pauli_sum(sites, &[&[(l, Pauli::Z), (l + 1, Pauli::Z)]])?;
        let xy = pauli_sum(
            sites,
            &[&[(l, Pauli::X), (l + 1, Pauli::X)], &[(l, Pauli::Y), (l + 1, Pauli::Y)]],
        )?;
        terms.push(NamedOperator::new(format!("ZZ({},{})", l + 1, l + 2), zz));
        terms.push(NamedOperator::new(format!("XY({},{})", l + 1, l + 2), xy));
    }
    let sz = total_spin_component(Axis::Z, sites)?;
    let px = parity_x(sites)?;
    let generators = vec![
        NamedOperator::new("Sz", sz.clone()),
        NamedOperator::new("Pi_x", px.clone()),
    ];
    // |S_z| is carried as S_z², whose eigenvalue is m².
    let mut labeling = vec![NamedOperator::new("Sz^2", sz.square()), NamedOperator::new("Pi_x", px)];
    for i in 1..sites {
        labeling.push(NamedOperator::new(
            format!("Z1Z{}", i + 1),
            pauli_sum(sites, &[&[(0, Pauli::Z), (i, Pauli::Z)]])?,
        ));
    }
    HamiltonianFamily::new(ModelKind::Xxz, sites, terms, generators, labeling, true, tol)
}

pub fn family_for<T: Real>(kind: ModelKind, sites: usize, tol: &Tolerances) -> Result<HamiltonianFamily<T>> {
    match kind {
        ModelKind::Xxx => xxx_family(sites, tol),
        ModelKind::Xxz => xxz_family(sites, tol),
    }
}

/// `H(a) = Σ a_n h_n`.
pub fn assemble<T: Real>(family: &HamiltonianFamily<T>, params: &ParameterVector) -> Result<HermitianOperator<T>> {
    if params.len() != family.term_count() {
        return Err(Error::ParameterLength {
            expected: family.term_count(),
            got: params.len(),
        });
    }
    let dim = family.dim();
    let mut acc = DMatrix::zeros(dim, dim);
    for (term, &a) in family.terms().iter().zip(&params.couplings) {
        let a = lit::<T>(a);
        acc.zip_apply(term.operator.entries(), |x, y| *x += y * a);
    }
    Ok(HermitianOperator::from_trusted(acc))
}

fn draw_coupling(rng: &mut ChaCha8Rng) -> f64 {
    // The two intervals have equal length, so a fair sign times a uniform
    // magnitude is uniform over their union.
    let magnitude = rng.gen_range(COUPLING_RANGE.0..=COUPLING_RANGE.1);
    if rng.gen::<bool>() {
        magnitude
    } else {
        -magnitude
    }
}

/// Draws couplings uniformly from `[−2, −0.1] ∪ [0.1, 2]`; a pure function of
/// `(seed, policy)`.
pub fn sample_parameters<T: Real>(
    family: &HamiltonianFamily<T>,
    seed: u64,
    policy: SamplingPolicy,
) -> Result<ParameterVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match policy {
        SamplingPolicy::Generic => Ok(ParameterVector::new(
            (0..family.term_count()).map(|_| draw_coupling(&mut rng)).collect(),
        )),
        SamplingPolicy::AccidentalXxx => {
            if family.kind() != ModelKind::Xxz {
                return Err(Error::PolicyMismatch {
                    policy: policy.name(),
                    model: family.kind().name(),
                });
            }
            let couplings = (0..family.sites() - 1)
                .flat_map(|_| {
                    let j = draw_coupling(&mut rng);
                    [j, j]
                })
                .collect();
            Ok(ParameterVector::new(couplings))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{commutes, total_spin_squared};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn term_counts() {
        assert_eq!(xxx_family::<f64>(3, &tol()).unwrap().term_count(), 2);
        assert_eq!(xxx_family::<f64>(7, &tol()).unwrap().term_count(), 6);
        assert_eq!(xxz_family::<f64>(4, &tol()).unwrap().term_count(), 6);
        assert!(xxx_family::<f64>(1, &tol()).is_err());
        assert!(xxz_family::<f64>(1, &tol()).is_err());
    }

    #[test]
    fn xxz_term_order_is_z_then_xy() {
        let f = xxz_family::<f64>(3, &tol()).unwrap();
        let labels: Vec<_> = f.terms().iter().map(|t| t.label.as_str()).collect();
        assert_eq!(labels, ["ZZ(1,2)", "XY(1,2)", "ZZ(2,3)", "XY(2,3)"]);
    }

    #[test]
    fn generators_commute_with_terms() {
        for sites in 2..=5 {
            for kind in [ModelKind::Xxx, ModelKind::Xxz] {
                let f = family_for::<f64>(kind, sites, &tol()).unwrap();
                for g in f.symmetry_generators() {
                    for t in f.terms() {
                        assert!(commutes(&g.operator, &t.operator, 1e-12).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn assemble_examples() {
        let f = xxx_family::<f64>(2, &tol()).unwrap();
        let zero = assemble(&f, &ParameterVector::new(vec![0.0])).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let h = assemble(&f, &ParameterVector::new(vec![1.0])).unwrap();
        let eigs = h.eigenvalues();
        for (g, e) in eigs.iter().zip([-3.0, 1.0, 1.0, 1.0]) {
            assert!((g - e).abs() < 1e-12);
        }
        assert!(matches!(
            assemble(&f, &ParameterVector::new(vec![1.0, 2.0])),
            Err(Error::ParameterLength { .. })
        ));
    }

    #[test]
    fn assemble_is_linear() {
        let f = xxz_family::<f64>(3, &tol()).unwrap();
        let p = sample_parameters(&f, 11, SamplingPolicy::Generic).unwrap();
        let h = assemble(&f, &p).unwrap();
        let h3 = assemble(&f, &p.scaled(3.0)).unwrap();
        assert!((&h * 3.0).approx_eq(&h3, 1e-12));
        assert!(h.is_real());
        assert!(h.trace().norm() < 1e-12);
    }

    #[test]
    fn assembled_hamiltonians_keep_symmetry() {
        let f = xxx_family::<f64>(4, &tol()).unwrap();
        let h = assemble(&f, &sample_parameters(&f, 3, SamplingPolicy::Generic).unwrap()).unwrap();
        assert!(commutes(&h, &total_spin_squared(4).unwrap(), 1e-10).unwrap());
        assert!(commutes(&h, &total_spin_component(Axis::Z, 4).unwrap(), 1e-10).unwrap());
        let g = xxz_family::<f64>(4, &tol()).unwrap();
        let h = assemble(&g, &sample_parameters(&g, 3, SamplingPolicy::Generic).unwrap()).unwrap();
        assert!(commutes(&h, &parity_x(4).unwrap(), 1e-10).unwrap());
        assert!(commutes(&h, &total_spin_component(Axis::Z, 4).unwrap(), 1e-10).unwrap());
    }

    #[test]
    fn sampling_is_deterministic() {
        let f = xxz_family::<f64>(4, &tol()).unwrap();
        let a = sample_parameters(&f, 5, SamplingPolicy::Generic).unwrap();
        let b = sample_parameters(&f, 5, SamplingPolicy::Generic).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_parameters(&f, 6, SamplingPolicy::Generic).unwrap());
        assert!(a.couplings.iter().all(|x| (0.1..=2.0).contains(&x.abs())));
    }

    #[test]
    fn accidental_policy_ties_bonds() {
        let f = xxz_family::<f64>(5, &tol()).unwrap();
        let p = sample_parameters(&f, 9, SamplingPolicy::AccidentalXxx).unwrap();
        assert_eq!(p.len(), 8);
        for bond in p.couplings.chunks(2) {
            assert_eq!(bond[0], bond[1]);
        }
        let g = xxx_family::<f64>(5, &tol()).unwrap();
        assert!(matches!(
            sample_parameters(&g, 9, SamplingPolicy::AccidentalXxx),
            Err(Error::PolicyMismatch { .. })
        ));
    }

    #[test]
    fn dependent_terms_are_rejected() {
        let f = xxx_family::<f64>(3, &tol()).unwrap();
        let t = f.terms()[0].clone();
        let err = HamiltonianFamily::new(
            ModelKind::Xxx,
            3,
            vec![t.clone(), NamedOperator::new("dup", &t.operator * 2.0)],
            vec![],
            vec![],
            true,
            &tol(),
        );
        assert!(matches!(err, Err(Error::InvalidFamily(_))));
    }

    #[test]
    fn descriptor_round_trips() {
        let f = xxz_family::<f64>(3, &tol()).unwrap();
        let d = f.descriptor(Some(SamplingPolicy::AccidentalXxx));
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"accidental_xxx\""));
        let back: FamilyDescriptor = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
