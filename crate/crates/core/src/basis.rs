//! Symmetry-adapted bases: joint eigenvectors of the labeling operators,
//! grouped into copies of irreducible representations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{family_for, HamiltonianFamily, ModelKind};
use crate::operator::{parity_x, total_spin_component, Axis, HermitianOperator, StateVector};
use crate::scalar::{hermitian_eigen_auto, lit, to_f64, Real};
use crate::tolerance::Tolerances;

/// A number in `½ℤ`, stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct HalfInteger(i64);

impl HalfInteger {
    pub const ZERO: Self = Self(0);

    pub fn from_twice(twice: i64) -> Self {
        Self(twice)
    }

    /// Nearest half-integer to `x`.
    pub fn from_f64(x: f64) -> Self {
        Self((2.0 * x).round() as i64)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        Self(self.0.abs())
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            kind: "half-integer",
            value: s.to_string(),
        };
        let s = s.trim();
        match s.split_once('/') {
            Some((num, "2")) => {
                let n: i64 = num.trim().parse().map_err(|_| bad())?;
                if n % 2 == 0 {
                    return Err(bad());
                }
                Ok(Self(n))
            }
            Some(_) => Err(bad()),
            None => s.parse::<i64>().map(|n| Self(2 * n)).map_err(|_| bad()),
        }
    }
}

impl TryFrom<String> for HalfInteger {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<HalfInteger> for String {
    fn from(h: HalfInteger) -> String {
        h.to_string()
    }
}

/// Spin `s` from a Casimir eigenvalue `s(s+1)`.
pub fn spin_from_casimir(x: f64) -> HalfInteger {
    HalfInteger::from_f64(((1.0 + 4.0 * x.max(0.0)).sqrt() - 1.0) / 2.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    #[serde(rename = "+")]
    Even,
    #[serde(rename = "-")]
    Odd,
}

impl Parity {
    pub fn from_sign(x: f64) -> Self {
        if x >= 0.0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "+",
            Parity::Odd => "-",
        })
    }
}

/// Irrep label: total spin for SU(2), or `|m|` (with Π_x parity at `m = 0`)
/// for U(1) × parity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum IrrepLabel {
    #[serde(rename = "su2_spin")]
    Spin { spin: HalfInteger },
    #[serde(rename = "u1_parity")]
    Magnetization {
        m: HalfInteger,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parity: Option<Parity>,
    },
}

impl IrrepLabel {
    pub fn spin(spin: HalfInteger) -> Self {
        IrrepLabel::Spin { spin }
    }

    pub fn magnetization(m: HalfInteger, parity: Option<Parity>) -> Self {
        IrrepLabel::Magnetization { m: m.abs(), parity }
    }

    /// Dimension `d_p` of the irrep.
    pub fn dim(&self) -> usize {
        match *self {
            IrrepLabel::Spin { spin } => spin.twice() as usize + 1,
            IrrepLabel::Magnetization { m, .. } => {
                if m.twice() == 0 {
                    1
                } else {
                    2
                }
            }
        }
    }

    /// `S` or `|m|`: the column a label occupies in a table.
    pub fn sector(&self) -> HalfInteger {
        match *self {
            IrrepLabel::Spin { spin } => spin,
            IrrepLabel::Magnetization { m, .. } => m,
        }
    }

    pub fn parity(&self) -> Option<Parity> {
        match *self {
            IrrepLabel::Spin { .. } => None,
            IrrepLabel::Magnetization { parity, .. } => parity,
        }
    }

    /// Compact notation: `3` (dimension of a spin irrep), `2^{1/2}`, `1^{0,+}`.
    pub fn notation(&self) -> String {
        match *self {
            IrrepLabel::Spin { spin } => format!("{}", spin.twice() + 1),
            IrrepLabel::Magnetization { m, parity } => match parity {
                Some(p) => format!("1^{{{m},{p}}}"),
                None => format!("{}^{{{m}}}", self.dim()),
            },
        }
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrrepLabel::Spin { spin } => write!(f, "S={spin}"),
            IrrepLabel::Magnetization { .. } => f.write_str(&self.notation()),
        }
    }
}

/// Position of a basis vector inside the irrep decomposition: copy `i` and
/// component `m`, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IrrepSlot {
    pub label: IrrepLabel,
    pub degeneracy: usize,
    pub component: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisLabel {
    /// Eigenvalues (expectation values for rotated pairs) of the labeling
    /// operators, in operator order.
    pub raw: Vec<f64>,
    pub slot: Option<IrrepSlot>,
}

/// Orthonormal basis stored column-wise, one label per column.
#[derive(Clone, Debug)]
pub struct LabeledBasis<T: Real> {
    vectors: DMatrix<Complex<T>>,
    labels: Vec<BasisLabel>,
    model: Option<ModelKind>,
}

impl<T: Real> LabeledBasis<T> {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }

    pub fn vectors(&self) -> &DMatrix<Complex<T>> {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> DVector<Complex<T>> {
        self.vectors.column(k).into_owned()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn model(&self) -> Option<ModelKind> {
        self.model
    }

    pub fn is_labeled(&self) -> bool {
        self.labels.iter().all(|l| l.slot.is_some())
    }

    pub fn slot(&self, k: usize) -> Result<IrrepSlot> {
        self.labels
            .get(k)
            .ok_or(Error::IndexOutOfRange {
                index: k,
                dim: self.len(),
            })?
            .slot
            .ok_or(Error::UnlabeledBasis)
    }

    /// `max |V†V − I|`.
    pub fn orthonormality_deviation(&self) -> f64 {
        let g = self.vectors.adjoint() * &self.vectors;
        let mut dev = 0.0f64;
        for j in 0..g.ncols() {
            for i in 0..g.nrows() {
                let target = if i == j { T::one() } else { T::zero() };
                dev = dev.max(to_f64((g[(i, j)] - Complex::new(target, T::zero())).modulus()));
            }
        }
        dev
    }

    pub fn max_imaginary(&self) -> f64 {
        self.vectors.iter().fold(0.0f64, |acc, z| acc.max(to_f64(z.im.abs())))
    }

    /// `ν_p` for every label present.
    pub fn multiplicities(&self) -> Result<BTreeMap<IrrepLabel, usize>> {
        let mut copies: BTreeMap<IrrepLabel, BTreeSet<usize>> = BTreeMap::new();
        for l in &self.labels {
            let slot = l.slot.ok_or(Error::UnlabeledBasis)?;
            copies.entry(slot.label).or_default().insert(slot.degeneracy);
        }
        Ok(copies.into_iter().map(|(k, v)| (k, v.len())).collect())
    }

    /// Column indices whose label is `label`.
    pub fn indices_of(&self, label: &IrrepLabel) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.slot.map(|s| s.label == *label).unwrap_or(false))
            .map(|(k, _)| k)
            .collect()
    }

    /// Expansion coefficients `⟨φ_k|ψ⟩`.
    pub fn coefficients(&self, state: &StateVector<T>) -> Result<DVector<Complex<T>>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: state.dim(),
            });
        }
        Ok(self.vectors.adjoint() * state.amplitudes())
    }
}

/// A joint eigenspace of an operator list together with its eigenvalue tuple.
#[derive(Clone, Debug)]
pub struct JointEigenspace<T: Real> {
    pub vectors: DMatrix<Complex<T>>,
    pub eigenvalues: Vec<f64>,
}

/// Sequential refinement: diagonalize the first operator, cluster its
/// spectrum, then diagonalize each later operator inside every cluster.
/// Eigenspaces come out in lexicographic order of their eigenvalue tuples and
/// may be more than one-dimensional if the operators are not complete.
pub fn joint_eigenspaces<T: Real>(ops: &[HermitianOperator<T>], tol: &Tolerances) -> Result<Vec<JointEigenspace<T>>> {
    let first = ops.first().ok_or(Error::EmptyOperatorList)?;
    let dim = first.dim();
    for (i, a) in ops.iter().enumerate() {
        if a.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: a.dim(),
            });
        }
        for (j, b) in ops.iter().enumerate().skip(i + 1) {
            let dev = to_f64(a.commutator_max(b)?);
            if dev > tol.comm {
                return Err(Error::NonCommuting {
                    left: format!("ops[{i}]"),
                    right: format!("ops[{j}]"),
                    deviation: dev,
                });
            }
        }
    }

    let mut spaces = vec![JointEigenspace {
        vectors: DMatrix::identity(dim, dim),
        eigenvalues: Vec::new(),
    }];
    for (level, op) in ops.iter().enumerate() {
        let spectra: Vec<(Vec<T>, DMatrix<Complex<T>>)> = spaces
            .iter()
            .map(|s| {
                let projected = if level == 0 {
                    op.entries().clone()
                } else {
                    s.vectors.adjoint() * op.entries() * &s.vectors
                };
                diagonalize(&projected)
            })
            .collect();
        let (lo, hi) = spectra
            .iter()
            .flat_map(|(v, _)| v.iter().map(|&x| to_f64(x)))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let range = hi - lo;
        let scale = if range > 0.0 { range } else { lo.abs().max(1.0) };
        let gap = tol.cluster * scale;

        let mut next = Vec::new();
        for (space, (values, rotation)) in spaces.iter().zip(spectra) {
            let rotated = if level == 0 {
                rotation
            } else {
                &space.vectors * rotation
            };
            let mut start = 0;
            for k in 1..=values.len() {
                if k == values.len() || to_f64(values[k] - values[k - 1]) > gap {
                    let n = k - start;
                    let mean = values[start..k].iter().map(|&x| to_f64(x)).sum::<f64>() / n as f64;
                    let mut eigenvalues = space.eigenvalues.clone();
                    eigenvalues.push(mean);
                    next.push(JointEigenspace {
                        vectors: rotated.columns(start, n).into_owned(),
                        eigenvalues,
                    });
                    start = k;
                }
            }
        }
        spaces = next;
    }
    Ok(spaces)
}

fn diagonalize<T: Real>(m: &DMatrix<Complex<T>>) -> (Vec<T>, DMatrix<Complex<T>>) {
    let n = m.nrows();
    let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == Complex::new(T::zero(), T::zero())));
    if diagonal {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| m[(a, a)].re.partial_cmp(&m[(b, b)].re).expect("NaN eigenvalue"));
        let values = order.iter().map(|&k| m[(k, k)].re).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (j, &k) in order.iter().enumerate() {
            vectors[(k, j)] = Complex::new(T::one(), T::zero());
        }
        return (values, vectors);
    }
    let half = lit::<T>(0.5);
    let sym = (m + m.adjoint()).map(|z| z * half);
    hermitian_eigen_auto(&sym)
}

/// Joint eigenbasis of pairwise commuting operators; every joint eigenspace
/// must be one-dimensional.
pub fn simultaneous_eigenbasis<T: Real>(ops: &[HermitianOperator<T>], tol: &Tolerances) -> Result<LabeledBasis<T>> {
    let spaces = joint_eigenspaces(ops, tol)?;
    let unresolved: Vec<usize> = spaces.iter().map(|s| s.vectors.ncols()).filter(|&n| n > 1).collect();
    if !unresolved.is_empty() {
        return Err(Error::UnresolvedDegeneracy {
            count: unresolved.len(),
            largest: unresolved.into_iter().max().unwrap_or(0),
        });
    }
    let dim = ops[0].dim();
    let mut vectors = DMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    for (k, s) in spaces.into_iter().enumerate() {
        let mut v = s.vectors.column(0).into_owned();
        fix_phase(&mut v);
        vectors.set_column(k, &v);
        labels.push(BasisLabel {
            raw: s.eigenvalues,
            slot: None,
        });
    }
    Ok(LabeledBasis {
        vectors,
        labels,
        model: None,
    })
}

/// Makes the largest-magnitude amplitude (first one on ties) real positive.
pub fn fix_phase<T: Real>(v: &mut DVector<Complex<T>>) {
    let largest = v.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()));
    if largest == T::zero() {
        return;
    }
    let cutoff = largest * (T::one() - lit::<T>(1e-9));
    if let Some(z) = v.iter().find(|z| z.modulus() >= cutoff).copied() {
        let phase = z.conj() / Complex::new(z.modulus(), T::zero());
        v.apply(|x| *x *= phase);
    }
}

/// Replaces each joint eigenspace by an all-real orthonormal basis of the
/// same span. Labeled vectors are treated as one-dimensional eigenspaces.
pub fn realify<T: Real>(basis: &LabeledBasis<T>, tol: &Tolerances) -> Result<LabeledBasis<T>> {
    let mut groups: BTreeMap<Vec<u64>, Vec<usize>> = BTreeMap::new();
    for (k, l) in basis.labels.iter().enumerate() {
        let mut key: Vec<u64> = l.raw.iter().map(|x| x.to_bits()).collect();
        if l.slot.is_some() {
            key.push(k as u64);
        }
        groups.entry(key).or_default().push(k);
    }
    let dim = basis.dim();
    let mut out = basis.vectors.clone();
    let accept = tol.orth.sqrt();
    for indices in groups.values() {
        let mut candidates: Vec<DVector<T>> = Vec::with_capacity(2 * indices.len());
        for &k in indices {
            let col = basis.vectors.column(k);
            candidates.push(col.map(|z| z.re));
            candidates.push(col.map(|z| z.im));
        }
        let mut chosen: Vec<DVector<T>> = Vec::with_capacity(indices.len());
        for _ in indices {
            let mut best: Option<(T, DVector<T>)> = None;
            for c in &candidates {
                let mut r = c.clone();
                for _ in 0..2 {
                    for w in &chosen {
                        let overlap = w.dot(&r);
                        r.axpy(-overlap, w, T::one());
                    }
                }
                let n = r.norm();
                if best.as_ref().map(|(b, _)| n > *b).unwrap_or(true) {
                    best = Some((n, r));
                }
            }
            let (n, r) = best.ok_or(Error::NotConjugationInvariant)?;
            if to_f64(n) <= accept {
                return Err(Error::NotConjugationInvariant);
            }
            chosen.push(r / n);
        }
        for &k in indices {
            let v = basis.vectors.column(k);
            let mut residual = v.into_owned();
            for w in &chosen {
                let wc: DVector<Complex<T>> = w.map(|x| Complex::new(x, T::zero()));
                let overlap = wc.dotc(&residual);
                residual -= wc * overlap;
            }
            if to_f64(residual.norm()) > accept {
                return Err(Error::NotConjugationInvariant);
            }
        }
        for (&k, w) in indices.iter().zip(&chosen) {
            debug_assert_eq!(w.len(), dim);
            out.set_column(k, &w.map(|x| Complex::new(x, T::zero())));
        }
    }
    Ok(LabeledBasis {
        vectors: out,
        labels: basis.labels.clone(),
        model: basis.model,
    })
}

fn sites_of(dim: usize) -> Result<usize> {
    if !dim.is_power_of_two() || dim < 2 {
        return Err(Error::NotPowerOfTwo(dim));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Completes raw eigenvalue tuples with `(p, i, m)` and reorders the basis by
/// label, copy and component.
///
/// XXX: tuples are `(S_z, S_2², …, S_L²)`. Lower components of each copy are
/// phased so that `⟨φ_{m−1}|S_x|φ_m⟩ > 0`, which makes reduced matrices
/// identical across components.
///
/// XXZ: tuples are `(S_z², Π_x, σ₁ᶻσ₂ᶻ, …, σ₁ᶻσ_Lᶻ)`. Each `m ≠ 0` pair of
/// parity eigenvectors is rotated to `S_z` eigenvectors: component 1 has
/// `m = +|m|` and component 2 is `Π_x` applied to component 1.
pub fn label_irreps<T: Real>(basis: &LabeledBasis<T>, kind: ModelKind, tol: &Tolerances) -> Result<LabeledBasis<T>> {
    match kind {
        ModelKind::Xxx => label_xxx(basis),
        ModelKind::Xxz => label_xxz(basis, tol),
    }
}

fn expect_raw_len(label: &BasisLabel, len: usize) -> Result<()> {
    if label.raw.len() != len {
        return Err(Error::InconsistentPairing(format!(
            "expected {len} eigenvalues per vector, found {}",
            label.raw.len()
        )));
    }
    Ok(())
}

fn label_xxx<T: Real>(basis: &LabeledBasis<T>) -> Result<LabeledBasis<T>> {
    let sites = sites_of(basis.dim())?;
    // spin → intermediate-spin path → twice m → column
    let mut tree: BTreeMap<HalfInteger, BTreeMap<Vec<i64>, BTreeMap<i64, usize>>> = BTreeMap::new();
    for (k, l) in basis.labels.iter().enumerate() {
        expect_raw_len(l, sites)?;
        let m = HalfInteger::from_f64(l.raw[0]);
        let spin = spin_from_casimir(l.raw[sites - 1]);
        if m.abs() > spin || (spin.twice() - m.twice()) % 2 != 0 {
            return Err(Error::InconsistentPairing(format!(
                "magnetization {m} incompatible with spin {spin}"
            )));
        }
        let path = l.raw[1..sites - 1]
            .iter()
            .map(|&x| spin_from_casimir(x).twice())
            .collect();
        let prior = tree
            .entry(spin)
            .or_default()
            .entry(path)
            .or_default()
            .insert(m.twice(), k);
        if prior.is_some() {
            return Err(Error::InconsistentPairing(format!(
                "duplicate (S={spin}, m={m}) component"
            )));
        }
    }

    let sx = total_spin_component::<T>(Axis::X, sites)?;
    let mut vectors = DMatrix::zeros(basis.dim(), basis.len());
    let mut labels = Vec::with_capacity(basis.len());
    for (spin, paths) in &tree {
        let label = IrrepLabel::spin(*spin);
        for (i, comps) in paths.values().enumerate() {
            if comps.len() != label.dim() {
                return Err(Error::InconsistentPairing(format!(
                    "copy {} of S={spin} has {} of {} components",
                    i + 1,
                    comps.len(),
                    label.dim()
                )));
            }
            let mut prev: Option<DVector<Complex<T>>> = None;
            for (c, (_, &k)) in comps.iter().rev().enumerate() {
                let mut v = basis.vector(k);
                match &prev {
                    None => fix_phase(&mut v),
                    Some(p) => {
                        let z = v.dotc(&sx.apply(p));
                        let r = z.modulus();
                        if to_f64(r) <= 1e-8 {
                            return Err(Error::InconsistentPairing(format!(
                                "S={spin} copy {} components are not linked by S_x",
                                i + 1
                            )));
                        }
                        v *= z / Complex::new(r, T::zero());
                    }
                }
                vectors.set_column(labels.len(), &v);
                labels.push(BasisLabel {
                    raw: basis.labels[k].raw.clone(),
                    slot: Some(IrrepSlot {
                        label,
                        degeneracy: i + 1,
                        component: c + 1,
                    }),
                });
                prev = Some(v);
            }
        }
    }
    Ok(LabeledBasis {
        vectors,
        labels,
        model: Some(ModelKind::Xxx),
    })
}

fn label_xxz<T: Real>(basis: &LabeledBasis<T>, tol: &Tolerances) -> Result<LabeledBasis<T>> {
    let sites = sites_of(basis.dim())?;
    let mut zero: BTreeMap<Parity, BTreeMap<Vec<i64>, usize>> = BTreeMap::new();
    let mut pairs: BTreeMap<HalfInteger, BTreeMap<Vec<i64>, [Option<usize>; 2]>> = BTreeMap::new();
    for (k, l) in basis.labels.iter().enumerate() {
        expect_raw_len(l, sites + 1)?;
        let m = HalfInteger::from_f64(l.raw[0].max(0.0).sqrt());
        let parity = Parity::from_sign(l.raw[1]);
        let zz: Vec<i64> = l.raw[2..].iter().map(|x| x.round() as i64).collect();
        if m.twice() == 0 {
            if zero.entry(parity).or_default().insert(zz, k).is_some() {
                return Err(Error::InconsistentPairing("duplicate m = 0 vector".into()));
            }
        } else {
            let slot =
                &mut pairs.entry(m).or_default().entry(zz).or_insert([None, None])[(parity == Parity::Odd) as usize];
            if slot.replace(k).is_some() {
                return Err(Error::InconsistentPairing(format!("duplicate |m|={m} vector")));
            }
        }
    }

    let sz = total_spin_component::<T>(Axis::Z, sites)?;
    let px = parity_x::<T>(sites)?;
    let mut vectors = DMatrix::zeros(basis.dim(), basis.len());
    let mut labels = Vec::with_capacity(basis.len());
    for (parity, copies) in &zero {
        let label = IrrepLabel::magnetization(HalfInteger::ZERO, Some(*parity));
        for (i, &k) in copies.values().enumerate() {
            vectors.set_column(labels.len(), &basis.vectors.column(k));
            labels.push(BasisLabel {
                raw: basis.labels[k].raw.clone(),
                slot: Some(IrrepSlot {
                    label,
                    degeneracy: i + 1,
                    component: 1,
                }),
            });
        }
    }
    for (m, copies) in &pairs {
        let label = IrrepLabel::magnetization(*m, None);
        for (i, (zz, pair)) in copies.iter().enumerate() {
            let (Some(a), Some(b)) = (pair[0], pair[1]) else {
                return Err(Error::InconsistentPairing(format!(
                    "|m|={m} copy {} is missing a parity partner",
                    i + 1
                )));
            };
            let mut sub = DMatrix::zeros(basis.dim(), 2);
            sub.set_column(0, &basis.vectors.column(a));
            sub.set_column(1, &basis.vectors.column(b));
            let restricted = sub.adjoint() * sz.entries() * &sub;
            let half = lit::<T>(0.5);
            let (values, w) = hermitian_eigen_auto(&(&restricted + restricted.adjoint()).map(|z| z * half));
            if (to_f64(values[1]) - m.value()).abs() > tol.cluster * sites as f64 {
                return Err(Error::InconsistentPairing(format!(
                    "|m|={m} pair does not contain an S_z = +{m} state"
                )));
            }
            let mut up = &sub * w.column(1);
            fix_phase(&mut up);
            let down = px.apply(&up);
            let mut raw = vec![m.value() * m.value(), 0.0];
            raw.extend(zz.iter().map(|&x| x as f64));
            for (c, v) in [up, down].iter().enumerate() {
                vectors.set_column(labels.len(), v);
                labels.push(BasisLabel {
                    raw: raw.clone(),
                    slot: Some(IrrepSlot {
                        label,
                        degeneracy: i + 1,
                        component: c + 1,
                    }),
                });
            }
        }
    }
    Ok(LabeledBasis {
        vectors,
        labels,
        model: Some(ModelKind::Xxz),
    })
}

/// Full pipeline: joint eigenbasis of the labeling operators, realification
/// for real families, irrep labeling.
pub fn build_symmetry_basis<T: Real>(family: &HamiltonianFamily<T>, tol: &Tolerances) -> Result<LabeledBasis<T>> {
    let ops: Vec<HermitianOperator<T>> = family.labeling_operators().iter().map(|o| o.operator.clone()).collect();
    let mut basis = simultaneous_eigenbasis(&ops, tol)?;
    if family.has_real_structure() {
        basis = realify(&basis, tol)?;
    }
    let basis = label_irreps(&basis, family.kind(), tol)?;
    let dev = basis.orthonormality_deviation();
    if dev > tol.orth {
        return Err(Error::InconsistentPairing(format!(
            "basis is not orthonormal (deviation {dev:e})"
        )));
    }
    Ok(basis)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrrepCount {
    pub label: IrrepLabel,
    pub dim: usize,
    pub multiplicity: usize,
}

/// `H = ⊕_p ν_p × H_p` for one chain length.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub sites: usize,
    pub model: ModelKind,
    pub irreps: Vec<IrrepCount>,
    pub distinct_irreps: usize,
}

impl DecompositionReport {
    pub fn from_basis<T: Real>(basis: &LabeledBasis<T>) -> Result<Self> {
        let model = basis.model.ok_or(Error::UnlabeledBasis)?;
        let sites = sites_of(basis.dim())?;
        let irreps: Vec<IrrepCount> = basis
            .multiplicities()?
            .into_iter()
            .map(|(label, multiplicity)| IrrepCount {
                label,
                dim: label.dim(),
                multiplicity,
            })
            .collect();
        let report = Self {
            sites,
            model,
            distinct_irreps: irreps.len(),
            irreps,
        };
        let sum = report.total_dim();
        if sum != basis.dim() {
            return Err(Error::IncompleteDecomposition {
                sum,
                expected: basis.dim(),
            });
        }
        Ok(report)
    }

    /// `Σ ν_p d_p`.
    pub fn total_dim(&self) -> usize {
        self.irreps.iter().map(|c| c.dim * c.multiplicity).sum()
    }

    pub fn multiplicity(&self, label: &IrrepLabel) -> Option<usize> {
        self.irreps.iter().find(|c| c.label == *label).map(|c| c.multiplicity)
    }

    /// Total multiplicity of all labels in the column `sector` (`S` or `|m|`).
    pub fn sector_multiplicity(&self, sector: HalfInteger, parity: Option<Parity>) -> Option<usize> {
        let hits: Vec<&IrrepCount> = self
            .irreps
            .iter()
            .filter(|c| c.label.sector() == sector && (parity.is_none() || c.label.parity() == parity))
            .collect();
        if hits.is_empty() {
            None
        } else {
            Some(hits.iter().map(|c| c.multiplicity).sum())
        }
    }

    /// Irreps in table order: descending spin for XXX, and parity sectors
    /// first then ascending `|m|` for XXZ.
    pub fn ordered(&self) -> Vec<&IrrepCount> {
        let mut v: Vec<&IrrepCount> = self.irreps.iter().collect();
        if self.model == ModelKind::Xxx {
            v.reverse();
        }
        v
    }

    /// Direct-sum expression such as `7⊕(5×5)⊕(9×3)⊕(5×1)`.
    pub fn expression(&self) -> String {
        self.ordered()
            .iter()
            .map(|c| {
                let n = c.label.notation();
                if c.multiplicity == 1 {
                    n
                } else {
                    format!("({}×{})", c.multiplicity, n)
                }
            })
            .collect::<Vec<_>>()
            .join("⊕")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "L = {}, {}: 2^{} = {}\n\n| irrep | d_p | ν_p |\n|---|---|---|\n",
            self.sites,
            self.model,
            self.sites,
            self.expression()
        );
        for c in self.ordered() {
            out.push_str(&format!("| {} | {} | {} |\n", c.label, c.dim, c.multiplicity));
        }
        out
    }
}

/// Builds the basis for `(kind, sites)` in double precision and tabulates it.
pub fn decomposition_report(kind: ModelKind, sites: usize, tol: &Tolerances) -> Result<DecompositionReport> {
    if !(2..=crate::operator::MAX_SITES).contains(&sites) {
        return Err(Error::InvalidSiteCount {
            sites,
            reason: "decomposition needs 2 <= L <= 12",
        });
    }
    let family = family_for::<f64>(kind, sites, tol)?;
    let basis = build_symmetry_basis(&family, tol)?;
    DecompositionReport::from_basis(&basis)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelWeight {
    pub label: IrrepLabel,
    pub weight: f64,
}

/// Λ(ψ) together with the squared projection weight on every label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateClassification {
    pub labels: Vec<IrrepLabel>,
    pub weights: Vec<LabelWeight>,
}

impl StateClassification {
    pub fn single(&self) -> Option<IrrepLabel> {
        match self.labels.as_slice() {
            [only] => Some(*only),
            _ => None,
        }
    }

    /// The label carrying at least `min_weight` of the state, if any.
    pub fn dominant(&self, min_weight: f64) -> Option<IrrepLabel> {
        self.weights.iter().find(|w| w.weight >= min_weight).map(|w| w.label)
    }

    pub fn contains(&self, label: &IrrepLabel) -> bool {
        self.labels.contains(label)
    }

    pub fn weight(&self, label: &IrrepLabel) -> f64 {
        self.weights
            .iter()
            .find(|w| w.label == *label)
            .map(|w| w.weight)
            .unwrap_or(0.0)
    }
}

pub fn classify_state<T: Real>(
    state: &StateVector<T>,
    basis: &LabeledBasis<T>,
    tol_proj: f64,
) -> Result<StateClassification> {
    let c = basis.coefficients(state)?;
    let mut weights: BTreeMap<IrrepLabel, f64> = BTreeMap::new();
    for (k, l) in basis.labels.iter().enumerate() {
        let slot = l.slot.ok_or(Error::UnlabeledBasis)?;
        *weights.entry(slot.label).or_default() += to_f64(c[k].modulus_squared());
    }
    Ok(StateClassification {
        labels: weights.iter().filter(|(_, &w)| w > tol_proj).map(|(l, _)| *l).collect(),
        weights: weights
            .into_iter()
            .map(|(label, weight)| LabelWeight { label, weight })
            .collect(),
    })
}

/// How far an operator is from the block structure a symmetric scalar must
/// have in a labeled basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockStructure {
    /// Largest `|⟨φ^q_{jl}|A|φ^p_{im}⟩|` with `p ≠ q` or `m ≠ l`.
    pub cross_block_max: f64,
    /// Largest difference between a component's `ν_p × ν_p` block and the
    /// block of component 1.
    pub reduced_spread: f64,
}

pub fn block_structure<T: Real>(basis: &LabeledBasis<T>, op: &HermitianOperator<T>) -> Result<BlockStructure> {
    if op.dim() != basis.dim() {
        return Err(Error::DimensionMismatch {
            left: basis.dim(),
            right: op.dim(),
        });
    }
    let slots: Vec<IrrepSlot> = (0..basis.len()).map(|k| basis.slot(k)).collect::<Result<_>>()?;
    let m = basis.vectors.adjoint() * op.entries() * &basis.vectors;
    let mut cross = 0.0f64;
    let mut index: BTreeMap<(IrrepLabel, usize, usize), usize> = BTreeMap::new();
    for (a, sa) in slots.iter().enumerate() {
        index.insert((sa.label, sa.degeneracy, sa.component), a);
        for (b, sb) in slots.iter().enumerate() {
            if sa.label != sb.label || sa.component != sb.component {
                cross = cross.max(to_f64(m[(a, b)].modulus()));
            }
        }
    }
    let mut spread = 0.0f64;
    for (&(label, i, c), &a) in &index {
        if c == 1 {
            continue;
        }
        for (&(l2, j, c2), &b) in &index {
            if l2 != label || c2 != c {
                continue;
            }
            let a1 = index[&(label, i, 1)];
            let b1 = index[&(label, j, 1)];
            spread = spread.max(to_f64((m[(a, b)] - m[(a1, b1)]).modulus()));
        }
    }
    Ok(BlockStructure {
        cross_block_max: cross,
        reduced_spread: spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{xxx_family, xxz_family};
    use crate::operator::{partial_spin_squared, sum_pauli_strings, Pauli, PauliString};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn spin(twice: i64) -> IrrepLabel {
        IrrepLabel::spin(HalfInteger::from_twice(twice))
    }

    fn mag(twice: i64, parity: Option<Parity>) -> IrrepLabel {
        IrrepLabel::magnetization(HalfInteger::from_twice(twice), parity)
    }

    #[test]
    fn half_integer_text_round_trip() {
        for (text, twice) in [("0", 0), ("1/2", 1), ("3/2", 3), ("2", 4), ("-1/2", -1)] {
            let h: HalfInteger = text.parse().unwrap();
            assert_eq!(h.twice(), twice);
            assert_eq!(h.to_string(), text);
        }
        assert!("2/2".parse::<HalfInteger>().is_err());
        assert!("1/3".parse::<HalfInteger>().is_err());
        assert_eq!(serde_json::to_string(&HalfInteger::from_twice(5)).unwrap(), "\"5/2\"");
    }

    #[test]
    fn irrep_dims_and_notation() {
        assert_eq!(spin(3).dim(), 4);
        assert_eq!(spin(0).dim(), 1);
        assert_eq!(mag(3, None).dim(), 2);
        assert_eq!(mag(0, Some(Parity::Odd)).dim(), 1);
        assert_eq!(mag(3, None).notation(), "2^{3/2}");
        assert_eq!(mag(0, Some(Parity::Even)).notation(), "1^{0,+}");
        let json = serde_json::to_string(&mag(0, Some(Parity::Odd))).unwrap();
        assert_eq!(json, r#"{"kind":"u1_parity","m":"0","parity":"-"}"#);
        let back: IrrepLabel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, mag(0, Some(Parity::Odd)));
    }

    #[test]
    fn single_site_sigma_z() {
        let z = sum_pauli_strings::<f64>(1, &[PauliString::new(vec![Pauli::Z], 1.0)]).unwrap();
        let b = simultaneous_eigenbasis(&[z], &tol()).unwrap();
        assert_eq!(b.len(), 2);
        // Ascending eigenvalues: −1 first, i.e. |1⟩.
        assert_eq!(b.labels()[0].raw, vec![-1.0]);
        assert_eq!(b.vector(0)[1].re, 1.0);
        assert_eq!(b.labels()[1].raw, vec![1.0]);
        assert_eq!(b.vector(1)[0].re, 1.0);
    }

    #[test]
    fn two_site_singlet_and_triplet() {
        let sz = total_spin_component::<f64>(Axis::Z, 2).unwrap();
        let s2 = partial_spin_squared::<f64>(2, 2).unwrap();
        let b = simultaneous_eigenbasis(&[sz, s2], &tol()).unwrap();
        let zero: Vec<usize> = (0..4).filter(|&k| b.labels()[k].raw[0].abs() < 1e-12).collect();
        assert_eq!(zero.len(), 2);
        let r = 0.5f64.sqrt();
        for &k in &zero {
            let v = b.vector(k);
            let s2 = b.labels()[k].raw[1];
            if s2.abs() < 1e-9 {
                assert!((v[1].re - r).abs() < 1e-12 && (v[2].re + r).abs() < 1e-12);
            } else {
                assert!((s2 - 2.0).abs() < 1e-9);
                assert!((v[1].re - r).abs() < 1e-12 && (v[2].re - r).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_commuting_and_empty_inputs_fail() {
        let x = total_spin_component::<f64>(Axis::X, 2).unwrap();
        let z = total_spin_component::<f64>(Axis::Z, 2).unwrap();
        assert!(matches!(
            simultaneous_eigenbasis(&[x, z.clone()], &tol()),
            Err(Error::NonCommuting { .. })
        ));
        assert!(matches!(
            simultaneous_eigenbasis::<f64>(&[], &tol()),
            Err(Error::EmptyOperatorList)
        ));
        assert!(matches!(
            simultaneous_eigenbasis(&[z], &tol()),
            Err(Error::UnresolvedDegeneracy { count: 1, largest: 2 })
        ));
    }

    #[test]
    fn xxx_five_site_casimir_multiplicities() {
        let f = xxx_family::<f64>(5, &tol()).unwrap();
        let ops: Vec<_> = f.labeling_operators().iter().map(|o| o.operator.clone()).collect();
        let b = simultaneous_eigenbasis(&ops, &tol()).unwrap();
        let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
        for l in b.labels() {
            *counts.entry((l.raw[4] * 100.0).round() as i64).or_default() += 1;
        }
        assert_eq!(counts, BTreeMap::from([(75, 10), (375, 16), (875, 6)]));
    }

    #[test]
    fn realify_removes_global_phase() {
        let f = xxx_family::<f64>(3, &tol()).unwrap();
        let b = build_symmetry_basis(&f, &tol()).unwrap();
        let mut rotated = b.clone();
        rotated.vectors.column_mut(2).apply(|z| *z *= Complex::new(0.0, 1.0));
        let r = realify(&rotated, &tol()).unwrap();
        assert!(r.max_imaginary() == 0.0);
        assert!((r.vector(2) - b.vector(2)).norm() < 1e-14);
        let again = realify(&r, &tol()).unwrap();
        assert_eq!(again.vectors, r.vectors);
    }

    #[test]
    fn realify_rejects_non_invariant_space() {
        let c = Complex::new(0.5f64.sqrt(), 0.0);
        let i = Complex::new(0.0, 0.5f64.sqrt());
        // Column (1, i)/√2 is alone in its eigenspace but its conjugate is not
        // parallel to it.
        let vectors = DMatrix::from_row_slice(2, 2, &[c, c, i, -i]);
        let basis = LabeledBasis {
            vectors,
            labels: vec![
                BasisLabel {
                    raw: vec![0.0],
                    slot: None,
                },
                BasisLabel {
                    raw: vec![1.0],
                    slot: None,
                },
            ],
            model: None,
        };
        assert!(matches!(realify(&basis, &tol()), Err(Error::NotConjugationInvariant)));
    }

    #[test]
    fn xxx_labels_small_chains() {
        let r = decomposition_report(ModelKind::Xxx, 2, &tol()).unwrap();
        assert_eq!(r.multiplicity(&spin(2)), Some(1));
        assert_eq!(r.multiplicity(&spin(0)), Some(1));
        assert_eq!(r.expression(), "3⊕1");
        let r = decomposition_report(ModelKind::Xxx, 6, &tol()).unwrap();
        assert_eq!(r.expression(), "7⊕(5×5)⊕(9×3)⊕(5×1)");
        assert_eq!(r.distinct_irreps, 4);
    }

    #[test]
    fn xxz_labels_small_chains() {
        let r = decomposition_report(ModelKind::Xxz, 4, &tol()).unwrap();
        assert_eq!(r.multiplicity(&mag(4, None)), Some(1));
        assert_eq!(r.multiplicity(&mag(2, None)), Some(4));
        assert_eq!(r.multiplicity(&mag(0, Some(Parity::Even))), Some(3));
        assert_eq!(r.multiplicity(&mag(0, Some(Parity::Odd))), Some(3));
        assert_eq!(r.expression(), "(3×1^{0,+})⊕(3×1^{0,-})⊕(4×2^{1})⊕2^{2}");
        let r = decomposition_report(ModelKind::Xxz, 3, &tol()).unwrap();
        assert_eq!(r.multiplicity(&mag(3, None)), Some(1));
        assert_eq!(r.multiplicity(&mag(1, None)), Some(3));
        assert_eq!(r.sector_multiplicity(HalfInteger::from_twice(1), None), Some(3));
    }

    #[test]
    fn xxz_components_are_sz_eigenstates_related_by_parity() {
        let f = xxz_family::<f64>(4, &tol()).unwrap();
        let b = build_symmetry_basis(&f, &tol()).unwrap();
        let sz = total_spin_component::<f64>(Axis::Z, 4).unwrap();
        let px = parity_x::<f64>(4).unwrap();
        for k in 0..b.len() {
            let s = b.slot(k).unwrap();
            let v = b.vector(k);
            let m = s.label.sector().value();
            let expected = if s.component == 1 { m } else { -m };
            assert!((sz.apply(&v) - &v * Complex::new(expected, 0.0)).norm() < 1e-12);
            if s.component == 2 {
                assert!((px.apply(&b.vector(k - 1)) - v).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn block_structure_holds_for_family_terms() {
        for kind in [ModelKind::Xxx, ModelKind::Xxz] {
            let f = family_for::<f64>(kind, 4, &tol()).unwrap();
            let b = build_symmetry_basis(&f, &tol()).unwrap();
            for t in f.terms() {
                let s = block_structure(&b, &t.operator).unwrap();
                assert!(s.cross_block_max < 1e-10, "{kind} {}: {s:?}", t.label);
                assert!(s.reduced_spread < 1e-10, "{kind} {}: {s:?}", t.label);
            }
        }
    }

    #[test]
    fn classify_singlet_ground_state() {
        let f = xxx_family::<f64>(2, &tol()).unwrap();
        let b = build_symmetry_basis(&f, &tol()).unwrap();
        let r = 0.5f64.sqrt();
        let amps = DVector::from_vec(vec![0.0, r, -r, 0.0]).map(|x| Complex::new(x, 0.0));
        let psi = StateVector::new(amps, 1e-12).unwrap();
        let c = classify_state(&psi, &b, 1e-10).unwrap();
        assert_eq!(c.single(), Some(spin(0)));
        assert!((c.weight(&spin(0)) - 1.0).abs() < 1e-14);
        let total: f64 = c.weights.iter().map(|w| w.weight).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn unlabeled_basis_is_rejected_by_reports() {
        let sz = total_spin_component::<f64>(Axis::Z, 2).unwrap();
        let s2 = partial_spin_squared::<f64>(2, 2).unwrap();
        let b = simultaneous_eigenbasis(&[sz, s2], &tol()).unwrap();
        assert!(matches!(b.multiplicities(), Err(Error::UnlabeledBasis)));
        assert!(matches!(
            DecompositionReport::from_basis(&b),
            Err(Error::UnlabeledBasis)
        ));
    }
}
