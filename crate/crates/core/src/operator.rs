//! Elementary operators of spin-1/2 chains.
//!
//! Computational basis states are indexed by bit strings with site 1 as the
//! most significant bit. Bit value 0 is spin up (σᶻ = +1), so `|0…0⟩` is the
//! fully polarized up state and sits at index 0.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{hermitian_eigen_auto, lit, max_abs, to_f64, Real};

/// Hard cap on chain length for dense storage.
pub const MAX_SITES: usize = 12;

/// Default relative Hermiticity tolerance.
pub const DEFAULT_HERM_TOL: f64 = 1e-12;

pub(crate) fn check_sites(sites: usize, min: usize) -> Result<()> {
    if sites < min {
        return Err(Error::InvalidSiteCount {
            sites,
            reason: if min <= 1 {
                "at least one site is required"
            } else {
                "at least two sites are required"
            },
        });
    }
    if sites > MAX_SITES {
        return Err(Error::InvalidSiteCount {
            sites,
            reason: "exceeds the dense-storage cap of 12 sites",
        });
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// Single-site 2×2 matrix in the (up, down) basis.
    pub fn matrix<T: Real>(self) -> DMatrix<Complex<T>> {
        let o = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[one, o, o, one]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[o, one, one, o]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[one, o, o, -one]),
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn pauli(self) -> Pauli {
        match self {
            Axis::X => Pauli::X,
            Axis::Y => Pauli::Y,
            Axis::Z => Pauli::Z,
        }
    }
}

/// Weighted tensor product of single-site Pauli matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliString<T> {
    letters: Vec<Pauli>,
    coefficient: T,
}

impl<T: Real> PauliString<T> {
    pub fn new(letters: Vec<Pauli>, coefficient: T) -> Self {
        Self { letters, coefficient }
    }

    /// Parses a string such as `"XZIY"`; site 1 is the leftmost letter.
    pub fn parse(text: &str, coefficient: T) -> Result<Self> {
        let letters = text
            .chars()
            .map(|c| {
                Pauli::from_char(c).ok_or_else(|| Error::Parse {
                    kind: "Pauli letter",
                    value: c.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(letters, coefficient))
    }

    /// Identity everywhere except `letter` at the given (0-based) sites.
    pub fn on_sites(sites: usize, placed: &[(usize, Pauli)], coefficient: T) -> Self {
        let mut letters = vec![Pauli::I; sites];
        for &(site, letter) in placed {
            letters[site] = letter;
        }
        Self::new(letters, coefficient)
    }

    pub fn sites(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn coefficient(&self) -> T {
        self.coefficient
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Adds the materialized string into `acc` in place. Pauli strings are
    /// monomial matrices, so every column receives exactly one entry.
    pub(crate) fn accumulate_into(&self, acc: &mut DMatrix<Complex<T>>) {
        let sites = self.letters.len();
        let dim = 1usize << sites;
        debug_assert_eq!(acc.nrows(), dim);
        let mut flip = 0usize;
        for (site, &letter) in self.letters.iter().enumerate() {
            if matches!(letter, Pauli::X | Pauli::Y) {
                flip |= 1 << (sites - 1 - site);
            }
        }
        let one = Complex::new(T::one(), T::zero());
        let i = Complex::new(T::zero(), T::one());
        for col in 0..dim {
            let mut phase = Complex::new(self.coefficient, T::zero());
            for (site, &letter) in self.letters.iter().enumerate() {
                let down = (col >> (sites - 1 - site)) & 1 == 1;
                phase *= match (letter, down) {
                    (Pauli::I, _) | (Pauli::X, _) | (Pauli::Z, false) => one,
                    (Pauli::Z, true) => -one,
                    (Pauli::Y, false) => i,
                    (Pauli::Y, true) => -i,
                };
            }
            acc[(col ^ flip, col)] += phase;
        }
    }
}

impl<T: Real> fmt::Display for PauliString<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·", to_f64(self.coefficient))?;
        for p in &self.letters {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// Dense Hermitian matrix acting on a chain of spin-1/2 sites.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T: Real> {
    entries: DMatrix<Complex<T>>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates Hermiticity with the default relative tolerance.
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        Self::with_tolerance(entries, DEFAULT_HERM_TOL)
    }

    /// Accepts `entries` when `‖A − A†‖_max ≤ rel_tol · ‖A‖_max`.
    pub fn with_tolerance(entries: DMatrix<Complex<T>>, rel_tol: f64) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 || !rows.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(rows));
        }
        let op = Self { entries };
        let deviation = to_f64(op.hermiticity_deviation());
        let scale = to_f64(op.max_abs());
        if deviation > rel_tol * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(op)
    }

    /// Wraps a matrix that is Hermitian by construction. Checked in debug builds.
    pub(crate) fn from_trusted(entries: DMatrix<Complex<T>>) -> Self {
        let op = Self { entries };
        debug_assert!(
            to_f64(op.hermiticity_deviation()) <= 1e-10 * to_f64(op.max_abs()).max(1.0),
            "trusted operator is not Hermitian"
        );
        op
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn entries(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex<T>> {
        self.entries
    }

    pub fn max_abs(&self) -> T {
        max_abs(&self.entries)
    }

    pub fn hermiticity_deviation(&self) -> T {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    pub fn trace(&self) -> Complex<T> {
        self.entries.trace()
    }

    /// True when every entry is real in the computational basis.
    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im == T::zero())
    }

    /// `‖AB − BA‖_max`.
    pub fn commutator_max(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        let ab = &self.entries * &other.entries;
        let ba = &other.entries * &self.entries;
        Ok(max_abs(&(ab - ba)))
    }

    /// `A²`, Hermitian whenever `A` is.
    pub fn square(&self) -> Self {
        let sq = &self.entries * &self.entries;
        Self::from_trusted(symmetrize(sq))
    }

    /// `U A U` for a Hermitian unitary `U` such as a parity operator.
    pub fn conjugated_by(&self, unitary: &Self) -> Self {
        let m = &unitary.entries * &self.entries * &unitary.entries;
        Self::from_trusted(symmetrize(m))
    }

    pub fn apply(&self, v: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        &self.entries * v
    }

    /// Real expectation value `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, state: &StateVector<T>) -> T {
        let a = state.amplitudes();
        a.dotc(&(&self.entries * a)).re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<T> {
        hermitian_eigen_auto(&self.entries).0
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && to_f64(max_abs(&(&self.entries - &other.entries))) <= tol
    }

    /// Squared Frobenius inner product `Re tr(A B)` for Hermitian `A`, `B`.
    pub fn trace_inner(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(other.entries.transpose().iter())
            .fold(T::zero(), |acc, (a, b)| acc + (*a * *b).re)
    }
}

fn symmetrize<T: Real>(m: DMatrix<Complex<T>>) -> DMatrix<Complex<T>> {
    let half = lit::<T>(0.5);
    (&m + m.adjoint()).map(|z| z * half)
}

impl<'a, T: Real> Add<&'a HermitianOperator<T>> for &'a HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn add(self, rhs: &'a HermitianOperator<T>) -> HermitianOperator<T> {
        HermitianOperator {
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl<T: Real> Add for HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn add(self, rhs: HermitianOperator<T>) -> HermitianOperator<T> {
        HermitianOperator {
            entries: self.entries + rhs.entries,
        }
    }
}

impl<'a, T: Real> Sub<&'a HermitianOperator<T>> for &'a HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn sub(self, rhs: &'a HermitianOperator<T>) -> HermitianOperator<T> {
        HermitianOperator {
            entries: &self.entries - &rhs.entries,
        }
    }
}

impl<T: Real> Mul<T> for &HermitianOperator<T> {
    type Output = HermitianOperator<T>;

    fn mul(self, rhs: T) -> HermitianOperator<T> {
        HermitianOperator {
            entries: self.entries.map(|z| z * rhs),
        }
    }
}

/// Normalized state in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    amplitudes: DVector<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Accepts `amplitudes` when `|‖ψ‖ − 1| ≤ tol_norm`.
    pub fn new(amplitudes: DVector<Complex<T>>, tol_norm: f64) -> Result<Self> {
        let dim = amplitudes.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let norm = to_f64(amplitudes.norm());
        if (norm - 1.0).abs() > tol_norm {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: DVector<Complex<T>>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == T::zero() {
            return Err(Error::NotNormalized { norm: 0.0 });
        }
        let inv = T::one() / norm;
        Self::new(amplitudes.map(|z| z * inv), 1e-6)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut amps = DVector::zeros(dim);
        amps[index] = Complex::new(T::one(), T::zero());
        Self::new(amps, 0.0)
    }

    pub(crate) fn from_trusted(amplitudes: DVector<Complex<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn max_imaginary(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, z| acc.max(z.im.abs()))
    }
}

/// Materializes `coefficient · P₁ ⊗ … ⊗ P_L`.
pub fn materialize_pauli_string<T: Real>(p: &PauliString<T>) -> Result<HermitianOperator<T>> {
    if p.sites() == 0 {
        return Err(Error::EmptyPauliString);
    }
    check_sites(p.sites(), 1)?;
    let dim = 1usize << p.sites();
    let mut acc = DMatrix::zeros(dim, dim);
    p.accumulate_into(&mut acc);
    Ok(HermitianOperator::from_trusted(acc))
}

/// Sum of Pauli strings over the same number of sites.
pub fn sum_pauli_strings<T: Real>(sites: usize, strings: &[PauliString<T>]) -> Result<HermitianOperator<T>> {
    check_sites(sites, 1)?;
    let dim = 1usize << sites;
    let mut acc = DMatrix::zeros(dim, dim);
    for p in strings {
        if p.sites() != sites {
            return Err(Error::DimensionMismatch {
                left: sites,
                right: p.sites(),
            });
        }
        p.accumulate_into(&mut acc);
    }
    Ok(HermitianOperator::from_trusted(acc))
}

/// `½ Σ_l σ_l^axis`.
pub fn total_spin_component<T: Real>(axis: Axis, sites: usize) -> Result<HermitianOperator<T>> {
    check_sites(sites, 1)?;
    let half = lit::<T>(0.5);
    let strings: Vec<_> = (0..sites)
        .map(|l| PauliString::on_sites(sites, &[(l, axis.pauli())], half))
        .collect();
    sum_pauli_strings(sites, &strings)
}

/// `S_n²` for the first `prefix` sites, identity on the rest.
///
/// Uses `S_n² = 3n/4 + ½ Σ_{i<j≤n} σ_i·σ_j`, which keeps construction at
/// O(n² d) instead of three dense matrix products.
pub fn partial_spin_squared<T: Real>(prefix: usize, sites: usize) -> Result<HermitianOperator<T>> {
    check_sites(sites, 1)?;
    if prefix < 2 || prefix > sites {
        return Err(Error::InvalidPrefix { prefix, sites });
    }
    let half = lit::<T>(0.5);
    let mut strings = vec![PauliString::on_sites(sites, &[], lit::<T>(0.75 * prefix as f64))];
    for i in 0..prefix {
        for j in i + 1..prefix {
            for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                strings.push(PauliString::on_sites(sites, &[(i, p), (j, p)], half));
            }
        }
    }
    sum_pauli_strings(sites, &strings)
}

/// Total spin Casimir `S² = S_x² + S_y² + S_z²`.
pub fn total_spin_squared<T: Real>(sites: usize) -> Result<HermitianOperator<T>> {
    check_sites(sites, 1)?;
    if sites == 1 {
        return Ok(&HermitianOperator::identity(2) * lit::<T>(0.75));
    }
    partial_spin_squared(sites, sites)
}

/// `Π_x = ⊗_l σ_l^x`.
pub fn parity_x<T: Real>(sites: usize) -> Result<HermitianOperator<T>> {
    check_sites(sites, 1)?;
    materialize_pauli_string(&PauliString::new(vec![Pauli::X; sites], T::one()))
}

/// Entrywise complex conjugation in the computational basis.
pub fn conjugate_state<T: Real>(state: &StateVector<T>) -> StateVector<T> {
    StateVector::from_trusted(state.amplitudes().map(|z| z.conj()))
}

/// True iff `‖AB − BA‖_max ≤ tol`.
pub fn commutes<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>, tol: f64) -> Result<bool> {
    Ok(to_f64(a.commutator_max(b)?) <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    type Op = HermitianOperator<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    fn sorted_eigs(op: &Op) -> Vec<f64> {
        op.eigenvalues()
    }

    fn assert_eigs(op: &Op, expected: &[f64]) {
        let got = sorted_eigs(op);
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-10, "eigenvalues {got:?} vs {expected:?}");
        }
    }

    #[test]
    fn single_site_z() {
        let z = materialize_pauli_string(&PauliString::parse("Z", 1.0).unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert_eq!(z.entries(), &expected);
    }

    #[test]
    fn zz_is_diagonal_with_signs() {
        let zz = materialize_pauli_string(&PauliString::parse("ZZ", 1.0).unwrap()).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| zz.entries()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(zz.entries().iter().enumerate().all(|(k, z)| k % 5 == 0 || *z == c(0.0)));
    }

    #[test]
    fn xx_is_antidiagonal_ones() {
        let xx = materialize_pauli_string(&PauliString::parse("XX", 1.0).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i + j == 3 { 1.0 } else { 0.0 };
                assert_eq!(xx.entries()[(i, j)], c(expected));
            }
        }
    }

    #[test]
    fn empty_string_is_rejected() {
        let p = PauliString::<f64>::new(vec![], 1.0);
        assert!(matches!(materialize_pauli_string(&p), Err(Error::EmptyPauliString)));
        assert!(PauliString::<f64>::parse("XQ", 1.0).is_err());
    }

    #[test]
    fn site_one_is_leftmost_factor() {
        // Z on site 1 of two sites: diag(1, 1, -1, -1).
        let z1 = materialize_pauli_string(&PauliString::parse("ZI", 1.0).unwrap()).unwrap();
        let diag: Vec<f64> = (0..4).map(|k| z1.entries()[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn total_sz_spectra() {
        assert_eigs(&total_spin_component::<f64>(Axis::Z, 1).unwrap(), &[-0.5, 0.5]);
        assert_eigs(
            &total_spin_component::<f64>(Axis::Z, 2).unwrap(),
            &[-1.0, 0.0, 0.0, 1.0],
        );
    }

    #[test]
    fn sx_commutes_with_heisenberg_bond() {
        let sx = total_spin_component::<f64>(Axis::X, 2).unwrap();
        let bond = sum_pauli_strings(
            2,
            &[
                PauliString::parse("XX", 1.0).unwrap(),
                PauliString::parse("YY", 1.0).unwrap(),
                PauliString::parse("ZZ", 1.0).unwrap(),
            ],
        )
        .unwrap();
        assert!(commutes(&sx, &bond, 1e-12).unwrap());
    }

    #[test]
    fn partial_spin_squared_spectra() {
        assert_eigs(&partial_spin_squared::<f64>(2, 2).unwrap(), &[0.0, 2.0, 2.0, 2.0]);
        assert_eigs(
            &partial_spin_squared::<f64>(2, 3).unwrap(),
            &[0.0, 0.0, 2.0, 2.0, 2.0, 2.0, 2.0, 2.0],
        );
        let s5 = partial_spin_squared::<f64>(5, 5).unwrap();
        let top = sorted_eigs(&s5).iter().filter(|&&e| (e - 8.75).abs() < 1e-9).count();
        assert_eq!(top, 6);
    }

    #[test]
    fn partial_spin_squared_bounds() {
        assert!(matches!(
            partial_spin_squared::<f64>(1, 3),
            Err(Error::InvalidPrefix { .. })
        ));
        assert!(partial_spin_squared::<f64>(4, 3).is_err());
        assert!(total_spin_component::<f64>(Axis::Z, 0).is_err());
        assert!(total_spin_component::<f64>(Axis::Z, 13).is_err());
    }

    #[test]
    fn partial_spin_squared_matches_component_squares() {
        for sites in 2..=4 {
            for prefix in 2..=sites {
                let half = 0.5;
                let comps: Vec<Op> = [Pauli::X, Pauli::Y, Pauli::Z]
                    .iter()
                    .map(|&p| {
                        let strings: Vec<_> = (0..prefix)
                            .map(|l| PauliString::on_sites(sites, &[(l, p)], half))
                            .collect();
                        sum_pauli_strings(sites, &strings).unwrap()
                    })
                    .collect();
                let direct = comps
                    .iter()
                    .map(|s| s.square())
                    .fold(Op::zeros(1 << sites), |a, b| a + b);
                let fast = partial_spin_squared::<f64>(prefix, sites).unwrap();
                assert!(direct.approx_eq(&fast, 1e-12));
            }
        }
    }

    #[test]
    fn parity_properties() {
        let p1 = parity_x::<f64>(1).unwrap();
        assert_eq!(
            p1.entries(),
            materialize_pauli_string(&PauliString::parse("X", 1.0).unwrap())
                .unwrap()
                .entries()
        );
        for sites in 1..=5 {
            let p = parity_x::<f64>(sites).unwrap();
            let sq = p.entries() * p.entries();
            assert!(Op::new(sq).unwrap().approx_eq(&Op::identity(1 << sites), 0.0));
        }
        let p2 = parity_x::<f64>(2).unwrap();
        let sz = total_spin_component::<f64>(Axis::Z, 2).unwrap();
        assert!(sz.conjugated_by(&p2).approx_eq(&(&sz * -1.0), 1e-14));
        let p3 = parity_x::<f64>(3).unwrap();
        let z1z2 = materialize_pauli_string(&PauliString::parse("ZZI", 1.0).unwrap()).unwrap();
        assert!(commutes(&p3, &z1z2, 1e-14).unwrap());
    }

    #[test]
    fn commutes_examples() {
        let s2 = total_spin_squared::<f64>(2).unwrap();
        let sz = total_spin_component::<f64>(Axis::Z, 2).unwrap();
        assert!(commutes(&s2, &sz, 1e-12).unwrap());
        let x1 = materialize_pauli_string(&PauliString::parse("XI", 1.0).unwrap()).unwrap();
        assert!(!commutes(&sz, &x1, 1e-12).unwrap());
        let px = parity_x::<f64>(2).unwrap();
        assert!(commutes(&px, &sz.square(), 1e-12).unwrap());
        let big = parity_x::<f64>(3).unwrap();
        assert!(matches!(
            commutes(&big, &sz, 1e-12),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn conjugation_examples() {
        let i = Complex::new(0.0, 1.0);
        let mut amps = DVector::zeros(4);
        amps[0] = i;
        let psi = StateVector::new(amps, 1e-12).unwrap();
        let k = conjugate_state(&psi);
        assert_eq!(k.amplitudes()[0], -i);
        assert_eq!(conjugate_state(&k), psi);
        let real = StateVector::<f64>::basis_state(4, 2).unwrap();
        assert_eq!(conjugate_state(&real), real);
    }

    #[test]
    fn hermitian_constructor_rejects_bad_input() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(matches!(Op::new(m), Err(Error::NotHermitian { .. })));
        let m = DMatrix::from_element(3, 3, c(1.0));
        assert!(matches!(Op::new(m), Err(Error::NotPowerOfTwo(3))));
        let m = DMatrix::from_element(2, 4, c(1.0));
        assert!(matches!(Op::new(m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn state_vector_checks_norm() {
        let amps = DVector::from_element(2, c(1.0));
        assert!(matches!(
            StateVector::new(amps.clone(), 1e-10),
            Err(Error::NotNormalized { .. })
        ));
        let psi = StateVector::normalized(amps).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lie_algebra_closes() {
        for sites in 1..=5 {
            let sx = total_spin_component::<f64>(Axis::X, sites).unwrap();
            let sy = total_spin_component::<f64>(Axis::Y, sites).unwrap();
            let sz = total_spin_component::<f64>(Axis::Z, sites).unwrap();
            let comm = sx.entries() * sy.entries() - sy.entries() * sx.entries();
            let isz = sz.entries().map(|z| z * Complex::new(0.0, 1.0));
            assert!(max_abs(&(comm - isz)) < 1e-12);
        }
    }

    #[test]
    fn f32_operators() {
        let s2 = total_spin_squared::<f32>(3).unwrap();
        let sz = total_spin_component::<f32>(Axis::Z, 3).unwrap();
        assert!(commutes(&s2, &sz, 1e-5).unwrap());
        let eigs = s2.eigenvalues();
        assert!((eigs[0] - 0.75).abs() < 1e-5);
        assert!((eigs[7] - 3.75).abs() < 1e-5);
    }
}
