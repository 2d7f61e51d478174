use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds used across the pipeline.
///
/// Unless noted, thresholds are relative to the natural scale of the quantity
/// being tested (largest entry, spectral range or largest singular value).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `‖A − A†‖_max ≤ herm · ‖A‖_max`.
    pub herm: f64,
    /// Absolute bound on `‖[A, B]‖_max` for commuting operators.
    pub comm: f64,
    /// `|‖ψ‖ − 1| ≤ norm`.
    pub norm: f64,
    /// Eigenvalue gaps below `cluster · spectral range` are merged.
    pub cluster: f64,
    /// Orthonormality of basis vectors.
    pub orth: f64,
    /// Largest imaginary amplitude allowed in a realified basis.
    pub real: f64,
    /// Squared projection weight above which an irrep belongs to Λ(ψ). Kept
    /// far below `rank²` so that irreps left out of Λ(ψ) cannot contribute
    /// rows the rank test would count.
    pub proj: f64,
    /// Absolute row magnitude below which a constraint row is dropped.
    pub row: f64,
    /// Absolute bound on symmetry-forbidden matrix elements.
    pub block: f64,
    /// Singular values above `rank · σ_max` count towards the rank.
    pub rank: f64,
    /// `‖Hψ − Eψ‖ ≤ eig · max(1, ‖H‖_max)`.
    pub eig: f64,
    /// `‖Q x̂‖ ≤ solve · σ_max` for a converged minimizer.
    pub solve: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-12,
            comm: 1e-10,
            norm: 1e-10,
            cluster: 1e-8,
            orth: 1e-10,
            real: 1e-12,
            proj: 1e-24,
            row: 1e-12,
            block: 1e-10,
            rank: 1e-9,
            eig: 1e-9,
            solve: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("herm", self.herm),
            ("comm", self.comm),
            ("norm", self.norm),
            ("cluster", self.cluster),
            ("orth", self.orth),
            ("real", self.real),
            ("proj", self.proj),
            ("row", self.row),
            ("block", self.block),
            ("rank", self.rank),
            ("eig", self.eig),
            ("solve", self.solve),
        ];
        for (name, value) in all {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "tolerance {name} must be positive and finite, got {value}"
                )));
            }
        }
        Ok(())
    }
}
