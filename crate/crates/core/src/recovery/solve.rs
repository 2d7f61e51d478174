use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::ParameterVector;
use crate::scalar::{to_f64, Real};
use crate::tolerance::Tolerances;

use super::constraint::{numerical_rank, ConstraintMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Recoverable,
    Unrecoverable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub term_count: usize,
    pub row_count: usize,
    pub dropped_rows: usize,
    /// Singular values of `Q`, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub verdict: Verdict,
    /// Minimizer of `‖Q x‖` with `Σ a_n² = 1`.
    pub solution: ParameterVector,
    /// Spectrum of `QᵀQ` (ascending), taken as the squared singular values
    /// padded with zeros to `N + 1` entries.
    pub gram_spectrum: Vec<f64>,
    /// `‖Q x̂‖`.
    pub residual: f64,
    /// `1 − |⟨x̂, x*⟩| / (‖x̂‖ ‖x*‖)` over `(a, E)`.
    pub alignment: Option<f64>,
    /// The same quantity restricted to the couplings.
    pub coupling_alignment: Option<f64>,
}

impl RecoveryReport {
    pub fn is_recoverable(&self) -> bool {
        self.verdict == Verdict::Recoverable
    }
}

/// `1 − |cos∠(x, y)|`, clamped at zero.
pub fn misalignment(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nx == 0.0 || ny == 0.0 {
        return 1.0;
    }
    (1.0 - dot.abs() / (nx * ny)).max(0.0)
}

/// Minimizer of `xᵀQᵀQx`: the eigenvector of `QᵀQ` for its smallest
/// eigenvalue, normalized to unit coupling norm with the first
/// largest-magnitude coupling positive. The verdict is recoverable iff the
/// numerical rank equals `N`.
///
/// The vector is taken from the SVD of `Q` (last right singular vector) rather
/// than by diagonalizing `QᵀQ`, which would square the condition number.
pub fn solve_recovery<T: Real>(
    q: &ConstraintMatrix<T>,
    ground_truth: Option<&ParameterVector>,
    tol: &Tolerances,
) -> Result<RecoveryReport> {
    let info = numerical_rank(q, tol.rank)?;
    let n = q.term_count();
    let (_, vectors) = T::right_singular_vectors(q.rows());
    let x: Vec<f64> = vectors.column(n).iter().map(|&v| to_f64(v)).collect();

    let norm = x[..n].iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= 1e-12 {
        return Err(Error::DegenerateSolution);
    }
    let largest = x[..n].iter().fold(0.0f64, |acc, a| acc.max(a.abs()));
    let pivot = x[..n]
        .iter()
        .find(|a| a.abs() >= largest * (1.0 - 1e-9))
        .copied()
        .unwrap_or(1.0);
    let scale = pivot.signum() / norm;
    let x: Vec<f64> = x.iter().map(|v| v * scale).collect();

    let residual = q.apply_norm(&x)?;
    let mut gram_spectrum: Vec<f64> = info.singular_values.iter().map(|s| s * s).collect();
    gram_spectrum.resize(n + 1, 0.0);
    gram_spectrum.reverse();

    let alignment = ground_truth.map(|g| misalignment(&x, &g.solution_vector()));
    let coupling_alignment = ground_truth.map(|g| misalignment(&x[..n], &g.couplings));
    let verdict = if info.rank == n {
        Verdict::Recoverable
    } else {
        Verdict::Unrecoverable
    };
    Ok(RecoveryReport {
        term_count: n,
        row_count: q.row_count(),
        dropped_rows: q.dropped().len(),
        singular_values: info.singular_values,
        rank: info.rank,
        verdict,
        solution: ParameterVector::with_energy(x[..n].to_vec(), x[n]),
        gram_spectrum,
        residual,
        alignment,
        coupling_alignment,
    })
}
