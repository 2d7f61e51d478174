use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::basis::{classify_state, IrrepLabel, IrrepSlot, LabeledBasis};
use crate::error::{Error, Result};
use crate::family::HamiltonianFamily;
use crate::scalar::{to_f64, Real};
use crate::tolerance::Tolerances;

use super::eigen::EigenstateRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Rows from every basis vector of the irreps in Λ(ψ).
    SymmetryBlocks,
    /// Rows from all `d` basis vectors.
    FullBasis,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowPart {
    Real,
    Imaginary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowProvenance {
    pub basis_index: usize,
    pub slot: Option<IrrepSlot>,
    pub part: RowPart,
}

/// Real `rows × (N + 1)` matrix whose kernel contains `(a_1, …, a_N, E)`.
#[derive(Clone, Debug)]
pub struct ConstraintMatrix<T: Real> {
    rows: DMatrix<T>,
    provenance: Vec<RowProvenance>,
    dropped: Vec<RowProvenance>,
    term_count: usize,
    mode: ConstraintMode,
    irreps: Vec<IrrepLabel>,
}

impl<T: Real> ConstraintMatrix<T> {
    pub fn rows(&self) -> &DMatrix<T> {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.nrows()
    }

    /// `N`; the matrix has `N + 1` columns.
    pub fn term_count(&self) -> usize {
        self.term_count
    }

    pub fn provenance(&self) -> &[RowProvenance] {
        &self.provenance
    }

    /// Rows whose entries all fell below the row tolerance.
    pub fn dropped(&self) -> &[RowProvenance] {
        &self.dropped
    }

    pub fn mode(&self) -> ConstraintMode {
        self.mode
    }

    /// Λ(ψ) used to select rows (all labels in full-basis mode).
    pub fn irreps(&self) -> &[IrrepLabel] {
        &self.irreps
    }

    /// `‖Q x‖₂` for `x = (a_1, …, a_N, E)`.
    pub fn apply_norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.term_count + 1 {
            return Err(Error::ParameterLength {
                expected: self.term_count + 1,
                got: x.len(),
            });
        }
        let mut total = 0.0;
        for i in 0..self.rows.nrows() {
            let dot: f64 = (0..x.len()).map(|j| to_f64(self.rows[(i, j)]) * x[j]).sum();
            total += dot * dot;
        }
        Ok(total.sqrt())
    }

    /// Sub-matrix of the rows coming from one irrep.
    pub fn block(&self, label: &IrrepLabel) -> DMatrix<T> {
        let keep: Vec<usize> = self
            .provenance
            .iter()
            .enumerate()
            .filter(|(_, p)| p.slot.map(|s| s.label == *label).unwrap_or(false))
            .map(|(i, _)| i)
            .collect();
        self.rows.select_rows(keep.iter())
    }

    pub fn count_rows(&self, part: RowPart) -> usize {
        self.provenance.iter().filter(|p| p.part == part).count()
    }
}

/// Projects `Σ a_n h_n ψ = E ψ` onto basis vectors: each retained `φ_k` gives
/// `[Re⟨φ_k|h_1|ψ⟩, …, Re⟨φ_k|h_N|ψ⟩, −Re⟨φ_k|ψ⟩]` and its imaginary
/// counterpart. Rows with every entry at most `tol.row` in magnitude are
/// dropped and recorded.
pub fn build_constraint_matrix<T: Real>(
    family: &HamiltonianFamily<T>,
    record: &EigenstateRecord<T>,
    basis: &LabeledBasis<T>,
    mode: ConstraintMode,
    tol: &Tolerances,
) -> Result<ConstraintMatrix<T>> {
    let d = family.dim();
    if basis.dim() != d || record.state.dim() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: if basis.dim() != d {
                basis.dim()
            } else {
                record.state.dim()
            },
        });
    }
    let n = family.term_count();
    let psi = record.state.amplitudes();
    let mut images = DMatrix::<Complex<T>>::zeros(d, n + 1);
    for (j, term) in family.terms().iter().enumerate() {
        images.set_column(j, &term.operator.apply(psi));
    }
    images.set_column(n, &(-psi));
    let projected = basis.vectors().adjoint() * images;

    let irreps = match mode {
        ConstraintMode::FullBasis => basis.multiplicities()?.into_keys().collect(),
        ConstraintMode::SymmetryBlocks => match &record.classification {
            Some(c) => c.labels.clone(),
            None => classify_state(&record.state, basis, tol.proj)?.labels,
        },
    };
    let mut data: Vec<T> = Vec::new();
    let mut provenance = Vec::new();
    let mut dropped = Vec::new();
    for k in 0..basis.len() {
        let slot = basis.slot(k)?;
        if mode == ConstraintMode::SymmetryBlocks && !irreps.contains(&slot.label) {
            continue;
        }
        for part in [RowPart::Real, RowPart::Imaginary] {
            let row: Vec<T> = (0..=n)
                .map(|j| match part {
                    RowPart::Real => projected[(k, j)].re,
                    RowPart::Imaginary => projected[(k, j)].im,
                })
                .collect();
            let p = RowProvenance {
                basis_index: k,
                slot: Some(slot),
                part,
            };
            let largest = row.iter().fold(0.0f64, |acc, x| acc.max(to_f64(x.abs())));
            if largest <= tol.row {
                dropped.push(p);
            } else {
                data.extend(row);
                provenance.push(p);
            }
        }
    }
    let rows = DMatrix::from_row_slice(provenance.len(), n + 1, &data);
    Ok(ConstraintMatrix {
        rows,
        provenance,
        dropped,
        term_count: n,
        mode,
        irreps,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
}

/// Number of singular values above `tol_rank · σ_max`.
pub fn rank_of<T: Real>(m: &DMatrix<T>, tol_rank: f64) -> RankInfo {
    let singular_values: Vec<f64> = T::singular_values(m).into_iter().map(to_f64).collect();
    let top = singular_values.first().copied().unwrap_or(0.0);
    let rank = singular_values.iter().filter(|&&s| s > tol_rank * top).count();
    RankInfo { rank, singular_values }
}

pub fn numerical_rank<T: Real>(q: &ConstraintMatrix<T>, tol_rank: f64) -> Result<RankInfo> {
    if q.row_count() == 0 {
        return Err(Error::EmptyConstraintMatrix);
    }
    Ok(rank_of(q.rows(), tol_rank))
}
