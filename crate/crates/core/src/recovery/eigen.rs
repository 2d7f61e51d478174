use nalgebra::Complex;

use crate::basis::{classify_state, LabeledBasis, StateClassification};
use crate::error::{Error, Result};
use crate::family::{assemble, HamiltonianFamily, ParameterVector};
use crate::operator::StateVector;
use crate::scalar::{hermitian_eigen_auto, lit, to_f64, Real};
use crate::tolerance::Tolerances;

/// One eigenpair of `H(θ)` together with the parameters that produced it.
#[derive(Clone, Debug)]
pub struct EigenstateRecord<T: Real> {
    pub index: usize,
    pub state: StateVector<T>,
    pub energy: f64,
    pub parameters: ParameterVector,
    /// `‖Hψ − Eψ‖`.
    pub residual: f64,
    /// Λ(ψ), present when the record was classified against a basis.
    pub classification: Option<StateClassification>,
}

impl<T: Real> EigenstateRecord<T> {
    /// `x* = (a*, E*)`.
    pub fn ground_truth(&self) -> ParameterVector {
        ParameterVector::with_energy(self.parameters.couplings.clone(), self.energy)
    }
}

/// Full diagonalization of `H(θ)`; one record per eigenvector, energies
/// ascending. Eigenvectors inside a degenerate level are whatever orthonormal
/// mixture the dense solver returns.
pub fn eigenstates<T: Real>(
    family: &HamiltonianFamily<T>,
    params: &ParameterVector,
    tol: &Tolerances,
) -> Result<Vec<EigenstateRecord<T>>> {
    let h = assemble(family, params)?;
    let (values, vectors) = hermitian_eigen_auto(h.entries());
    let scale = to_f64(h.max_abs()).max(1.0);
    let bound = tol.eig * scale;
    let mut out = Vec::with_capacity(values.len());
    for (k, &e) in values.iter().enumerate() {
        let v = vectors.column(k).into_owned();
        let r = h.apply(&v) - &v * Complex::new(e, T::zero());
        let residual = to_f64(r.norm());
        if residual.is_nan() || residual > bound {
            return Err(Error::EigenResidual {
                index: k,
                residual,
                tolerance: bound,
            });
        }
        out.push(EigenstateRecord {
            index: k,
            state: StateVector::normalized(v)?,
            energy: to_f64(e),
            parameters: params.clone(),
            residual,
            classification: None,
        });
    }
    Ok(out)
}

/// [`eigenstates`] followed by Λ(ψ) for every record.
pub fn classified_eigenstates<T: Real>(
    family: &HamiltonianFamily<T>,
    params: &ParameterVector,
    basis: &LabeledBasis<T>,
    tol: &Tolerances,
) -> Result<Vec<EigenstateRecord<T>>> {
    let mut records = eigenstates(family, params, tol)?;
    for r in &mut records {
        r.classification = Some(classify_state(&r.state, basis, tol.proj)?);
    }
    Ok(records)
}

/// Re-checks that a record is an eigenpair of `H(θ)` for the record's own
/// parameters, e.g. after rescaling them.
pub fn eigen_residual<T: Real>(family: &HamiltonianFamily<T>, record: &EigenstateRecord<T>) -> Result<f64> {
    let h = assemble(family, &record.parameters)?;
    let v = record.state.amplitudes();
    let r = h.apply(v) - v * Complex::new(lit::<T>(record.energy), T::zero());
    Ok(to_f64(r.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_symmetry_basis, IrrepLabel};
    use crate::family::{sample_parameters, xxx_family, SamplingPolicy};
    use nalgebra::ComplexField;

    #[test]
    fn two_site_bond_spectrum() {
        let tol = Tolerances::default();
        let f = xxx_family::<f64>(2, &tol).unwrap();
        let recs = eigenstates(&f, &ParameterVector::new(vec![1.0]), &tol).unwrap();
        let energies: Vec<f64> = recs.iter().map(|r| r.energy).collect();
        for (e, x) in energies.iter().zip([-3.0, 1.0, 1.0, 1.0]) {
            assert!((e - x).abs() < 1e-12);
        }
        for a in &recs {
            for b in &recs {
                let overlap = a.state.inner(&b.state).modulus();
                let expected = if a.index == b.index { 1.0 } else { 0.0 };
                assert!((overlap - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn generic_states_sit_in_one_irrep() {
        let tol = Tolerances::default();
        let f = xxx_family::<f64>(5, &tol).unwrap();
        let b = build_symmetry_basis(&f, &tol).unwrap();
        let p = sample_parameters(&f, 4, SamplingPolicy::Generic).unwrap();
        let recs = classified_eigenstates(&f, &p, &b, &tol).unwrap();
        for r in &recs {
            let c = r.classification.as_ref().unwrap();
            assert!(c.single().is_some(), "state {} straddles {:?}", r.index, c.labels);
        }
        let ground = recs[0].classification.as_ref().unwrap().single().unwrap();
        assert!(matches!(ground, IrrepLabel::Spin { .. }));
    }

    #[test]
    fn rescaled_record_stays_an_eigenpair() {
        let tol = Tolerances::default();
        let f = xxx_family::<f64>(3, &tol).unwrap();
        let p = sample_parameters(&f, 1, SamplingPolicy::Generic).unwrap();
        let mut r = eigenstates(&f, &p, &tol).unwrap().remove(3);
        r.parameters = p.scaled(3.0);
        r.energy *= 3.0;
        assert!(eigen_residual(&f, &r).unwrap() < 1e-12);
    }
}
