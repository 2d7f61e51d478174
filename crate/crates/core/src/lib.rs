//! Hamiltonian learning for symmetric spin chains: Pauli-string operators,
//! XXX/XXZ families, symmetry-adapted bases, the constraint matrix `Q` and
//! the recovery census, plus the table harness behind the CLI.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar.

pub mod basis;
pub mod error;
pub mod family;
pub mod harness;
pub mod operator;
pub mod recovery;
pub mod scalar;
pub mod tolerance;

pub use error::{Error, Result};
pub use scalar::Real;
pub use tolerance::Tolerances;

pub type PauliString64 = operator::PauliString<f64>;
pub type HermitianOperator64 = operator::HermitianOperator<f64>;
pub type StateVector64 = operator::StateVector<f64>;
pub type HamiltonianFamily64 = family::HamiltonianFamily<f64>;
pub type LabeledBasis64 = basis::LabeledBasis<f64>;
pub type EigenstateRecord64 = recovery::EigenstateRecord<f64>;
pub type ConstraintMatrix64 = recovery::ConstraintMatrix<f64>;

pub type PauliString32 = operator::PauliString<f32>;
pub type HermitianOperator32 = operator::HermitianOperator<f32>;
pub type StateVector32 = operator::StateVector<f32>;
pub type HamiltonianFamily32 = family::HamiltonianFamily<f32>;
pub type LabeledBasis32 = basis::LabeledBasis<f32>;
pub type EigenstateRecord32 = recovery::EigenstateRecord<f32>;
pub type ConstraintMatrix32 = recovery::ConstraintMatrix<f32>;
