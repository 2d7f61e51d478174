//! From one eigenstate to the couplings: constraint matrix, rank, minimizer,
//! closed-form predictors and censuses.

pub mod census;
pub mod constraint;
pub mod eigen;
pub mod predict;
pub mod solve;

pub use census::{
    rank_census, recover_instance, recovery_census, trial_seed, CensusConfig, CensusModel, CensusReport,
    InstanceReport, InvariantTally, SectorCensus, ALIGNMENT_TOL, KERNEL_TOL, SCALE_FACTOR, SECTOR_LEAKAGE,
};
pub use constraint::{
    build_constraint_matrix, numerical_rank, rank_of, ConstraintMatrix, ConstraintMode, RankInfo, RowPart,
    RowProvenance,
};
pub use eigen::{classified_eigenstates, eigen_residual, eigenstates, EigenstateRecord};
pub use predict::{predict_accidental, predict_xxx, predict_xxz, zero_component_parity, Outcome};
pub use solve::{misalignment, solve_recovery, RecoveryReport, Verdict};
