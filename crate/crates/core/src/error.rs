use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Pauli string must act on at least one site")]
    EmptyPauliString,

    #[error("invalid chain length {sites}: {reason}")]
    InvalidSiteCount { sites: usize, reason: &'static str },

    #[error("prefix length {prefix} outside 2..={sites}")]
    InvalidPrefix { prefix: usize, sites: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("state norm {norm} differs from 1")]
    NotNormalized { norm: f64 },

    #[error("operators {left} and {right} do not commute (max |[A,B]| = {deviation:e})")]
    NonCommuting {
        left: String,
        right: String,
        deviation: f64,
    },

    #[error("empty operator list")]
    EmptyOperatorList,

    #[error("{count} joint eigenspace(s) left unresolved, largest has dimension {largest}")]
    UnresolvedDegeneracy { count: usize, largest: usize },

    #[error("joint eigenspace is not invariant under complex conjugation")]
    NotConjugationInvariant,

    #[error("basis vectors carry no irrep labels")]
    UnlabeledBasis,

    #[error("irrep dimensions sum to {sum}, expected {expected}")]
    IncompleteDecomposition { sum: usize, expected: usize },

    #[error("inconsistent irrep pairing: {0}")]
    InconsistentPairing(String),

    #[error("coupling vector has length {got}, family has {expected} terms")]
    ParameterLength { expected: usize, got: usize },

    #[error("sampling policy {policy} is not valid for the {model} family")]
    PolicyMismatch { policy: &'static str, model: &'static str },

    #[error("family invariant violated: {0}")]
    InvalidFamily(String),

    #[error("sector {sector} does not exist for L = {sites}")]
    SectorAbsent { sites: usize, sector: String },

    #[error("model mismatch: expected {expected}, got {got}")]
    ModelMismatch { expected: &'static str, got: &'static str },

    #[error("constraint matrix has no rows")]
    EmptyConstraintMatrix,

    #[error("eigenpair {index} residual {residual:e} exceeds tolerance {tolerance:e}")]
    EigenResidual {
        index: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("eigenstate index {index} out of range (dimension {dim})")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("minimizer has no coupling component and cannot be normalized")]
    DegenerateSolution,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown {kind} '{value}'")]
    Parse { kind: &'static str, value: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
