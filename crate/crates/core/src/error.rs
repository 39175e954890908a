use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("noise parameter {0} outside [0, 1]")]
    NoiseOutOfRange(f64),

    #[error("noise parameter {eps} outside the domain [{lo}, {hi}] of this operation")]
    NoiseOutOfDomain { eps: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("dimension {0} is not a power of two in [2, 16]")]
    BadDimension(usize),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("POVM elements do not sum to identity (max deviation {0:e})")]
    IncompletePovm(f64),

    #[error("invalid tetrahedron vectors: {0}")]
    InvalidVectors(String),

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid outcome index {index} (expected < {len})")]
    InvalidOutcome { index: usize, len: usize },

    #[error("joint table is not normalized (total {0})")]
    Unnormalized(f64),

    #[error("malformed joint table: {0}")]
    MalformedTable(String),

    #[error("parameter {name} = {value} outside [{lo}, {hi}]")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("iteration index must be at least 1")]
    ZeroIteration,

    #[error("exact summation is limited to n <= {max}, got n = {n}")]
    IterationTooLarge { n: u32, max: u32 },

    #[error("sequences are misaligned: {0}")]
    Misaligned(String),

    #[error("counts {counts:?} do not sum to {expected}")]
    BadCounts { counts: [u32; 4], expected: u32 },

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("empty count table")]
    EmptyCounts,

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
