use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("invalid sketch: dimension {s} not in [1, {ambient}]")]
    InvalidSketch { s: usize, ambient: usize },

    #[error("invalid truncation rank {rank} (sketch has {available} singular values)")]
    InvalidTruncation { rank: usize, available: usize },

    #[error("regularization parameter must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("Cholesky breakdown at pivot {pivot}: C + λI is numerically indefinite (κ near 1/u)")]
    IllConditioned { pivot: usize },

    #[error("preconditioner is singular: zero diagonal at {index}")]
    SingularPreconditioner { index: usize },

    #[error("problem orientation does not match the requested algorithm")]
    WrongOrientation,

    #[error("solve for λ[{index}] = {lambda} failed: {source}")]
    AtLambda {
        index: usize,
        lambda: f64,
        #[source]
        source: alloc::boxed::Box<Error>,
    },

    #[error("oracle workspace of {rows}x{cols} exceeds the dense size cap")]
    OracleTooLarge { rows: usize, cols: usize },

    #[error("statistical-dimension identity violated: ‖U₁‖²_F = {frobenius}, sd = {sd}")]
    IdentityViolated { frobenius: f64, sd: f64 },
}
