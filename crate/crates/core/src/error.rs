use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("surds with radicands {0} and {1} cannot be added exactly")]
    MixedRadicand(u64, u64),

    #[error("size cap exceeded: {requested} > {cap} (override with STIFFKIT_SIZE_CAP)")]
    SizeCap { requested: u128, cap: u128 },

    #[error("malformed code: {0}")]
    MalformedCode(String),

    #[error("point {index} has squared norm {found}, expected {expected}")]
    NormMismatch {
        index: usize,
        found: String,
        expected: String,
    },

    #[error("duplicate point at indices {0} and {1}")]
    DuplicatePoint(usize, usize),

    #[error("probe is not on the unit sphere (squared norm {0})")]
    NotOnSphere(String),

    #[error("configuration is not in general position (rank {rank} < {dim})")]
    NotInGeneralPosition { rank: usize, dim: usize },

    #[error("root isolation failed for P_{m}^({d})")]
    RootIsolation { d: u32, m: u32 },

    #[error("potential is singular at the evaluation point")]
    Singular,

    #[error("configuration contains an antipodal pair ({0}, {1})")]
    AntipodalPair(usize, usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("retry budget of {0} attempts exhausted")]
    RetriesExhausted(usize),

    #[error("integer overflow in exact arithmetic")]
    Overflow,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
