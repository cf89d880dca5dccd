use thiserror::Error;

/// Errors raised by the alignment pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("insufficient instances: need at least {needed}, got {got}")]
    InsufficientInstances { needed: usize, got: usize },

    #[error("invalid data: {0}")]
    InvalidData(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (max deviation {0:e})")]
    Asymmetric(f64),

    #[error("degenerate covariance: no eigenvalue above the rank tolerance")]
    DegenerateCovariance,

    #[error("rank deficient for requested p: requested {requested}, positive rank {rank}")]
    RankDeficient { requested: usize, rank: usize },

    #[error("matrix is not orthogonal (max deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("cayley singular: I + (tau/2)A could not be factored")]
    CayleySingular,

    #[error("objective diverged: non-finite objective or gradient")]
    ObjectiveDiverged,

    #[error("degenerate labels: {0}")]
    DegenerateLabels(&'static str),

    #[error("all {0} restarts failed")]
    AllRestartsFailed(usize),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::CayleySingular | Error::ObjectiveDiverged | Error::AllRestartsFailed(_)
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
