use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("observed demand {value} for customer {customer} lies outside its support")]
    ObservationOutOfSupport { customer: usize, value: f64 },

    #[error("customer {0} has a continuous demand distribution; its support cannot be enumerated")]
    InfiniteSupport(usize),

    #[error("{what}: {requested} exceeds the limit of {limit}")]
    SizeLimitExceeded { what: &'static str, requested: u128, limit: u128 },

    #[error("infeasible first-stage solution: {0}")]
    InfeasibleFirstStage(String),

    #[error("solver backend unavailable: {0}")]
    BackendUnavailable(String),

    #[error("external solver failed: {message}")]
    SolverFailure { message: String, diagnostics: String },

    #[error("outcome space has {outcomes} outcomes, above the cap of {cap}")]
    SupportTooLarge { outcomes: u128, cap: u128 },

    #[error("customer {0} has a continuous demand distribution, which the nonanticipative model cannot represent")]
    ContinuousUnsupported(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
