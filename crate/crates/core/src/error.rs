use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid point pattern: {0}")]
    InvalidPattern(String),

    #[error("time {t} outside the observation window [0, {horizon}]")]
    OutOfWindow { t: f64, horizon: f64 },

    #[error("invalid interval ({a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("identity link applied to negative argument {0}")]
    LinkMisuse(f64),

    #[error("recursion state does not match (beta = {beta}, n = {n})")]
    InconsistentState { beta: f64, n: usize },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("log-posterior is not finite at the initial point ({0}); re-initialize the chain")]
    NonFiniteInitial(String),

    #[error("simulation diverged: intensity overflowed or more than {budget} events (link {link}, alpha = {alpha}); the configuration is unstable")]
    Instability { budget: usize, link: String, alpha: f64 },

    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidPrior(_) | Error::InvalidParameter(_) | Error::Json(_) => 2,
            Error::Data(_)
            | Error::InvalidPattern(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::OutOfWindow { .. }
            | Error::InvalidInterval { .. } => 3,
            _ => 4,
        }
    }
}
