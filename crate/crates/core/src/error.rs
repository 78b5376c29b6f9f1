use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("residue of party {party} is {value}, outside [0, 1)")]
    ResidueOutOfRange { party: usize, value: String },

    #[error("residues sum to {sum}, which is not an integer")]
    NonIntegralSum { sum: String },

    #[error("{n} parties is too many for exact averaging over all orders (limit {limit}); use Monte Carlo estimation")]
    TooManyParties { n: usize, limit: usize },

    #[error("Newton iteration stopped after {iterations} iterations with marginal residual {residual:e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("rejective sampler gave up after {0} restarts")]
    TooManyRestarts(u64),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
