use thiserror::Error;

/// Errors raised by the planning toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside the domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("{source_name} line {line}: {message}")]
    Parse {
        source_name: String,
        line: u64,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("posterior draws are empty")]
    EmptyDraws,

    #[error("degenerate test: {0}")]
    Degenerate(String),

    #[error("sampler failed: {0}")]
    Sampler(String),

    #[error("no feasible plan: {0}")]
    NoFeasiblePlan(String),

    #[error("plan (n_t={n_t}, tau_t={tau_t}, c={c}): {source}")]
    Plan {
        n_t: u32,
        tau_t: f64,
        c: u32,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(source_name: &str, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }
}
