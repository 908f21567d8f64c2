use thiserror::Error;

/// Errors raised by the simulator and the bound evaluator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("bracketing error: f({lo}) and f({hi}) have the same sign")]
    Bracketing { lo: f64, hi: f64 },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("degenerate block: L = {0} leaves no room for shape information")]
    DegenerateBlock(usize),

    #[error("insufficient block length: L = {0}, pilot-assisted framing needs L >= 2")]
    InsufficientBlockLength(usize),

    #[error("degenerate constellation: K = {0}, need at least two points")]
    DegenerateConstellation(usize),

    #[error("degenerate combining: channel estimate is identically zero")]
    DegenerateCombining,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
