use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    /// `x'Ax = 0`: the current state supports a fully disconnected subgraph.
    #[error("zero payoff: state supports a fully disconnected subgraph")]
    ZeroPayoff,

    #[error("numeric overflow in {0}")]
    NumericOverflow(&'static str),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by the caller's data or parameters, as opposed
    /// to internal failures.
    pub fn is_invalid_input(&self) -> bool {
        match self {
            Error::InvalidInput(_)
            | Error::InvalidParameter(_)
            | Error::InsufficientData { .. }
            | Error::BudgetExceeded(_)
            | Error::Csv(_) => true,
            Error::AtIteration { source, .. } => source.is_invalid_input(),
            _ => false,
        }
    }

    /// Strips any iteration annotation.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            e => e,
        }
    }
}
