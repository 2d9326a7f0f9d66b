use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("loss {loss} is not defined for {labels} labels")]
    IncompatibleLoss { loss: &'static str, labels: &'static str },

    #[error("distribution not normalized: total mass {0}")]
    NotNormalized(f64),

    #[error("resource budget exceeded: {what} needs more than {budget}")]
    Budget { what: String, budget: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for errors caused by an exhausted computation budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
