use thiserror::Error;

/// Errors raised by the simulators, oracles and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("ill-conditioned Gram matrix: min eigenvalue {min_eigenvalue:e} below floor {floor:e}")]
    IllConditionedGram { min_eigenvalue: f64, floor: f64 },

    #[error("cannot augment a {d}-dimensional subspace: no fixed vector outside the span of {states} circuit states in dimension {dim}")]
    DegenerateAugmentation { d: usize, states: usize, dim: usize },

    #[error("error bound diverges: denominator {denominator} is not positive")]
    DivergentBound { denominator: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for failures of the numerical pipeline (as opposed to bad input or budgets).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IllConditionedGram { .. }
                | Error::DegenerateAugmentation { .. }
                | Error::DivergentBound { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
