use thiserror::Error;

/// Errors raised by the tensor-function library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("eigen-solver did not converge after {sweeps} sweeps (ill-conditioned input)")]
    EigenNoConvergence { sweeps: usize },

    #[error("{func} is not defined at x = {x}")]
    Domain { func: String, x: f64 },

    #[error("expected {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("{func} provides derivatives up to order {max}, order {requested} requested")]
    DerivativeOrder {
        func: String,
        max: usize,
        requested: usize,
    },

    #[error("coincident nodes {0} and {1} carry distinct labels; cluster the spectrum first")]
    CoincidentNodes(f64, f64),

    #[error("interpolation system is ill-conditioned (condition estimate {0:e})")]
    IllConditioned(f64),

    #[error("tensor is not positive definite (smallest eigenvalue {0})")]
    NotPositiveDefinite(f64),

    #[error("gradient coefficient {0} is not positive; function is not strictly monotone on the spectrum")]
    NonMonotone(f64),

    #[error("no closed form for index class {0:?}")]
    UnsupportedPattern([usize; 3]),

    #[error("commutator equation has no solution: tensor has a single eigenvalue and the right side is nonzero")]
    SingleEigenvalue,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
