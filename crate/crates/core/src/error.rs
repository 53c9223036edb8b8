use thiserror::Error;

use crate::expr::{EvalError, ParseError};
use crate::special::SpecialError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expression: {0}")]
    Parse(#[from] ParseError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Special(#[from] SpecialError),

    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("model '{model}' has no parameter '{key}'")]
    UnknownParameter { model: String, key: String },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid working domain [{lo}, {hi}]")]
    InvalidDomain { lo: f64, hi: f64 },
    #[error("auxiliary exponent lambda = {0} must satisfy lambda > -2 and lambda != 0")]
    InvalidLambda(f64),
    #[error("{what}: analytic derivative {analytic} disagrees with finite difference {numeric} at {x}")]
    InconsistentDerivative {
        what: String,
        x: f64,
        analytic: f64,
        numeric: f64,
    },
    #[error("{what}: derivative {value} is not positive at {x}")]
    NonPositiveDerivative { what: String, x: f64, value: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("multiple roots at {roots:?}; set a root selection to choose one")]
    Ambiguous { roots: Vec<f64> },
    #[error("map {map} is constant ({value}); its inverse does not exist")]
    DegenerateMap { map: &'static str, value: f64 },
    #[error("argument outside the domain: {0}")]
    OutOfDomain(String),
    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("grid cutoff {cutoff} too small: state at {energy} is not confined")]
    CutoffTooSmall { cutoff: f64, energy: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}
