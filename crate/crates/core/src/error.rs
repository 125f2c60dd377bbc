use num_complex::Complex64;
use thiserror::Error;

use crate::annihilator::AnnihilatorSpec;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("power series has a zero constant term and cannot be inverted")]
    SingularSeries,

    #[error("invalid annihilator: {0}")]
    InvalidSpec(String),

    #[error("roots {first} and {second} are {distance:e} apart, below the separation tolerance {tolerance:e}")]
    RootsNotDistinct {
        first: usize,
        second: usize,
        distance: f64,
        tolerance: f64,
    },

    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("root iteration did not converge after {iterations} iterations (last movement {movement:e})")]
    RootsNotConverged {
        iterations: usize,
        movement: f64,
        last: Vec<Complex64>,
    },

    #[error("Q(A) has Frobenius norm {residual:e}, above the tolerance {tolerance:e}")]
    AnnihilationResidual {
        residual: f64,
        tolerance: f64,
        spec: AnnihilatorSpec,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unrecognized selector {0:?}")]
    Selector(String),

    #[error("derivative oracle failed: {0}")]
    Oracle(String),

    #[error("quadrature did not converge: estimate {estimate}, achieved error {achieved:e}, requested {requested:e}")]
    Quadrature {
        estimate: Complex64,
        achieved: f64,
        requested: f64,
    },
}
