use thiserror::Error;

use crate::quadrature::NormResult;
use crate::sequence::CoefficientSequence;

/// Errors raised by the transform, the norms and the inequality harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(
        "coefficient F[{index}] = {re} + {im}i has modulus {modulus} outside the admissible disk (|F| < 1 - {guard})"
    )]
    Domain {
        index: i64,
        re: f64,
        im: f64,
        modulus: f64,
        guard: f64,
    },
    #[error("sequence has no nonzero entry")]
    EmptySequence,
    #[error("ratio undefined for the zero sequence")]
    ZeroSequence,
    #[error("quadrature did not reach rel_tol after {} points (estimate {})", .0.grid_used, .0.est_rel_error)]
    NoConvergence(NormResult),
    #[error("grid of {grid} points cannot resolve bandwidth {bandwidth}")]
    AliasRisk { grid: usize, bandwidth: u64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("all probe magnitudes below 1e-14, slope undefined")]
    DegenerateFit,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{check} violated at p = {p}: relative margin {rel_margin}")]
    Counterexample {
        check: String,
        p: f64,
        rel_margin: f64,
        sequence: Box<CoefficientSequence>,
    },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
