//! Discrete SU(1,1)-valued nonlinear Fourier transform of finitely supported
//! coefficient sequences, with a numerical harness for the nonlinear
//! Parseval identity and the nonlinear Hausdorff-Young inequalities.

pub mod dd;
pub mod error;
pub mod extended;
pub mod harness;
pub mod norms;
pub mod quadrature;
pub mod sampling;
pub mod search;
pub mod sequence;
pub mod transform;

pub use error::{Error, Result};
pub use norms::ExponentPair;
pub use quadrature::{NormResult, Precision, QuadratureConfig};
pub use sequence::{CoefficientSequence, DerivedCoefficients};
pub use transform::{Su11Element, TransformTrace};
