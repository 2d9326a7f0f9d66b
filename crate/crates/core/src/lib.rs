//! Desk-scale learning theory over finite function classes.
//!
//! The crate covers finite classes and losses ([`classes`]), exact
//! combinatorial dimensions ([`dims`]), Rademacher and sequential Rademacher
//! complexities ([`complexity`]), explicit stochastic-process kernels
//! ([`processes`]), batch and online learning rules ([`learners`]) and the
//! regret functionals built on top of them ([`regret`]).
//!
//! Combinatorial code is generic over [`Scalar`]; the aliases at the crate
//! root fix the scalar to `f64`, which is what the process and regret layers
//! use.

// comparisons like `!(x >= 0.0)` are written that way to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classes;
pub mod complexity;
pub mod dims;
mod error;
pub mod learners;
pub mod processes;
pub mod regret;
mod scalar;
pub mod seed;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use classes::{Domain, LabelKind, Loss, Outcome, OutcomeSpace};
pub use complexity::{ComplexityMode, Sign, SignTree};
pub use dims::{DimensionKind, Witness};
pub use regret::{DecompositionReport, RegretEstimate};

/// Function class over `f64` labels.
pub type FunctionClass = classes::FiniteFunctionClass<f64>;
/// Label space over `f64`.
pub type LabelSpace = classes::LabelSpace<f64>;
/// Finite distribution over an outcome space with `f64` masses.
pub type Distribution = classes::Distribution<f64>;
/// Offset-closed class over `f64`.
pub type OffsetClass = classes::OffsetClass<f64>;
/// Dimension report with `f64` scales.
pub type DimensionReport = dims::DimensionReport<f64>;
/// Complexity value in `f64`.
pub type ComplexityValue = complexity::ComplexityValue<f64>;

/// Single-precision variants, mostly useful for cross-checking.
pub mod f32 {
    pub type FunctionClass = crate::classes::FiniteFunctionClass<f32>;
    pub type LabelSpace = crate::classes::LabelSpace<f32>;
    pub type Distribution = crate::classes::Distribution<f32>;
    pub type DimensionReport = crate::dims::DimensionReport<f32>;
    pub type ComplexityValue = crate::complexity::ComplexityValue<f32>;
}
