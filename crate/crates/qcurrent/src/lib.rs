//! Exact symbolic engine for the h-adic R-matrix calculus of quantum current
//! algebras: truncated Laurent/Taylor series over exact scalars, sparse tensor
//! operators, the normalized rational R-matrix and its fusion, double Yangian
//! vacuum modules, quantum currents with their central series, and the
//! associated quantum vertex algebra maps.
//!
//! All arithmetic is exact.  Every computation happens inside a declared
//! truncation window (an h-adic order together with per-variable exponent
//! ranges); operations clip silently to the window, and windows are sized by
//! the verifiers so that every reported coefficient is exact.

pub mod currents;
pub mod error;
pub mod fusion;
pub mod qva;
pub mod report;
pub mod rmatrix;
pub mod runner;
pub mod scalar;
pub mod series;
pub mod tensor;
pub mod yangian;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// The default exact scalar: arbitrary-precision rationals.
pub type Rat = num::BigRational;

/// Truncated series over [`Rat`].
pub type Series = series::TruncSeries<Rat>;

/// Sparse tensor operator with [`Series`] entries.
pub type Op = tensor::Tensor<Rat, Series>;

/// Exact vacuum-representation vector used throughout the checks.
pub type Vac = yangian::VacuumVector<Rat>;

/// Tensor-space state with vacuum-representation entries.
pub type State = tensor::Tensor<Rat, Vac>;
