//! Exact computation with β-transformations.
//!
//! The crate is organised around the map `T_β(x) = βx mod 1` on `[0,1)`:
//!
//! * [`precision`] — adaptive-precision real arithmetic with certified floor
//!   and comparison decisions, for β given as a decimal literal or as the
//!   root of an integer polynomial;
//! * [`symbolic`] — β-expansions, the expansion of 1 and its periodic
//!   completion, admissibility of digit words, word enumeration and the
//!   truncation roots β_N;
//! * [`cylinders`] — basic intervals `I_n(ω)`: endpoints, lengths, full
//!   cylinders and level partitions;
//! * [`exponents`] — orbits, hitting analysis against speed functions,
//!   run-length decompositions and estimators for the asymptotic and
//!   uniform approximation exponents;
//! * [`dimension`] — closed-form Hausdorff-dimension bounds, the piecewise
//!   classifier over exponent quadruples, and a registry of worked speed
//!   functions with known dimensions;
//! * [`cantor`] — explicit Cantor subsets from run schedules, their
//!   Bernoulli measures, local-dimension diagnostics and a box-counting
//!   estimator.

pub mod cantor;
pub mod cylinders;
pub mod dimension;
pub mod error;
pub mod exponents;
pub mod precision;
pub mod symbolic;

pub use error::BetaError;
pub use precision::{BetaValue, RealScalar};

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, BetaError>;
