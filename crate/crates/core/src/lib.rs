//! Numerical laboratory for disordered XY spin chains.
//!
//! * [`model`]: chain coefficients, disorder draws and run configuration.
//! * [`freefermion`]: the one-body block matrix, its diagonalization and propagator.
//! * [`exact_oracle`]: dense many-body simulation used as an independent check.
//! * [`localization`]: ensemble estimators for localization, Lieb-Robinson and
//!   clustering bounds.
//! * [`runner`]: command implementations behind the `xyloc` binary.

pub mod error;
pub mod exact_oracle;
pub mod freefermion;
pub mod linalg;
pub mod localization;
pub mod model;
pub mod parallel;
pub mod runner;

pub use error::{Error, Result};
