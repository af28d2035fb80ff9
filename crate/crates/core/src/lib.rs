//! Six-state semi-Markov model of breast cancer progression under
//! pandemic disruption scenarios.
//!
//! The pipeline runs from transition intensities ([`model`]) through
//! calendar overlays ([`scenario`]) and the forward-equation solvers
//! ([`solver`]) to survival, excess deaths and years of life lost
//! ([`outcomes`]). [`mc`] simulates individual life histories from the same
//! intensities as an independent check on the solvers.

pub mod error;
pub mod fit;
pub mod hazard;
pub mod io;
pub mod mc;
pub mod model;
pub mod outcomes;
pub mod scenario;
pub mod solver;

pub use error::{Error, Result};
