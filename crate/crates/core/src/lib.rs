//! Resonance analysis and pseudo-spectral profile evolution for quadratic
//! systems of Klein-Gordon equations with several masses and speeds.

pub mod dyadic;
pub mod error;
pub mod fit;
pub mod linear_flow;
pub mod nonlinear_solver;
pub mod oscillatory;
pub mod params;
pub mod phase;
pub mod special;

pub use error::{Error, Result};
pub use params::{PhaseTriple, SignedIndex, SystemBuilder, SystemParams};
