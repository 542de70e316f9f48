//! Oscillatory integrals: the integration-by-parts bound, quadrature
//! oracles and bilinear reductions.

pub mod angular;
pub mod ibp;
pub mod quad;
pub mod radial;

pub use angular::{angular_bilinear, angular_bilinear_general, AngularConfig, AngularOptions, AngularResult, LemmaScales};
pub use ibp::{ibp_bound, IbpBound, IbpParameters};
pub use quad::{osc_integral_1d, osc_integral_3d, QuadOptions, QuadResult};
pub use radial::{grid_convolution, radial_bilinear, Radial, RadialOptions};
