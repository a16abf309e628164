//! Numerical calculus of convex bodies and log-concave functions: support
//! functions on the sphere, zonal convolutions, Minkowski and Asplund
//! endomorphisms, discrete Legendre transforms, and a harness that evaluates
//! both sides of volume-product inequalities.

// `!(x > 0.0)` is used throughout so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bodies;
pub mod convex_analysis;
pub mod counterexample;
pub mod endomorphism;
pub mod error;
pub mod inequalities;
pub mod logconcave;
pub mod quad1d;
pub mod sphere;
pub mod zonal;

pub use bodies::{Body, InequalityReport};
pub use convex_analysis::{Axis, GridFunction, Truncation};
pub use endomorphism::MinkowskiEndo;
pub use error::{Error, Result};
pub use inequalities::{CheckId, FunctionalOptions};
pub use logconcave::{AsplundEndo, LogConcaveFn};
pub use sphere::{Rotation, SphereQuadrature, UnitVector};
pub use zonal::{Density, ZonalMeasure};
