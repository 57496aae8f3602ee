//! Exact verification of spherical designs, stiff configurations and the
//! universal minima of their potentials.
//!
//! Point configurations are stored on an integer lattice with one shared
//! squared norm, so every dot product between two points of the same code is
//! an exact rational and every dot product between different codes is an
//! exact quadratic surd. Design strength, dual configurations and node
//! frequencies are decided in exact arithmetic; the potential minimization
//! is a seeded multistart search used to confirm the extremal statements
//! numerically.

#![allow(clippy::needless_range_loop)]

pub mod codes;
pub mod config;
pub mod design;
pub mod error;
pub mod exact;
pub mod field;
pub mod gegenbauer;
pub mod poly;
pub mod potential;
pub mod stiffness;
pub mod suite;
pub mod transforms;

pub use codes::{Code, FloatCode, LatticeCode};
pub use error::{Error, Result};
pub use exact::{normalize_surd, ExactPoint, Surd};
pub use field::Field;
pub use poly::Polynomial;

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;
/// Polynomial with exact rational coefficients.
pub type RatPoly = Polynomial<Rational>;
/// Polynomial with double-precision coefficients.
pub type Poly64 = Polynomial<f64>;
/// A floating point on the sphere, as ambient coordinates.
pub type Point64 = Vec<f64>;

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
