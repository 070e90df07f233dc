//! Exact and certified computations on hyperbolicity cones of perturbed
//! elementary symmetric polynomials, and on spectrahedral cones.
//!
//! The algebra layer is generic over [`Scalar`] (`f32`, `f64`, or the exact
//! [`Rational`]); certificates are only issued from the exact path.

pub mod bounds;
pub mod error;
pub mod hyperbolicity;
pub mod interval;
pub mod matching;
pub mod poly;
pub mod real_roots;
pub mod rng;
pub mod scalar;
pub mod spectrahedra;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

pub type QPoly = poly::MultiPoly<Rational>;
pub type F64Poly = poly::MultiPoly<f64>;
pub type F32Poly = poly::MultiPoly<f32>;
pub type QUniPoly = poly::UniPoly<Rational>;
pub type F64UniPoly = poly::UniPoly<f64>;

pub type SpectraRepF64 = spectrahedra::SpectraRep<f64>;
pub type SpectraRepF32 = spectrahedra::SpectraRep<f32>;
pub type SpectraRepQ = spectrahedra::SpectraRep<Rational>;
