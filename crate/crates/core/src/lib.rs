//! Numerical toolkit for smooth strictly convex bodies in `R^{n+1}` (`n = 1, 2`)
//! described by support functions on the unit sphere.

pub mod body;
pub mod error;
pub mod gaussian;
pub mod solver;
pub mod spectral;
pub mod sphere;

pub use error::{Error, Result};
