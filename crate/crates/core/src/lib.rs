//! Numerical study of moment-constrained extremal measures on spheres.

pub mod bubble;
pub mod certificate;
pub mod error;
pub mod measure;
pub mod moments;
pub mod quadrature;
pub mod sobolev;
pub mod solver;
pub mod special;
pub mod sphere;

pub use error::{Error, Result};
