//! Numerical verification toolkit for gradient estimates of
//! quasiconformal self-maps of the unit disk under an elliptic operator
//! with quadratic growth.
//!
//! The crate splits into: plane geometry and Wirtinger calculus
//! ([`geometry`]), disk kernels ([`kernels`]), coefficient fields and the
//! operator ([`field`]), test mappings ([`map`]), a polar-grid elliptic
//! solver ([`solver`]), quasiconformal audits ([`qc`]), the interior and
//! global bound machinery ([`bounds`]), and report plumbing ([`report`],
//! [`config`]).

pub mod bounds;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod kernels;
pub mod map;
pub mod qc;
pub mod report;
pub mod solver;

pub use error::{Error, Result};

/// Points of the plane are complex numbers throughout.
pub type ComplexPoint = num_complex::Complex64;

/// Concrete matrix type used by everything outside `geometry` (which is
/// generic over the scalar).
pub type Mat2 = geometry::Mat2<f64>;
