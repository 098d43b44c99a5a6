//! Numerical toolkit for Anosov representations into `PGL_d(R)`.
//!
//! The crate builds representations of word-hyperbolic groups from
//! generator matrices and functorial constructions, measures singular-value
//! and eigenvalue gaps over word balls, samples limit sets and flag maps,
//! tests transversality and hyperconvexity, and estimates the optimal Hölder
//! exponent of the 1-limit set.

// Guards like `!(x > tol)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod export;
pub mod functors;
pub mod geometry;
pub mod groups;
pub mod linalg;
pub mod par;
pub mod presets;
pub mod spectra;

pub use error::{Error, Result};
