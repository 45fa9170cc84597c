//! Numerical laboratory for weighted Bergman kernels of holomorphic families.
//!
//! The crate computes truncated Bergman kernels `K(z, w, t)` over bounded
//! domains and Gaussian (Fock) models, and samples the positivity statements
//! attached to them: plurisubharmonicity of `log K` in all variables, the
//! `pi * eps^2` thickening limit, curvature of the fiberwise L2 metric on the
//! direct image, the dynamical AZD iteration, Narasimhan-Simha potentials and
//! L2 extension budgets.
//!
//! Numerical work is data parallel through rayon when the `parallel` feature
//! is enabled (the default). Every reduction uses a fixed pairwise tree, so
//! results are bit-identical between the parallel and sequential paths.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod azd;
pub mod bergman;
pub mod error;
pub mod exec;
pub mod family;
pub mod levi;
pub mod ns;
pub mod ot;
pub mod quadrature;
pub mod seed;
pub mod weight;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;
