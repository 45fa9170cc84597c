//! Integration over bounded domains `{rho < 0}` in `C^n`.
//!
//! Three schemes are available:
//!
//! * `Polar`: exact-boundary product of disk rules (Gauss-Legendre in the
//!   radius, trapezoid in the angle) for polydisks.
//! * `TensorGauss`: Gauss-Legendre along each real axis, each axis restricted
//!   to the section of the domain cut out by the indicator of `rho < 0`.
//! * `QuasiMonteCarlo`: shifted Halton points in the bounding box with equal
//!   weights `box volume / N`, restricted to the domain.

mod domain;
mod rule;

pub use domain::{Domain, Shape};
pub use rule::{
    build_rule, integrate, integrate_real, polar_angular_points, polar_disk_rule, QuadratureRule,
    Scheme,
};

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss-Legendre nodes and weights on `[-1, 1]`; empty for `order == 0`.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    match NonZeroUsize::new(order) {
        None => Vec::new(),
        Some(o) => GaussLegendre::new(o).as_node_weight_pairs().to_vec(),
    }
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
    gauss_legendre(order)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}
