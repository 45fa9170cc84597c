use std::f64::consts::PI;

use super::WeightExpr;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::{exec, C64};

/// Nodes closer than this to the pole set are dropped.
const POLE_EXCLUSION: f64 = 1e-8;
/// Per-annulus growth factor that counts as divergence.
const GROWTH_FACTOR: f64 = 1.5;
/// Fitted volume exponents at or below this are read as non-integrable.
const EXPONENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityConfig {
    /// Gauss points in `log r` per annulus.
    pub radial_order: usize,
    /// Trapezoid points per angle.
    pub angular_points: usize,
}

impl Default for IntegrabilityConfig {
    fn default() -> Self {
        Self {
            radial_order: 24,
            angular_points: 32,
        }
    }
}

/// Local integrability of `exp(-phi)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    /// Integral of `exp(-phi)` over each annulus `r_{j+1} < |z - center| < r_j`.
    pub integral_estimates: Vec<f64>,
    pub divergent: bool,
    /// Exponent `p` of the fitted law `annulus integral ~ r^p` on the two
    /// innermost annuli; integrable iff `p > 0`.
    pub fitted_exponent: f64,
    /// Outer partial sum plus the geometric tail implied by the fit, when finite.
    pub extrapolated_total: Option<f64>,
    /// Quadrature nodes dropped because they sat on the pole set.
    pub excluded_nodes: usize,
}

/// Decide whether `exp(-phi)` is integrable near `center` (`n = center.len()`
/// must be 1 or 2). `radii` must decrease strictly towards 0.
pub fn integrability_check(
    expr: &WeightExpr,
    center: &[C64],
    radii: &[f64],
    cfg: &IntegrabilityConfig,
) -> Result<IntegrabilityReport> {
    let n = center.len();
    if !(1..=2).contains(&n) {
        return Err(Error::invalid(
            "integrability checks support n = 1 or n = 2",
        ));
    }
    if expr.depends_on_t() {
        return Err(Error::invalid("integrability weight must depend on z only"));
    }
    expr.check_bound(n, 0)?;
    if radii.len() < 3 {
        return Err(Error::invalid("need at least three radii (two annuli)"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) || radii.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::invalid(
            "radii must be positive and strictly decreasing",
        ));
    }

    let shells: Vec<(f64, usize)> = exec::map(radii.len() - 1, |j| {
        shell_integral(expr, center, radii[j + 1], radii[j], cfg)
    });
    let integral_estimates: Vec<f64> = shells.iter().map(|s| s.0).collect();
    let excluded_nodes = shells.iter().map(|s| s.1).sum();

    let m = integral_estimates.len();
    let fitted_exponent = fit_exponent(
        integral_estimates[m - 2],
        integral_estimates[m - 1],
        [radii[m - 2], radii[m - 1], radii[m]],
    );
    let growing = m >= 3
        && integral_estimates[m - 3..]
            .windows(2)
            .all(|w| w[1] >= GROWTH_FACTOR * w[0]);
    let divergent = growing || !(fitted_exponent > EXPONENT_TOL);
    let extrapolated_total = if divergent {
        None
    } else {
        let q = (radii[m] / radii[m - 1]).powf(fitted_exponent);
        let tail = integral_estimates[m - 1] * q / (1.0 - q);
        Some(exec::pairwise_sum(&integral_estimates) + tail)
    };
    Ok(IntegrabilityReport {
        integral_estimates,
        divergent,
        fitted_exponent,
        extrapolated_total,
        excluded_nodes,
    })
}

/// Annulus integral of the pure law `r^{p - 2n} dV`, up to the sphere volume.
fn shell_power(inner: f64, outer: f64, p: f64) -> f64 {
    if p.abs() < 1e-12 {
        (outer / inner).ln()
    } else {
        (outer.powf(p) - inner.powf(p)) / p
    }
}

/// Solve `S2 / S1 = shell(r2, r1; p) / shell(r1, r0; p)` for `p` by bisection.
fn fit_exponent(s1: f64, s2: f64, r: [f64; 3]) -> f64 {
    if !(s1 > 0.0) || !(s2 > 0.0) {
        return f64::NAN;
    }
    let target = (s2 / s1).ln();
    let g = |p: f64| (shell_power(r[2], r[1], p) / shell_power(r[1], r[0], p)).ln() - target;
    let (mut lo, mut hi) = (-40.0, 40.0);
    // g decreases in p: inner shells carry relatively less mass as p grows.
    if g(lo) < 0.0 {
        return lo;
    }
    if g(hi) > 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn shell_integral(
    expr: &WeightExpr,
    center: &[C64],
    inner: f64,
    outer: f64,
    cfg: &IntegrabilityConfig,
) -> (f64, usize) {
    let n = center.len();
    let (lu, hu) = (inner.ln(), outer.ln());
    let radial: Vec<(f64, f64)> = gauss_legendre(cfg.radial_order)
        .iter()
        .map(|&(x, w)| {
            let u = 0.5 * (hu - lu) * x + 0.5 * (hu + lu);
            let r = u.exp();
            // dV = r^{2n-1} dr dOmega and dr = r du.
            (r, 0.5 * (hu - lu) * w * r.powi(2 * n as i32))
        })
        .collect();
    let na = cfg.angular_points.max(4);
    let dtheta = 2.0 * PI / na as f64;
    let mut values = Vec::new();
    let mut excluded = 0;
    let mut push = |z: &[C64], w: f64| {
        let near_pole = expr.min_log_argument(z, &[]) < POLE_EXCLUSION * POLE_EXCLUSION;
        let v = (-expr.eval_bound(z, &[])).exp();
        if near_pole || !v.is_finite() {
            excluded += 1;
        } else {
            values.push(w * v);
        }
    };
    if n == 1 {
        for &(r, wr) in &radial {
            for a in 0..na {
                let z = center[0] + C64::from_polar(r, a as f64 * dtheta);
                push(&[z], wr * dtheta);
            }
        }
    } else {
        // Hopf coordinates: z1 = r cos(eta) e^{ia}, z2 = r sin(eta) e^{ib},
        // dOmega = cos(eta) sin(eta) d eta da db.
        let eta: Vec<(f64, f64)> = gauss_legendre((cfg.angular_points / 2).max(4))
            .iter()
            .map(|&(x, w)| {
                let e = PI / 4.0 * (x + 1.0);
                (e, PI / 4.0 * w * e.cos() * e.sin())
            })
            .collect();
        for &(r, wr) in &radial {
            for &(e, we) in &eta {
                for a in 0..na {
                    for b in 0..na {
                        let z = [
                            center[0] + C64::from_polar(r * e.cos(), a as f64 * dtheta),
                            center[1] + C64::from_polar(r * e.sin(), b as f64 * dtheta),
                        ];
                        push(&z, wr * we * dtheta * dtheta);
                    }
                }
            }
        }
    }
    (exec::pairwise_sum(&values), excluded)
}
