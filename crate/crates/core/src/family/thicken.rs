use std::f64::consts::PI;

use super::KernelField;
use crate::bergman::{gram_with_density, kernel_diag, monomial_basis};
use crate::error::{Error, Result};
use crate::levi::Verdict;
use crate::quadrature::polar_disk_rule;
use crate::C64;

/// Discretization of the thickened domain `fiber x {|t' - t0| < eps}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThickenConfig {
    /// Total degree in `(z, (t' - t0) / eps)`; `None` uses the family's `d_max`.
    pub d_max: Option<u32>,
    pub disk_radial: usize,
    pub disk_angular: usize,
    pub tol: f64,
    /// Errors below this (relative to the limit) count as converged.
    pub noise_floor: f64,
}

impl Default for ThickenConfig {
    fn default() -> Self {
        Self {
            d_max: None,
            disk_radial: 8,
            disk_angular: 16,
            tol: 1e-2,
            noise_floor: 1e-9,
        }
    }
}

/// `pi eps^2 K_eps(probe, t0)` against the fiber kernel `K(probe, probe, t0)`.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub limit_value: f64,
    /// Least-squares slope of `log error` against `log eps`; NaN when every
    /// error is below the noise floor.
    pub fitted_rate: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

/// Rescaled kernels of the thickened family at `(probe, t0)` for each `eps`.
pub fn thickened_rescaling(
    field: &KernelField,
    t0: C64,
    epsilons: &[f64],
    probe: &[C64],
    cfg: &ThickenConfig,
) -> Result<ConvergenceReport> {
    let spec = field.spec();
    if spec.k != 1 {
        return Err(Error::invalid(
            "thickening needs a one-dimensional parameter",
        ));
    }
    if epsilons.is_empty() {
        return Err(Error::invalid("epsilon list is empty"));
    }
    if epsilons.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::invalid("epsilons must be positive"));
    }
    if probe.len() != spec.n || !spec.domain.contains(probe, &[t0]) {
        return Err(Error::invalid(
            "probe must be an interior point of the fiber at t0",
        ));
    }
    let n = spec.n;
    let limit = field.diag(probe, &[t0])?;
    let fiber = field.rule(&[t0])?;
    let d_max = cfg.d_max.unwrap_or(spec.d_max);

    let values = epsilons
        .iter()
        .map(|&eps| {
            let mut center = vec![C64::new(0.0, 0.0); n + 1];
            center[n] = t0;
            let mut scale = vec![1.0; n + 1];
            scale[n] = eps;
            let basis = monomial_basis(n + 1, d_max).with_affine(center, scale);
            let rule = fiber.product(&polar_disk_rule(t0, eps, cfg.disk_radial, cfg.disk_angular));
            let gram = gram_with_density(&basis, &rule, |x| {
                (-spec.weight.eval_bound(&x[..n], &x[n..])).exp()
            })?;
            let mut point = probe.to_vec();
            point.push(t0);
            Ok(PI * eps * eps * kernel_diag(&basis, &gram, &point)?)
        })
        .collect::<Result<Vec<f64>>>()?;

    let errors: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
    let floor = cfg.noise_floor * limit.abs();
    let decreasing = errors.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);
    let last = *errors.last().expect("nonempty");
    let fitted_rate = fit_rate(epsilons, &errors, floor);
    Ok(ConvergenceReport {
        epsilons: epsilons.to_vec(),
        values,
        errors,
        limit_value: limit,
        fitted_rate,
        tol: cfg.tol,
        verdict: Verdict::from_bool(last <= cfg.tol && decreasing),
    })
}

fn fit_rate(eps: &[f64], err: &[f64], floor: f64) -> f64 {
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .zip(err)
        .filter(|(_, e)| **e > floor)
        .map(|(x, e)| (x.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{kernel_field, FamilySpec};
    use crate::quadrature::Domain;
    use crate::weight::WeightExpr;

    #[test]
    fn product_family_is_exact() {
        let spec = FamilySpec::new(WeightExpr::zero(), Domain::unit_disk(), 1)
            .unwrap()
            .with_d_max(10);
        let field = kernel_field(spec).unwrap();
        let r = thickened_rescaling(
            &field,
            C64::new(0.2, 0.0),
            &[0.2, 0.1, 0.05],
            &[C64::new(0.0, 0.0)],
            &Default::default(),
        )
        .unwrap();
        assert!(r.errors.iter().all(|e| *e < 1e-6), "{:?}", r.errors);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn shifted_weight_converges_quadratically() {
        let spec = FamilySpec::new("abs2(z1 - t1)".parse().unwrap(), Domain::unit_disk(), 1)
            .unwrap()
            .with_d_max(12)
            .with_quadrature(crate::family::QuadratureConfig {
                order: 24,
                ..Default::default()
            });
        let field = kernel_field(spec).unwrap();
        let r = thickened_rescaling(
            &field,
            C64::new(0.2, 0.0),
            &[0.2, 0.1, 0.05],
            &[C64::new(0.3, 0.0)],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.fitted_rate >= 1.5, "{r:?}");
    }

    #[test]
    fn empty_epsilon_list_is_an_error() {
        let spec = FamilySpec::new(WeightExpr::zero(), Domain::unit_disk(), 1)
            .unwrap()
            .with_d_max(2);
        let field = kernel_field(spec).unwrap();
        assert!(thickened_rescaling(
            &field,
            C64::new(0.0, 0.0),
            &[],
            &[C64::new(0.0, 0.0)],
            &Default::default()
        )
        .is_err());
    }
}
