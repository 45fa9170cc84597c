//! Dynamical construction of an analytic Zariski decomposition on Fock models.
//!
//! Starting from `h_0 = s e^{-a|z|^2}`, step `m` computes the Bergman kernel
//! `K_m` of polynomials of degree at most `d_max` against the density
//! `h_{m-1} e^{-c|z|^2}` and sets `h_m = 1 / K_m`.

use crate::bergman::{
    gram_with_node_density, kernel_diag, monomial_basis, Basis, GramMatrix, MonomialBasis,
};
use crate::error::{Error, Result};
use crate::levi::{self, LeviConfig, PshReport, Verdict};
use crate::quadrature::{build_rule, Domain, QuadratureRule, Scheme};
use crate::C64;

/// Metric values above this are treated as poles and their nodes dropped.
pub const METRIC_CEILING: f64 = 1e300;

/// Fock model `C^n` truncated to a polydisk.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGeometry {
    pub n: usize,
    /// Reference weight `a |z|^2` of `A`.
    pub a: f64,
    /// Extra weight `c |z|^2` per power of `K`.
    pub c: f64,
    /// Constant factor `s` in `h_0 = s e^{-a|z|^2}`.
    pub h0_scale: f64,
    pub truncation_radius: f64,
    pub d_max: u32,
}

impl ModelGeometry {
    pub fn fock(a: f64, c: f64, truncation_radius: f64, d_max: u32) -> Self {
        Self {
            n: 1,
            a,
            c,
            h0_scale: 1.0,
            truncation_radius,
            d_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !(self.c >= 0.0) || !(self.h0_scale > 0.0) {
            return Err(Error::invalid(
                "model needs a > 0, c >= 0 and a positive h0 scale",
            ));
        }
        if !(self.truncation_radius > 0.0) || !(1..=2).contains(&self.n) {
            return Err(Error::invalid(
                "model needs n in {1, 2} and a positive truncation radius",
            ));
        }
        Ok(())
    }

    fn abs2(z: &[C64]) -> f64 {
        z.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `log h_0(z)`.
    pub fn log_h0(&self, z: &[C64]) -> f64 {
        self.h0_scale.ln() - self.a * Self::abs2(z)
    }

    /// Polar product rule over the truncation polydisk.
    pub fn rule(&self, radial_order: usize) -> Result<QuadratureRule> {
        let d = Domain::polydisk(
            vec![C64::new(0.0, 0.0); self.n],
            vec![self.truncation_radius; self.n],
        )?;
        build_rule(&d, &[], Scheme::Polar, radial_order, 0)
    }
}

/// One step of the iteration.
#[derive(Debug, Clone)]
pub struct AzdStep {
    pub m: usize,
    pub gram: GramMatrix,
    pub dim: usize,
    pub dropped_nodes: usize,
}

/// The kernels `K_1..K_{m_max}` of a run.
#[derive(Debug, Clone)]
pub struct AzdRun {
    pub model: ModelGeometry,
    pub basis: MonomialBasis,
    pub steps: Vec<AzdStep>,
}

impl AzdRun {
    pub fn m_max(&self) -> usize {
        self.steps.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.dim).collect()
    }

    /// `K_m(z)` for `1 <= m <= m_max`.
    pub fn kernel(&self, m: usize, z: &[C64]) -> Result<f64> {
        let step = self.step(m)?;
        kernel_diag(&self.basis, &step.gram, z)
    }

    fn step(&self, m: usize) -> Result<&AzdStep> {
        if m == 0 || m > self.steps.len() {
            return Err(Error::invalid(format!(
                "step {m} outside 1..={}",
                self.steps.len()
            )));
        }
        Ok(&self.steps[m - 1])
    }

    /// Sampled plurisubharmonicity of `log K_m`.
    pub fn psh_check(&self, m: usize, probes: &[Vec<C64>], cfg: &LeviConfig) -> Result<PshReport> {
        let step = self.step(m)?;
        levi::sample(
            &|z: &[C64]| Ok(kernel_diag(&self.basis, &step.gram, z)?.ln()),
            probes,
            cfg,
            &|_: &[C64]| false,
        )
    }
}

/// Run `m_max` steps of the iteration on `rule`.
pub fn azd_iterate(model: &ModelGeometry, m_max: usize, rule: &QuadratureRule) -> Result<AzdRun> {
    model.validate()?;
    if m_max == 0 {
        return Err(Error::invalid("the iteration needs at least one step"));
    }
    if rule.n() != model.n {
        return Err(Error::invalid(
            "rule dimension differs from the model dimension",
        ));
    }
    let basis = monomial_basis(model.n, model.d_max);
    let mut steps: Vec<AzdStep> = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let log_h: Vec<f64> = match steps.last() {
            None => crate::exec::map(rule.len(), |i| model.log_h0(rule.node(i))),
            Some(prev) => crate::exec::map(rule.len(), |i| {
                let k = kernel_diag(&basis, &prev.gram, rule.node(i)).unwrap_or(0.0);
                -k.ln() - model.c * ModelGeometry::abs2(rule.node(i))
            }),
        };
        let ceiling = METRIC_CEILING.ln();
        let dropped_nodes = log_h.iter().filter(|v| !(**v <= ceiling)).count();
        let gram = gram_with_node_density(&basis, rule, |i| {
            if log_h[i] <= ceiling {
                log_h[i].exp()
            } else {
                0.0
            }
        });
        let gram = gram.map_err(|e| match e {
            Error::DegenerateGram { .. } => Error::DegenerateGram {
                context: format!(" at AZD step {m}"),
            },
            other => other,
        })?;
        steps.push(AzdStep {
            m,
            dim: basis.len(),
            gram,
            dropped_nodes,
        });
    }
    Ok(AzdRun {
        model: model.clone(),
        basis,
        steps,
    })
}

/// Least-squares slope of `log dim` against `log m` over the last half of
/// the run (`dims[0]` belongs to `m = 1`).
pub fn kodaira_dim_estimate(dims: &[usize]) -> Result<f64> {
    if dims.len() < 3 {
        return Err(Error::invalid("at least three dimensions are needed"));
    }
    if dims.contains(&0) {
        return Err(Error::invalid("dimensions must be positive"));
    }
    let start = dims.len() / 2;
    let pts: Vec<(f64, f64)> = (start..dims.len())
        .map(|i| (((i + 1) as f64).ln(), (dims[i] as f64).ln()))
        .collect();
    Ok(slope(&pts))
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|k| (k as f64).ln()).sum()
}

/// Rescaled sequences `s_m = ((m!)^{-nu} K_m(z))^{1/m}` per probe.
#[derive(Debug, Clone)]
pub struct AzdLimitReport {
    pub nu: f64,
    pub sequences: Vec<Vec<f64>>,
    pub limit_values: Vec<f64>,
    /// `max |s_M - s_{M-1}|` over probes; NaN for a single step.
    pub cauchy_gap: f64,
    /// `max (s_M - s_{M-1})^+`, the one-sided gap of the upper limit.
    pub upper_gap: f64,
    /// `max (s_{M-1} - s_M)^+`, the one-sided gap of the lower limit.
    pub lower_gap: f64,
    /// Some probe sequence decreases monotonically by more than 10x.
    pub collapse: bool,
}

/// Limit report from `log K_m(z)` values, `log_kernels[probe][m - 1]`.
pub fn limit_from_log_kernels(log_kernels: &[Vec<f64>], nu: f64) -> AzdLimitReport {
    let sequences: Vec<Vec<f64>> = log_kernels
        .iter()
        .map(|ks| {
            ks.iter()
                .enumerate()
                .map(|(i, lk)| ((lk - nu * ln_factorial(i + 1)) / (i + 1) as f64).exp())
                .collect()
        })
        .collect();
    let limit_values = sequences
        .iter()
        .map(|s| s.last().copied().unwrap_or(f64::NAN))
        .collect();
    let (mut gap, mut up, mut down) = (0.0f64, 0.0f64, 0.0f64);
    let mut single = true;
    for s in &sequences {
        if s.len() >= 2 {
            single = false;
            let d = s[s.len() - 1] - s[s.len() - 2];
            gap = gap.max(d.abs());
            up = up.max(d);
            down = down.max(-d);
        }
    }
    if single {
        (gap, up, down) = (f64::NAN, f64::NAN, f64::NAN);
    }
    let collapse = sequences
        .iter()
        .any(|s| s.len() >= 2 && s.windows(2).all(|w| w[1] < w[0]) && s[0] > 10.0 * s[s.len() - 1]);
    if sequences.is_empty() {
        gap = f64::NAN;
    }
    AzdLimitReport {
        nu,
        sequences,
        limit_values,
        cauchy_gap: gap,
        upper_gap: up,
        lower_gap: down,
        collapse,
    }
}

/// Rescaled limit of a run at `probes`.
pub fn azd_limit(run: &AzdRun, nu: f64, probes: &[Vec<C64>]) -> Result<AzdLimitReport> {
    let logs = probes
        .iter()
        .map(|z| {
            (1..=run.m_max())
                .map(|m| Ok(run.kernel(m, z)?.ln()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(limit_from_log_kernels(&logs, nu))
}

/// Growth of `sup_z h_A K_m` against `C_1^m (m!)^nu`.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// `y_m = sup_z log(h_A K_m)(z) - nu log m!`.
    pub log_sup: Vec<f64>,
    /// Slope of `y_m` against `m`, an estimate of `log C_1`.
    pub fitted_log_c1: f64,
    /// Slope of `y_m / m` against `log m`; bounded sequences give about 0.
    pub normalized_slope: f64,
    pub verdict: Verdict,
}

/// Largest `normalized_slope` still read as bounded `y_m / m`.
pub const GROWTH_SLOPE_TOL: f64 = 0.1;

/// Growth verdict from `y_m + nu log m!`, indexed from `m = 1`.
pub fn growth_from_log_sup(log_sup_hk: &[f64], nu: f64) -> GrowthReport {
    let y: Vec<f64> = log_sup_hk
        .iter()
        .enumerate()
        .map(|(i, v)| v - nu * ln_factorial(i + 1))
        .collect();
    if y.len() < 2 {
        return GrowthReport {
            log_sup: y,
            fitted_log_c1: f64::NAN,
            normalized_slope: f64::NAN,
            verdict: Verdict::Vacuous,
        };
    }
    let lin: Vec<(f64, f64)> = y
        .iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) as f64, *v))
        .collect();
    let q: Vec<(f64, f64)> = y
        .iter()
        .enumerate()
        .map(|(i, v)| (((i + 1) as f64).ln(), v / (i + 1) as f64))
        .collect();
    let normalized_slope = slope(&q);
    let ok = y.iter().all(|v| v.is_finite()) && normalized_slope <= GROWTH_SLOPE_TOL;
    GrowthReport {
        log_sup: y,
        fitted_log_c1: slope(&lin),
        normalized_slope,
        verdict: Verdict::from_bool(ok),
    }
}

/// Growth check of a run, taking the sup over `probes`.
pub fn growth_bound_check(run: &AzdRun, nu: f64, probes: &[Vec<C64>]) -> Result<GrowthReport> {
    if probes.is_empty() {
        return Err(Error::invalid("growth check needs at least one probe"));
    }
    let sup = (1..=run.m_max())
        .map(|m| {
            probes.iter().try_fold(f64::NEG_INFINITY, |acc, z| {
                Ok(acc.max(run.model.log_h0(z) + run.kernel(m, z)?.ln()))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(growth_from_log_sup(&sup, nu))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn origin() -> Vec<Vec<C64>> {
        vec![vec![C64::new(0.0, 0.0)]]
    }

    fn fock_run(d_max: u32, m_max: usize, scale: f64) -> AzdRun {
        let model = ModelGeometry {
            h0_scale: scale,
            ..ModelGeometry::fock(1.0, 0.0, 6.0, d_max)
        };
        azd_iterate(&model, m_max, &model.rule(48).unwrap()).unwrap()
    }

    #[test]
    fn first_step_is_the_fock_kernel() {
        let run = fock_run(20, 1, 1.0);
        assert!((run.kernel(1, &[C64::new(0.0, 0.0)]).unwrap() - 1.0 / PI).abs() < 1e-3);
        let model = ModelGeometry::fock(1.0, 0.0, 6.0, 4);
        assert!(azd_iterate(&model, 0, &model.rule(8).unwrap()).is_err());
    }

    #[test]
    fn fock_iteration_converges_to_one_over_pi() {
        let run = fock_run(25, 10, 1.0);
        let nu = kodaira_dim_estimate(&run.dims()).unwrap();
        assert!(nu.abs() < 0.05);
        let lim = azd_limit(&run, 0.0, &origin()).unwrap();
        assert!(
            (lim.limit_values[0] - 1.0 / PI).abs() < 1e-2,
            "{:?}",
            lim.sequences
        );
        assert!(!lim.collapse);
        let g = growth_bound_check(&run, 0.0, &origin()).unwrap();
        assert_eq!(g.verdict, Verdict::Pass);
        assert!((g.fitted_log_c1 - (1.0 / PI).ln()).abs() < 0.05, "{g:?}");
    }

    #[test]
    fn misspecified_nu_collapses() {
        let run = fock_run(20, 30, 1.0);
        assert!(azd_limit(&run, 1.0, &origin()).unwrap().collapse);
        assert!(!azd_limit(&run, 0.0, &origin()).unwrap().collapse);
    }

    #[test]
    fn rescaling_h0_divides_every_kernel() {
        let base = fock_run(12, 4, 1.0);
        let scaled = fock_run(12, 4, 2.0);
        for m in 1..=4 {
            for x in [0.0, 0.7] {
                let z = [C64::new(x, 0.3)];
                let (k, ks) = (base.kernel(m, &z).unwrap(), scaled.kernel(m, &z).unwrap());
                assert!((ks * 2.0 / k - 1.0).abs() < 1e-10, "m = {m}");
            }
        }
    }

    #[test]
    fn kodaira_dimension_fits() {
        assert!(kodaira_dim_estimate(&[7; 10]).unwrap().abs() < 0.05);
        let linear: Vec<usize> = (1..=20).map(|m| m + 1).collect();
        assert!((kodaira_dim_estimate(&linear).unwrap() - 1.0).abs() < 0.1);
        assert!(kodaira_dim_estimate(&[5]).is_err());
    }

    #[test]
    fn growth_verdicts() {
        let factorial: Vec<f64> = (1..=12).map(ln_factorial).collect();
        assert_eq!(growth_from_log_sup(&factorial, 0.0).verdict, Verdict::Fail);
        assert_eq!(growth_from_log_sup(&factorial, 1.0).verdict, Verdict::Pass);
        assert_eq!(growth_from_log_sup(&[0.3], 0.0).verdict, Verdict::Vacuous);
    }

    #[test]
    fn empty_probe_set_gives_empty_report() {
        let r = limit_from_log_kernels(&[], 0.0);
        assert!(r.sequences.is_empty() && r.limit_values.is_empty());
    }
}
