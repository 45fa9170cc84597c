//! Sampled plurisubharmonicity.
//!
//! The Levi form `L_jk = d^2 f / dw_j dconj(w_k)` of a real function on
//! `C^d` is estimated from central differences of the real Hessian:
//!
//! `L_jk = (f_{x_j x_k} + f_{y_j y_k} + i (f_{x_j y_k} - f_{y_j x_k})) / 4`.
//!
//! Each probe also gets directional Levi values `v* L v` along seeded random
//! complex directions and a sub-mean-value test on circles in the same
//! complex lines. The same directions are reused at every probe so that
//! callers with expensive, cached evaluators (kernel fields) share stencil
//! points between probes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::{exec, seed, C64};

/// Outcome of a positivity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The hypothesis of the statement being tested does not hold, so the
    /// check says nothing.
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Vacuous => "vacuous",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Axis-aligned box in `C^d`, given as `(lo, hi)` for `re w_1, im w_1, re w_2, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBox {
    pub ranges: Vec<(f64, f64)>,
}

impl SampleBox {
    pub fn new(ranges: Vec<(f64, f64)>) -> Result<Self> {
        let b = Self { ranges };
        b.validate()?;
        Ok(b)
    }

    /// Box `[-r, r]` on every real axis of `C^d`.
    pub fn centered(d: usize, r: f64) -> Self {
        Self {
            ranges: vec![(-r, r); 2 * d],
        }
    }

    pub fn complex_dim(&self) -> usize {
        self.ranges.len() / 2
    }

    fn validate(&self) -> Result<()> {
        if self.ranges.is_empty() || !self.ranges.len().is_multiple_of(2) {
            return Err(Error::invalid(
                "sample box needs (lo, hi) for re and im of every coordinate",
            ));
        }
        if self
            .ranges
            .iter()
            .any(|(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            return Err(Error::invalid("sample box is degenerate"));
        }
        Ok(())
    }

    /// Lattice with `grid` points per real axis; zero-width axes contribute one
    /// point. Points are ordered with the last axis varying fastest.
    pub fn lattice(&self, grid: usize) -> Result<Vec<Vec<C64>>> {
        self.validate()?;
        if grid < 2 {
            return Err(Error::invalid("grid must be at least 2"));
        }
        let axes: Vec<Vec<f64>> = self
            .ranges
            .iter()
            .map(|&(lo, hi)| {
                if hi == lo {
                    vec![lo]
                } else {
                    (0..grid)
                        .map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64)
                        .collect()
                }
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for prefix in &out {
                for &x in axis {
                    let mut p = prefix.clone();
                    p.push(x);
                    next.push(p);
                }
            }
            out = next;
        }
        Ok(out
            .into_iter()
            .map(|reals| reals.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
            .collect())
    }
}

/// Sampling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviConfig {
    pub fd_step: f64,
    pub tol: f64,
    /// Random complex directions per probe (one is enough in `C^1`).
    pub directions: usize,
    /// Points on each sub-mean-value circle.
    pub circle_points: usize,
    /// Circle radius as a multiple of `fd_step`.
    pub circle_radius_steps: f64,
    pub seed: u64,
}

impl Default for LeviConfig {
    fn default() -> Self {
        Self {
            fd_step: 1e-3,
            tol: 1e-4,
            directions: 8,
            circle_points: 16,
            circle_radius_steps: 2.0,
            seed: 0,
        }
    }
}

/// Sampled evidence for `i dd^c f >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PshReport {
    pub min_levi_eigenvalue: f64,
    pub worst_point: Vec<C64>,
    pub sub_mean_violations: usize,
    /// Number of probe points examined.
    pub grid_size: usize,
    /// Probes skipped because a stencil point was non-finite or near a pole.
    pub skipped: usize,
    pub fd_step: f64,
    pub tol: f64,
    pub verdict: Verdict,
    /// Smallest Levi value per probe, in probe order (`NaN` when skipped).
    pub per_probe_min: Vec<f64>,
}

impl PshReport {
    /// Mark the report vacuous: the weight hypothesis failed, so the sample
    /// says nothing either way.
    pub fn downgrade_to_vacuous(&mut self) {
        self.verdict = Verdict::Vacuous;
    }
}

struct ProbeOutcome {
    min_levi: f64,
    violations: usize,
}

/// Unit directions shared by all probes of one check.
pub fn directions(d: usize, count: usize, seed_value: u64) -> Vec<Vec<C64>> {
    let mut rng = seed::rng(seed_value, "levi-directions");
    let count = if d == 1 { 1 } else { count.max(1) };
    (0..count)
        .map(|_| {
            let v: Vec<C64> = (0..d)
                .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.into_iter().map(|c| c / norm).collect()
        })
        .collect()
}

/// Run the sampled Levi test of `f` at every probe.
///
/// `skip` marks probes that must be left out (too close to a pole). A probe
/// whose stencil produces a non-finite value is skipped as well.
pub fn sample<F, S>(f: &F, probes: &[Vec<C64>], cfg: &LeviConfig, skip: &S) -> Result<PshReport>
where
    F: Fn(&[C64]) -> Result<f64> + Sync,
    S: Fn(&[C64]) -> bool + Sync,
{
    if !(cfg.fd_step > 0.0) {
        return Err(Error::invalid("fd_step must be positive"));
    }
    let d = probes.first().map_or(0, |p| p.len());
    if probes.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("probe points have inconsistent dimension"));
    }
    let dirs = directions(d, cfg.directions, cfg.seed);
    let outcomes: Vec<Result<Option<ProbeOutcome>>> = exec::map(probes.len(), |i| {
        if skip(&probes[i]) {
            return Ok(None);
        }
        probe(f, &probes[i], &dirs, cfg)
    });

    let mut min_levi = f64::INFINITY;
    let mut worst = probes.first().cloned().unwrap_or_default();
    let mut violations = 0;
    let mut skipped = 0;
    let mut per_probe = Vec::with_capacity(probes.len());
    for (i, o) in outcomes.into_iter().enumerate() {
        match o? {
            None => {
                skipped += 1;
                per_probe.push(f64::NAN);
            }
            Some(o) => {
                if o.min_levi < min_levi {
                    min_levi = o.min_levi;
                    worst = probes[i].clone();
                }
                violations += o.violations;
                per_probe.push(o.min_levi);
            }
        }
    }
    let evaluated = probes.len() - skipped;
    let verdict = Verdict::from_bool(evaluated > 0 && min_levi >= -cfg.tol && violations == 0);
    Ok(PshReport {
        min_levi_eigenvalue: min_levi,
        worst_point: worst,
        sub_mean_violations: violations,
        grid_size: probes.len(),
        skipped,
        fd_step: cfg.fd_step,
        tol: cfg.tol,
        verdict,
        per_probe_min: per_probe,
    })
}

fn shifted(p: &[C64], moves: &[(usize, C64)]) -> Vec<C64> {
    let mut q = p.to_vec();
    for &(j, dz) in moves {
        q[j] += dz;
    }
    q
}

fn along(p: &[C64], v: &[C64], s: C64) -> Vec<C64> {
    p.iter().zip(v).map(|(a, b)| a + b * s).collect()
}

fn probe<F>(f: &F, p: &[C64], dirs: &[Vec<C64>], cfg: &LeviConfig) -> Result<Option<ProbeOutcome>>
where
    F: Fn(&[C64]) -> Result<f64> + Sync,
{
    let d = p.len();
    let h = cfg.fd_step;
    let mut finite = true;
    let mut ev = |q: &[C64]| -> Result<f64> {
        let v = f(q)?;
        if !v.is_finite() {
            finite = false;
        }
        Ok(v)
    };
    let f0 = ev(p)?;
    // Real axis a = 2j (re w_j) or 2j + 1 (im w_j).
    let unit = |a: usize| -> (usize, C64) {
        if a.is_multiple_of(2) {
            (a / 2, C64::new(h, 0.0))
        } else {
            (a / 2, C64::new(0.0, h))
        }
    };
    let m = 2 * d;
    let mut hess = vec![0.0; m * m];
    for a in 0..m {
        let (ja, da) = unit(a);
        let fp = ev(&shifted(p, &[(ja, da)]))?;
        let fm = ev(&shifted(p, &[(ja, -da)]))?;
        hess[a * m + a] = (fp - 2.0 * f0 + fm) / (h * h);
        for b in (a + 1)..m {
            let (jb, db) = unit(b);
            let fpp = ev(&shifted(p, &[(ja, da), (jb, db)]))?;
            let fpm = ev(&shifted(p, &[(ja, da), (jb, -db)]))?;
            let fmp = ev(&shifted(p, &[(ja, -da), (jb, db)]))?;
            let fmm = ev(&shifted(p, &[(ja, -da), (jb, -db)]))?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[a * m + b] = v;
            hess[b * m + a] = v;
        }
    }
    let levi = DMatrix::from_fn(d, d, |j, k| {
        let xx = hess[(2 * j) * m + 2 * k];
        let yy = hess[(2 * j + 1) * m + 2 * k + 1];
        let xy = hess[(2 * j) * m + 2 * k + 1];
        let yx = hess[(2 * j + 1) * m + 2 * k];
        C64::new(0.25 * (xx + yy), 0.25 * (xy - yx))
    });
    let mut min_levi = min_hermitian_eigenvalue(&levi);

    let mut violations = 0;
    let r = cfg.circle_radius_steps * h;
    for v in dirs {
        let q = ev(&along(p, v, C64::new(h, 0.0)))?
            + ev(&along(p, v, C64::new(-h, 0.0)))?
            + ev(&along(p, v, C64::new(0.0, h)))?
            + ev(&along(p, v, C64::new(0.0, -h)))?;
        min_levi = min_levi.min((q - 4.0 * f0) / (4.0 * h * h));

        let n = cfg.circle_points.max(4);
        let mut vals = Vec::with_capacity(n);
        for j in 0..n {
            let theta = 2.0 * PI * j as f64 / n as f64;
            vals.push(ev(&along(p, v, C64::from_polar(r, theta)))?);
        }
        let mean = exec::pairwise_sum(&vals) / n as f64;
        if (mean - f0) / (r * r) < -cfg.tol {
            violations += 1;
        }
    }
    if !finite {
        return Ok(None);
    }
    Ok(Some(ProbeOutcome {
        min_levi,
        violations,
    }))
}

/// Smallest eigenvalue of a Hermitian matrix (symmetrized first).
pub fn min_hermitian_eigenvalue(m: &DMatrix<C64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> LeviConfig {
        LeviConfig {
            tol: 1e-6,
            ..LeviConfig::default()
        }
    }

    #[test]
    fn quadratic_form_levi_matches_closed_form() {
        // f = |w1|^2 + 3|w2|^2 + 2 re(w1 conj(w2)) has Levi matrix [[1,1],[1,3]].
        let f = |w: &[C64]| -> Result<f64> {
            Ok(w[0].norm_sqr() + 3.0 * w[1].norm_sqr() + 2.0 * (w[0] * w[1].conj()).re)
        };
        let probes = vec![vec![C64::new(0.1, 0.2), C64::new(-0.3, 0.0)]];
        let r = sample(&f, &probes, &cfg(), &|_: &[C64]| false).unwrap();
        let expected = 2.0 - 2f64.sqrt();
        assert!(
            (r.min_levi_eigenvalue - expected).abs() < 1e-6,
            "{}",
            r.min_levi_eigenvalue
        );
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn pluriharmonic_function_has_zero_levi_form() {
        let f = |w: &[C64]| -> Result<f64> { Ok((w[0] * w[0] * w[1] + w[1]).re) };
        let probes = SampleBox::centered(2, 0.5).lattice(2).unwrap();
        let r = sample(&f, &probes, &cfg(), &|_: &[C64]| false).unwrap();
        assert!(r.min_levi_eigenvalue.abs() < 1e-5);
        assert_eq!(r.sub_mean_violations, 0);
    }

    #[test]
    fn lattice_size_and_degenerate_boxes() {
        let b = SampleBox::new(vec![(0.0, 1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(b.lattice(5).unwrap().len(), 5);
        assert!(SampleBox::new(vec![(1.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(b.lattice(1).is_err());
    }
}
