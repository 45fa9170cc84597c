//! Narasimhan-Simha pseudonorms and potentials on bounded-domain models.
//!
//! An m-canonical form `eta = p (dz)^m` has pseudonorm
//! `||eta||_{1/m} = (int (|p|^2 e^{-phi})^{1/m} dV)^{m/2}` and the potential is
//! `K_m(x) = sup |p(x)|^2 / ||eta||_{1/m}^2`.
//!
//! The sup is found by multistart projected gradient ascent on the unit
//! pseudonorm sphere followed by a majorize-minimize polish. Because
//! `s -> s^{1/m}` is concave, `int |p|^{2/m}` is majorized at `p0` by a
//! weighted L2 norm with density `|p0|^{2/m - 2}`, whose maximizer of
//! `|p(x)|^2` is a Bergman-type solve.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use rand::Rng;

use crate::bergman::{monomial_basis, Basis, GramMatrix, MonomialBasis};
use crate::error::{Error, Result};
use crate::levi::{self, LeviConfig, PshReport};
use crate::quadrature::{Domain, QuadratureRule};
use crate::weight::WeightExpr;
use crate::{exec, seed, C64};

/// Floor on `|p|` inside `|p|^{2/m - 2}`.
pub const ZERO_FLOOR: f64 = 1e-8;

/// Coefficient space of `eta = p (dz)^m` with its discretized measure.
#[derive(Debug, Clone)]
pub struct NsSpace {
    m: u32,
    basis: MonomialBasis,
    rule: Arc<QuadratureRule>,
    /// `B[k][i] = e_i(x_k)`.
    values: DMatrix<C64>,
    /// `e^{-phi(x_k) / m}`.
    density: Vec<f64>,
}

impl NsSpace {
    pub fn new(
        m: u32,
        basis: MonomialBasis,
        rule: Arc<QuadratureRule>,
        weight: &WeightExpr,
        t: &[C64],
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if basis.is_empty() {
            return Err(Error::invalid("the coefficient basis is empty"));
        }
        if rule.n() != basis.n() {
            return Err(Error::invalid(
                "rule dimension differs from the basis dimension",
            ));
        }
        weight.check_bound(basis.n(), t.len())?;
        let rows: Vec<Vec<C64>> = exec::map(rule.len(), |k| basis.eval(rule.node(k)));
        let values = DMatrix::from_fn(rule.len(), basis.len(), |k, i| rows[k][i]);
        let density = exec::map(rule.len(), |k| {
            (-weight.eval_bound(rule.node(k), t) / f64::from(m)).exp()
        });
        if let Some(index) = density.iter().position(|d| !d.is_finite()) {
            return Err(Error::NonFiniteIntegrand { index });
        }
        Ok(Self {
            m,
            basis,
            rule,
            values,
            density,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    fn point_values(&self, c: &[C64]) -> Vec<C64> {
        exec::map(self.rule.len(), |k| {
            (0..c.len()).map(|i| self.values[(k, i)] * c[i]).sum()
        })
    }

    /// `|v|^{2/m}`.
    fn root(&self, v: C64) -> f64 {
        match self.m {
            1 => v.norm_sqr(),
            2 => v.norm(),
            m => v.norm_sqr().powf(1.0 / f64::from(m)),
        }
    }

    /// `int |p|^{2/m} e^{-phi/m} dV`.
    fn integral(&self, p: &[C64]) -> f64 {
        let terms: Vec<f64> = (0..p.len())
            .map(|k| self.rule.weights()[k] * self.density[k] * self.root(p[k]))
            .collect();
        exec::pairwise_sum(&terms)
    }

    /// `||eta||_{1/m}` for `p = sum_i c_i e_i`.
    pub fn pseudonorm(&self, c: &[C64]) -> f64 {
        assert_eq!(c.len(), self.basis.len(), "coefficient length");
        self.integral(&self.point_values(c))
            .powf(f64::from(self.m) / 2.0)
    }

    /// `log(|p(x)|^2 / ||eta||^2)` with the node values and integral for reuse.
    fn log_ratio(&self, ex: &[C64], c: &[C64]) -> Eval {
        let px: C64 = ex.iter().zip(c).map(|(a, b)| a * b).sum();
        let p = self.point_values(c);
        let integral = self.integral(&p);
        Eval {
            log_ratio: px.norm_sqr().ln() - f64::from(self.m) * integral.ln(),
            px,
            p,
            integral,
        }
    }
}

struct Eval {
    log_ratio: f64,
    px: C64,
    p: Vec<C64>,
    integral: f64,
}

impl Eval {
    /// Rescale `c` (the coefficients this was computed from) and `self` to
    /// unit pseudonorm.
    fn normalize(mut self, c: Vec<C64>, m: u32) -> (Vec<C64>, Eval) {
        let n = self.integral.powf(f64::from(m) / 2.0);
        if !(n > 0.0 && n.is_finite()) {
            return (c, self);
        }
        self.px /= n;
        self.p.iter_mut().for_each(|v| *v /= n);
        self.integral = 1.0;
        (c.into_iter().map(|v| v / n).collect(), self)
    }
}

/// Optimizer budget for the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsOptimizerConfig {
    /// Random starts in addition to the Bergman warm start.
    pub starts: usize,
    pub ascent_iters: usize,
    pub polish_iters: usize,
    /// Change of the log ratio below which a start has converged.
    pub tol: f64,
    pub seed: u64,
    /// Also start from the maximizer of the unweighted L2 majorizer.
    pub bergman_start: bool,
}

impl Default for NsOptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 16,
            ascent_iters: 60,
            polish_iters: 400,
            tol: 1e-12,
            seed: 0,
            bergman_start: true,
        }
    }
}

/// The potential at one point.
#[derive(Debug, Clone)]
pub struct NsResult {
    pub x: Vec<C64>,
    pub value: f64,
    /// Maximizer scaled to unit pseudonorm.
    pub argmax_coeffs: Vec<C64>,
    pub starts_used: usize,
    /// `(best - second best) / best` over the start optima.
    pub best_gap: f64,
}

struct StartOutcome {
    log_value: f64,
    coeffs: Vec<C64>,
    converged: bool,
}

/// `K_m(x)` by multistart ascent.
pub fn ns_potential_at(space: &NsSpace, x: &[C64], cfg: &NsOptimizerConfig) -> Result<NsResult> {
    ns_potential_with_starts(space, x, cfg, &[])
}

/// As [`ns_potential_at`], with extra starting coefficient vectors.
pub fn ns_potential_with_starts(
    space: &NsSpace,
    x: &[C64],
    cfg: &NsOptimizerConfig,
    extra: &[Vec<C64>],
) -> Result<NsResult> {
    if x.len() != space.basis.n() {
        return Err(Error::invalid("point dimension differs from the space"));
    }
    let ex = space.basis.eval(x);
    let nb = ex.len();
    let mut starts: Vec<Vec<C64>> = Vec::new();
    if cfg.bergman_start || extra.is_empty() {
        starts.push(mm_step(space, &ex, None)?);
    }
    starts.extend(extra.iter().filter(|s| s.len() == nb).cloned());
    let mut rng = seed::rng(cfg.seed, "ns-starts");
    for _ in 0..cfg.starts {
        starts.push(
            (0..nb)
                .map(|_| {
                    C64::new(
                        rng.random::<f64>() * 2.0 - 1.0,
                        rng.random::<f64>() * 2.0 - 1.0,
                    )
                })
                .collect(),
        );
    }
    let outcomes: Vec<Result<StartOutcome>> =
        exec::map(starts.len(), |s| optimize(space, &ex, &starts[s], cfg));
    let mut good: Vec<StartOutcome> = Vec::new();
    for o in outcomes {
        let o = o?;
        if o.log_value.is_finite() {
            good.push(o);
        }
    }
    good.sort_by(|a, b| b.log_value.total_cmp(&a.log_value));
    let Some(best) = good.first() else {
        return Err(Error::NonConvergence { best: f64::NAN });
    };
    if !good.iter().any(|o| o.converged) {
        return Err(Error::NonConvergence {
            best: best.log_value.exp(),
        });
    }
    let value = best.log_value.exp();
    let best_gap = good
        .get(1)
        .map_or(0.0, |s| (value - s.log_value.exp()) / value);
    let norm = space.pseudonorm(&best.coeffs);
    Ok(NsResult {
        x: x.to_vec(),
        value,
        argmax_coeffs: best.coeffs.iter().map(|c| c / norm).collect(),
        starts_used: starts.len(),
        best_gap,
    })
}

/// Maximizer of `|p(x)|^2` for the L2 majorizer at node values `p0`
/// (or at `p0 = 1`).
fn mm_step(space: &NsSpace, ex: &[C64], p0: Option<&[C64]>) -> Result<Vec<C64>> {
    let e = 1.0 / f64::from(space.m) - 1.0;
    let mut rows = space.values.clone();
    for (k, mut row) in rows.row_iter_mut().enumerate() {
        let scale = p0.map_or(1.0, |p| match space.m {
            1 => 1.0,
            2 => 1.0 / p[k].norm().max(ZERO_FLOOR),
            _ => p[k].norm().max(ZERO_FLOOR).powf(2.0 * e),
        });
        row *= C64::new(
            (space.rule.weights()[k] * space.density[k] * scale).sqrt(),
            0.0,
        );
    }
    let gram =
        GramMatrix::from_entries(rows.transpose() * rows.map(|v| v.conj()), space.basis.id())?;
    Ok(gram.solve(ex).iter().map(|v| v.conj()).collect())
}

fn optimize(
    space: &NsSpace,
    ex: &[C64],
    start: &[C64],
    cfg: &NsOptimizerConfig,
) -> Result<StartOutcome> {
    let (mut c, mut cur) = space
        .log_ratio(ex, start)
        .normalize(start.to_vec(), space.m);
    let mut step = 0.1;
    for _ in 0..cfg.ascent_iters {
        if !cur.log_ratio.is_finite() || step < 1e-14 {
            break;
        }
        let g = gradient(space, ex, &cur);
        let gn = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if !(gn > 0.0) {
            break;
        }
        let trial: Vec<C64> = c.iter().zip(&g).map(|(a, b)| a + b * (step / gn)).collect();
        let next = space.log_ratio(ex, &trial);
        if next.log_ratio > cur.log_ratio {
            (c, cur) = next.normalize(trial, space.m);
            step *= 1.5;
        } else {
            step *= 0.5;
        }
    }
    let mut converged = false;
    for _ in 0..cfg.polish_iters {
        let trial = mm_step(space, ex, Some(&cur.p))?;
        let next = space.log_ratio(ex, &trial);
        if !next.log_ratio.is_finite() {
            break;
        }
        let change = (next.log_ratio - cur.log_ratio).abs();
        if next.log_ratio >= cur.log_ratio || !cur.log_ratio.is_finite() {
            (c, cur) = next.normalize(trial, space.m);
        }
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }
    Ok(StartOutcome {
        log_value: cur.log_ratio,
        coeffs: c,
        converged,
    })
}

/// `d log R / d conj(c)` with the zero floor on `|p|`.
fn gradient(space: &NsSpace, ex: &[C64], at: &Eval) -> Vec<C64> {
    let e = 1.0 / f64::from(space.m) - 1.0;
    let mut g: Vec<C64> = ex.iter().map(|v| v.conj() / at.px.conj()).collect();
    for (k, pk) in at.p.iter().enumerate() {
        let s =
            space.rule.weights()[k] * space.density[k] * pk.norm().max(ZERO_FLOOR).powf(2.0 * e)
                / at.integral;
        for (gi, gv) in g.iter_mut().enumerate() {
            *gv -= space.values[(k, gi)].conj() * pk * s;
        }
    }
    g
}

/// A family of spaces over parameters `t`, with the weight `phi(z, t)`.
#[derive(Debug)]
pub struct NsFamily {
    pub m: u32,
    pub d_max: u32,
    pub k: usize,
    pub weight: WeightExpr,
    pub domain: Domain,
    rule: Arc<QuadratureRule>,
    cache: RwLock<HashMap<Vec<u64>, Arc<NsSpace>>>,
}

impl NsFamily {
    /// `rule` must integrate over `domain`, which may not depend on `t`.
    pub fn new(
        m: u32,
        d_max: u32,
        k: usize,
        weight: WeightExpr,
        domain: Domain,
        rule: QuadratureRule,
    ) -> Result<Self> {
        if domain.depends_on_t() {
            return Err(Error::invalid("potential families need a fixed domain"));
        }
        weight.check_bound(domain.n(), k)?;
        Ok(Self {
            m,
            d_max,
            k,
            weight,
            domain,
            rule: Arc::new(rule),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn space(&self, t: &[C64]) -> Result<Arc<NsSpace>> {
        let key: Vec<u64> = t
            .iter()
            .flat_map(|v| [v.re.to_bits(), v.im.to_bits()])
            .collect();
        if let Some(s) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let basis = monomial_basis(self.domain.n(), self.d_max);
        let s = Arc::new(NsSpace::new(
            self.m,
            basis,
            self.rule.clone(),
            &self.weight,
            t,
        )?);
        Ok(self
            .cache
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert(s)
            .clone())
    }
}

/// Sampled plurisubharmonicity of `log K_m(x, t)` over probes `(x, t)`.
///
/// Each probe gets the full multistart; stencil points start from the
/// optimum of the nearest probe and fall back to twice the starts.
pub fn ns_field_psh_check(
    family: &NsFamily,
    probes: &[Vec<C64>],
    levi_cfg: &LeviConfig,
    opt: &NsOptimizerConfig,
) -> Result<PshReport> {
    if probes.is_empty() {
        return Err(Error::invalid("probe grid is empty"));
    }
    let n = family.domain.n();
    if probes.iter().any(|p| p.len() != n + family.k) {
        return Err(Error::invalid("probe dimension differs from n + k"));
    }
    let anchors: Vec<NsResult> = exec::map(probes.len(), |i| {
        let (x, t) = probes[i].split_at(n);
        ns_potential_at(&*family.space(t)?, x, opt)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let warm = NsOptimizerConfig {
        starts: 0,
        ascent_iters: 0,
        bergman_start: false,
        tol: opt.tol.max(1e-11),
        ..*opt
    };
    let retry = NsOptimizerConfig {
        starts: 2 * opt.starts.max(1),
        ..*opt
    };
    let f = |q: &[C64]| -> Result<f64> {
        let nearest = (0..probes.len())
            .min_by(|&a, &b| dist2(&probes[a], q).total_cmp(&dist2(&probes[b], q)))
            .expect("nonempty");
        let (x, t) = q.split_at(n);
        let space = family.space(t)?;
        let seed = [anchors[nearest].argmax_coeffs.clone()];
        let r = match ns_potential_with_starts(&space, x, &warm, &seed) {
            Ok(r) => r,
            Err(Error::NonConvergence { .. }) => {
                ns_potential_with_starts(&space, x, &retry, &seed)?
            }
            Err(e) => return Err(e),
        };
        Ok(r.value.ln())
    };
    levi::sample(&f, probes, levi_cfg, &|_: &[C64]| false)
}

fn dist2(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}
