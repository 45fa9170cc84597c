use std::f64::consts::PI;

use rand::Rng;

use super::{gauss_legendre_on, Domain, Shape};
use crate::error::{Error, Result};
use crate::{exec, seed, C64};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    TensorGauss,
    QuasiMonteCarlo,
    Polar,
}

/// Nodes in `C^n` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    n: usize,
    nodes: Vec<C64>,
    weights: Vec<f64>,
    scheme: Scheme,
    estimated_error: f64,
}

impl QuadratureRule {
    pub fn from_parts(
        n: usize,
        nodes: Vec<C64>,
        weights: Vec<f64>,
        scheme: Scheme,
        estimated_error: f64,
    ) -> Self {
        assert_eq!(nodes.len(), n * weights.len(), "node/weight count mismatch");
        Self {
            n,
            nodes,
            weights,
            scheme,
            estimated_error,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[C64] {
        &self.nodes[i * self.n..(i + 1) * self.n]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn estimated_error(&self) -> f64 {
        self.estimated_error
    }

    pub fn weight_sum(&self) -> f64 {
        exec::pairwise_sum(&self.weights)
    }

    /// Tensor product with `other`; coordinates of `self` come first.
    pub fn product(&self, other: &QuadratureRule) -> QuadratureRule {
        let n = self.n + other.n;
        let mut nodes = Vec::with_capacity(self.len() * other.len() * n);
        let mut weights = Vec::with_capacity(self.len() * other.len());
        for i in 0..self.len() {
            for j in 0..other.len() {
                nodes.extend_from_slice(self.node(i));
                nodes.extend_from_slice(other.node(j));
                weights.push(self.weights[i] * other.weights[j]);
            }
        }
        let (va, vb) = (self.weight_sum(), other.weight_sum());
        let err = self.estimated_error * vb + other.estimated_error * va;
        let scheme = if self.scheme == other.scheme {
            self.scheme
        } else {
            Scheme::TensorGauss
        };
        QuadratureRule {
            n,
            nodes,
            weights,
            scheme,
            estimated_error: err,
        }
    }
}

/// Polar rule on the disk `|z - center| < radius`: Gauss-Legendre in `r`
/// with `radial` points, trapezoid in the angle with `angular` points.
pub fn polar_disk_rule(center: C64, radius: f64, radial: usize, angular: usize) -> QuadratureRule {
    let dtheta = 2.0 * PI / angular as f64;
    let mut nodes = Vec::with_capacity(radial * angular);
    let mut weights = Vec::with_capacity(radial * angular);
    for (r, wr) in gauss_legendre_on(radial, 0.0, radius) {
        for a in 0..angular {
            nodes.push(center + C64::from_polar(r, a as f64 * dtheta));
            weights.push(wr * r * dtheta);
        }
    }
    let area = PI * radius * radius;
    let sum = exec::pairwise_sum(&weights);
    QuadratureRule {
        n: 1,
        nodes,
        weights,
        scheme: Scheme::Polar,
        estimated_error: (sum - area).abs() + area * 1e-15,
    }
}

/// Angular points used by the polar scheme for a given radial order.
pub fn polar_angular_points(order: usize) -> usize {
    (2 * order).max(8)
}

/// Build a rule for the fiber of `domain` at parameter `t`.
///
/// `order_or_samples` is the Gauss order per axis (tensor and polar schemes)
/// or the number of quasi-random samples. The polar scheme uses
/// `2 * order` angular points per disk and requires a polydisk.
pub fn build_rule(
    domain: &Domain,
    t: &[C64],
    scheme: Scheme,
    order_or_samples: usize,
    seed_value: u64,
) -> Result<QuadratureRule> {
    if order_or_samples == 0 {
        return Err(Error::invalid("order_or_samples must be at least 1"));
    }
    domain.defining_fn().check_bound(domain.n(), t.len())?;
    let rule = match scheme {
        Scheme::Polar => {
            let Shape::Polydisk { centers, radii } = domain.shape() else {
                return Err(Error::invalid("the polar scheme needs a polydisk domain"));
            };
            let ang = polar_angular_points(order_or_samples);
            centers
                .iter()
                .zip(radii)
                .map(|(c, r)| polar_disk_rule(*c, *r, order_or_samples, ang))
                .reduce(|a, b| a.product(&b))
                .expect("polydisk has at least one disk")
        }
        Scheme::TensorGauss => {
            let fine = tensor_gauss(domain, t, order_or_samples);
            if fine.is_empty() {
                return Err(Error::EmptyDomain);
            }
            let coarse = tensor_gauss(domain, t, (order_or_samples / 2).max(1));
            let err = (fine.weight_sum() - coarse.weight_sum()).abs();
            QuadratureRule {
                estimated_error: err,
                ..fine
            }
        }
        Scheme::QuasiMonteCarlo => quasi_monte_carlo(domain, t, order_or_samples, seed_value),
    };
    if rule.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(rule)
}

const SCAN_POINTS: usize = 24;
const BISECTIONS: usize = 50;

struct Sections<'a> {
    domain: &'a Domain,
    t: &'a [C64],
    axes: usize,
}

impl Sections<'_> {
    fn rho(&self, x: &[f64]) -> f64 {
        let z: Vec<C64> = x.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        self.domain.rho(&z, self.t)
    }

    fn scan_axis(&self, axis: usize) -> Vec<f64> {
        let (lo, hi) = self.domain.bounding_box()[axis];
        (0..=SCAN_POINTS)
            .map(|i| lo + (hi - lo) * i as f64 / SCAN_POINTS as f64)
            .collect()
    }

    /// Does the section through `prefix` (the first `prefix.len()` axes fixed)
    /// meet the domain?
    fn nonempty(&self, prefix: &mut Vec<f64>) -> bool {
        let axis = prefix.len();
        if axis == self.axes {
            return self.rho(prefix) < 0.0;
        }
        for x in self.scan_axis(axis) {
            prefix.push(x);
            let hit = self.nonempty(prefix);
            prefix.pop();
            if hit {
                return true;
            }
        }
        false
    }

    fn active(&self, prefix: &mut Vec<f64>, x: f64) -> bool {
        prefix.push(x);
        let hit = self.nonempty(prefix);
        prefix.pop();
        hit
    }

    /// Intervals of the next axis over which the section through `prefix` is
    /// nonempty, with endpoints refined by bisection.
    fn intervals(&self, prefix: &mut Vec<f64>) -> Vec<(f64, f64)> {
        let axis = prefix.len();
        let xs = self.scan_axis(axis);
        let flags: Vec<bool> = xs.iter().map(|&x| self.active(prefix, x)).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < xs.len() {
            if !flags[i] {
                i += 1;
                continue;
            }
            let mut j = i;
            while j + 1 < xs.len() && flags[j + 1] {
                j += 1;
            }
            let lo = if i == 0 {
                xs[0]
            } else {
                self.edge(prefix, xs[i - 1], xs[i])
            };
            let hi = if j + 1 == xs.len() {
                xs[j]
            } else {
                self.edge(prefix, xs[j + 1], xs[j])
            };
            out.push((lo, hi));
            i = j + 1;
        }
        out
    }

    /// Boundary between an inactive point `out` and an active point `inside`.
    fn edge(&self, prefix: &mut Vec<f64>, mut out: f64, mut inside: f64) -> f64 {
        for _ in 0..BISECTIONS {
            let mid = 0.5 * (out + inside);
            if self.active(prefix, mid) {
                inside = mid;
            } else {
                out = mid;
            }
        }
        0.5 * (out + inside)
    }

    fn collect(
        &self,
        order: usize,
        prefix: &mut Vec<f64>,
        weight: f64,
        nodes: &mut Vec<f64>,
        weights: &mut Vec<f64>,
    ) {
        if prefix.len() == self.axes {
            if self.rho(prefix) < 0.0 {
                nodes.extend_from_slice(prefix);
                weights.push(weight);
            }
            return;
        }
        for (lo, hi) in self.intervals(prefix) {
            for (x, w) in gauss_legendre_on(order, lo, hi) {
                prefix.push(x);
                self.collect(order, prefix, weight * w, nodes, weights);
                prefix.pop();
            }
        }
    }
}

fn tensor_gauss(domain: &Domain, t: &[C64], order: usize) -> QuadratureRule {
    let sections = Sections {
        domain,
        t,
        axes: 2 * domain.n(),
    };
    let (mut reals, mut weights) = (Vec::new(), Vec::new());
    sections.collect(order, &mut Vec::new(), 1.0, &mut reals, &mut weights);
    let nodes = reals.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
    QuadratureRule {
        n: domain.n(),
        nodes,
        weights,
        scheme: Scheme::TensorGauss,
        estimated_error: 0.0,
    }
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = u64::from(base);
    let inv = 1.0 / f64::from(base);
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    out
}

fn quasi_monte_carlo(
    domain: &Domain,
    t: &[C64],
    samples: usize,
    seed_value: u64,
) -> QuadratureRule {
    let m = 2 * domain.n();
    assert!(m <= PRIMES.len(), "quasi-Monte Carlo supports n <= 8");
    let mut rng = seed::rng(seed_value, "quasi-monte-carlo-shift");
    let shift: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let bbox = domain.bounding_box();
    let points: Vec<Option<Vec<C64>>> = exec::map(samples, |i| {
        let x: Vec<f64> = (0..m)
            .map(|a| {
                let u = (radical_inverse(i as u64 + 1, PRIMES[a]) + shift[a]).fract();
                bbox[a].0 + (bbox[a].1 - bbox[a].0) * u
            })
            .collect();
        let z: Vec<C64> = x.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
        domain.contains(&z, t).then_some(z)
    });
    let w = domain.box_volume() / samples as f64;
    let nodes: Vec<C64> = points.into_iter().flatten().flatten().collect();
    let count = nodes.len() / domain.n();
    let p = count as f64 / samples as f64;
    let err = domain.box_volume() * (p * (1.0 - p) / samples as f64).sqrt();
    QuadratureRule {
        n: domain.n(),
        nodes,
        weights: vec![w; count],
        scheme: Scheme::QuasiMonteCarlo,
        estimated_error: err,
    }
}

/// `sum_i w_i f(x_i)`, summed pairwise in node order.
pub fn integrate<F>(rule: &QuadratureRule, f: F) -> Result<C64>
where
    F: Fn(&[C64]) -> C64 + Sync + Send,
{
    let terms: Vec<C64> = exec::map(rule.len(), |i| rule.weights[i] * f(rule.node(i)));
    if let Some(index) = terms
        .iter()
        .position(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::NonFiniteIntegrand { index });
    }
    Ok(exec::pairwise_sum(&terms))
}

/// Real-valued variant of [`integrate`].
pub fn integrate_real<F>(rule: &QuadratureRule, f: F) -> Result<f64>
where
    F: Fn(&[C64]) -> f64 + Sync + Send,
{
    let terms: Vec<f64> = exec::map(rule.len(), |i| rule.weights[i] * f(rule.node(i)));
    if let Some(index) = terms.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteIntegrand { index });
    }
    Ok(exec::pairwise_sum(&terms))
}
