//! Minimal L2 extension from a slice `{z_n = c}` and the extension budgets.
//!
//! An `n`-form `G dz_1 ^ ... ^ dz_n` extends `g dz_1 ^ ... ^ dz_{n-1}` from
//! `Y = {s = 0}`, `s = z_n - c`, when `G(z', c) = g(z')`. The extension norm is
//! `int_D e^{-psi} (1 + |s|^2)^{-2} |G|^2 dV` and the slice norm is
//! `int_Y e^{-psi} |g|^2 dV` (a point value when `n = 1`). Both use Lebesgue
//! measure without the `c_n` form normalization.

use std::f64::consts::PI;

use crate::bergman::{
    gram_with_density, min_norm_element, monomial_basis, norm_sq, Basis, Functional, MonomialBasis,
};
use crate::error::{Error, Result};
use crate::family::QuadratureConfig;
use crate::levi::Verdict;
use crate::quadrature::{build_rule, gauss_legendre_on, integrate_real, Domain, Scheme};
use crate::weight::WeightExpr;
use crate::C64;

/// Bisection steps used to find the real diameter of the slice.
const DIAMETER_BISECTIONS: usize = 60;
const DIAMETER_SCAN: usize = 64;
/// Largest collocation mismatch accepted as an exact restriction.
pub const RESTRICTION_TOL: f64 = 1e-8;

/// Budget constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    /// `1620 pi` for weights `psi` with the `(1 + |s|^2)^{-2}` factor.
    Uniform,
    /// `(2^4 pi^{1/2})^2 = 256 pi`, the squared interpolation-operator bound.
    PshOperator,
}

impl BudgetKind {
    pub fn value(self) -> f64 {
        match self {
            BudgetKind::Uniform => 1620.0 * PI,
            BudgetKind::PshOperator => 256.0 * PI,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BudgetKind::Uniform => "1620pi",
            BudgetKind::PshOperator => "256pi",
        }
    }
}

/// Extension of slice data `g` from `{z_n = c}` in `domain`.
#[derive(Debug, Clone)]
pub struct ExtensionProblem {
    pub id: String,
    pub domain: Domain,
    pub c: C64,
    pub psi: WeightExpr,
    /// Coefficients of `g` in [`ExtensionProblem::slice_basis`].
    pub g_coeffs: Vec<C64>,
    pub d_max: u32,
    pub quadrature: QuadratureConfig,
}

impl ExtensionProblem {
    pub fn n(&self) -> usize {
        self.domain.n()
    }

    /// Monomials in `z_1..z_{n-1}` of degree at most `d_max`; the constants
    /// when `n = 1`.
    pub fn slice_basis(&self) -> MonomialBasis {
        match self.n() {
            1 => monomial_basis(1, 0),
            n => monomial_basis(n - 1, self.d_max),
        }
    }

    /// Monomials in `z_1..z_n` of degree at most `d_max`.
    pub fn ambient_basis(&self) -> MonomialBasis {
        monomial_basis(self.n(), self.d_max)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n()) {
            return Err(Error::invalid(
                "only n = 1 (point slice) and n = 2 (line slice) are supported",
            ));
        }
        if self.domain.depends_on_t() {
            return Err(Error::invalid("the extension domain may not depend on t"));
        }
        self.psi.check_bound(self.n(), 0)?;
        if self.g_coeffs.len() != self.slice_basis().len() {
            return Err(Error::invalid(format!(
                "g has {} coefficients, the slice basis has {}",
                self.g_coeffs.len(),
                self.slice_basis().len()
            )));
        }
        Ok(())
    }

    /// `g(z')`.
    pub fn g(&self, zp: &[C64]) -> C64 {
        let e = if self.n() == 1 {
            vec![C64::new(1.0, 0.0)]
        } else {
            self.slice_basis().eval(zp)
        };
        e.iter().zip(&self.g_coeffs).map(|(a, b)| a * b).sum()
    }

    fn full_point(&self, zp: &[C64]) -> Vec<C64> {
        let mut z = zp.to_vec();
        z.push(self.c);
        z
    }

    /// Collocation points on the slice: Gauss points of its real diameter
    /// through the origin of `z_1`, as many as the slice basis has elements.
    pub fn collocation_points(&self) -> Result<Vec<Vec<C64>>> {
        if self.n() == 1 {
            return Ok(vec![Vec::new()]);
        }
        let (lo, hi) = self.real_diameter()?;
        Ok(gauss_legendre_on(self.slice_basis().len(), lo, hi)
            .into_iter()
            .map(|(x, _)| vec![C64::new(x, 0.0)])
            .collect())
    }

    fn real_diameter(&self) -> Result<(f64, f64)> {
        let inside = |x: f64| {
            self.domain
                .contains(&self.full_point(&[C64::new(x, 0.0)]), &[])
        };
        let (a, b) = self.domain.bounding_box()[0];
        let xs: Vec<f64> = (0..=DIAMETER_SCAN)
            .map(|i| a + (b - a) * i as f64 / DIAMETER_SCAN as f64)
            .collect();
        let Some(first) = xs.iter().position(|&x| inside(x)) else {
            return Err(Error::EmptyDomain);
        };
        let mut last = first;
        while last + 1 < xs.len() && inside(xs[last + 1]) {
            last += 1;
        }
        let edge = |mut out: f64, mut inn: f64| {
            for _ in 0..DIAMETER_BISECTIONS {
                let mid = 0.5 * (out + inn);
                if inside(mid) {
                    inn = mid;
                } else {
                    out = mid;
                }
            }
            inn
        };
        let lo = if first == 0 {
            xs[0]
        } else {
            edge(xs[first - 1], xs[first])
        };
        let hi = if last + 1 == xs.len() {
            xs[last]
        } else {
            edge(xs[last + 1], xs[last])
        };
        Ok((lo, hi))
    }

    /// `e^{-psi} (1 + |s|^2)^{-2}` at `z`.
    fn ambient_density(&self, z: &[C64]) -> f64 {
        let s = (z[self.n() - 1] - self.c).norm_sqr();
        (-self.psi.eval_bound(z, &[])).exp() / (1.0 + s).powi(2)
    }
}

/// Coefficients of `G` in the ambient basis.
#[derive(Debug, Clone)]
pub struct Extension {
    pub coeffs: Vec<C64>,
    pub collocation_residual: f64,
}

/// Norm-minimal truncated extension matching `g` at the collocation points.
pub fn minimal_extension(problem: &ExtensionProblem, basis: &MonomialBasis) -> Result<Extension> {
    problem.validate()?;
    if basis.n() != problem.n() {
        return Err(Error::invalid(
            "ambient basis dimension differs from the domain",
        ));
    }
    let rule = build_rule(
        &problem.domain,
        &[],
        problem.quadrature.scheme,
        problem.quadrature.order,
        problem.quadrature.seed,
    )?;
    let gram = gram_with_density(basis, &rule, |z| problem.ambient_density(z))?;
    let constraints: Vec<(Functional, C64)> = problem
        .collocation_points()?
        .into_iter()
        .map(|zp| (Functional::Point(problem.full_point(&zp)), problem.g(&zp)))
        .collect();
    let coeffs = min_norm_element(basis, &gram, &constraints).map_err(|e| match e {
        Error::RankDeficient { .. } | Error::Infeasible { .. } => Error::invalid(format!(
            "g is not representable at d_max = {} ({e})",
            problem.d_max
        )),
        other => other,
    })?;
    let collocation_residual = constraints
        .iter()
        .map(|(f, target)| {
            let row = f.row(basis).expect("dimension checked");
            (row.iter().zip(&coeffs).map(|(a, b)| a * b).sum::<C64>() - target).norm()
        })
        .fold(0.0, f64::max);
    Ok(Extension {
        coeffs,
        collocation_residual,
    })
}

/// Norms, ratio and verdict of one extension.
#[derive(Debug, Clone)]
pub struct BudgetReport {
    pub problem_id: String,
    pub extension_norm: f64,
    pub slice_norm: f64,
    pub ratio: f64,
    pub budget: f64,
    pub budget_kind: BudgetKind,
    /// Norm of the extension constant in `z_n`, `G(z) = g(z')`.
    pub naive_norm: f64,
    /// Largest `|G(z', c) - g(z')|` over slice quadrature nodes.
    pub restriction_residual: f64,
    pub verdict: Verdict,
}

/// Integrate both norms and compare the ratio with `budget`.
pub fn budget_check(
    problem: &ExtensionProblem,
    ext: &Extension,
    budget: BudgetKind,
) -> Result<BudgetReport> {
    problem.validate()?;
    let basis = problem.ambient_basis();
    if ext.coeffs.len() != basis.len() {
        return Err(Error::invalid(
            "extension coefficients do not match the ambient basis",
        ));
    }
    let q = problem.quadrature;
    let rule = build_rule(&problem.domain, &[], q.scheme, q.order, q.seed)?;
    let gram = gram_with_density(&basis, &rule, |z| problem.ambient_density(z))?;
    let extension_norm = norm_sq(&gram, &ext.coeffs);
    let naive = naive_coeffs(problem, &basis);
    let naive_norm = norm_sq(&gram, &naive);
    let g_at = |z: &[C64]| -> C64 {
        basis
            .eval(z)
            .iter()
            .zip(&ext.coeffs)
            .map(|(a, b)| a * b)
            .sum()
    };

    let (slice_norm, restriction_residual) = if problem.n() == 1 {
        let z = problem.full_point(&[]);
        let g = problem.g(&[]);
        (
            (-problem.psi.eval_bound(&z, &[])).exp() * g.norm_sqr(),
            (g_at(&z) - g).norm(),
        )
    } else {
        let slice = problem.domain.slice_last(problem.c)?;
        let scheme = if matches!(slice.shape(), crate::quadrature::Shape::Polydisk { .. }) {
            q.scheme
        } else {
            Scheme::TensorGauss
        };
        let srule = build_rule(&slice, &[], scheme, q.order, q.seed)?;
        let norm = integrate_real(&srule, |zp| {
            let z = problem.full_point(zp);
            (-problem.psi.eval_bound(&z, &[])).exp() * problem.g(zp).norm_sqr()
        })?;
        let resid = (0..srule.len())
            .map(|i| {
                let zp = srule.node(i);
                (g_at(&problem.full_point(zp)) - problem.g(zp)).norm()
            })
            .fold(0.0, f64::max);
        (norm, resid)
    };
    let g_zero = problem.g_coeffs.iter().all(|c| c.norm() == 0.0);
    let ratio = if g_zero {
        0.0
    } else if slice_norm > 0.0 {
        extension_norm / slice_norm
    } else {
        return Err(Error::invalid(format!(
            "slice norm vanished for nonzero g in problem {}",
            problem.id
        )));
    };
    let budget_value = budget.value();
    Ok(BudgetReport {
        problem_id: problem.id.clone(),
        extension_norm,
        slice_norm,
        ratio,
        budget: budget_value,
        budget_kind: budget,
        naive_norm,
        restriction_residual,
        verdict: Verdict::from_bool(
            ratio <= budget_value && restriction_residual <= RESTRICTION_TOL,
        ),
    })
}

/// `G(z) = g(z')` written in the ambient basis.
fn naive_coeffs(problem: &ExtensionProblem, basis: &MonomialBasis) -> Vec<C64> {
    let n = problem.n();
    let slice = problem.slice_basis();
    let mut out = vec![C64::new(0.0, 0.0); basis.len()];
    for (k, a) in slice.multi_indices().iter().enumerate() {
        let target: Vec<u32> = if n == 1 {
            vec![0]
        } else {
            a.iter().copied().chain(std::iter::once(0)).collect()
        };
        if let Some(i) = basis.multi_indices().iter().position(|b| *b == target) {
            out[i] = problem.g_coeffs[k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bidisk(psi: &str, g: Vec<C64>, d_max: u32) -> ExtensionProblem {
        ExtensionProblem {
            id: "bidisk".into(),
            domain: Domain::polydisk(vec![C64::new(0.0, 0.0); 2], vec![1.0, 1.0]).unwrap(),
            c: C64::new(0.0, 0.0),
            psi: psi.parse().unwrap(),
            g_coeffs: g,
            d_max,
            quadrature: QuadratureConfig {
                scheme: Scheme::Polar,
                order: 16,
                seed: 0,
            },
        }
    }

    fn unit(len: usize, k: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); len];
        v[k] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn constant_data_extends_by_a_constant() {
        let p = bidisk("0", unit(5, 0), 4);
        let ext = minimal_extension(&p, &p.ambient_basis()).unwrap();
        assert!((ext.coeffs[0] - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!(ext.coeffs[1..].iter().all(|c| c.norm() < 1e-10));
        let r = budget_check(&p, &ext, BudgetKind::Uniform).unwrap();
        assert!((r.extension_norm - PI * PI / 2.0).abs() < 1e-10);
        assert!((r.slice_norm - PI).abs() < 1e-12);
        assert!((r.ratio - PI / 2.0).abs() < 1e-3);
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.restriction_residual <= RESTRICTION_TOL);
    }

    #[test]
    fn linear_data_extends_by_itself() {
        let p = bidisk("0", unit(5, 1), 4);
        let basis = p.ambient_basis();
        let ext = minimal_extension(&p, &basis).unwrap();
        for (i, c) in ext.coeffs.iter().enumerate() {
            let expect = if basis.multi_indices()[i] == [1, 0] {
                1.0
            } else {
                0.0
            };
            assert!((c - C64::new(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let p = bidisk("abs2(z1)", vec![C64::new(0.0, 0.0); 5], 4);
        let ext = minimal_extension(&p, &p.ambient_basis()).unwrap();
        assert!(ext.coeffs.iter().all(|c| c.norm() == 0.0));
        let r = budget_check(&p, &ext, BudgetKind::Uniform).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn weighted_extension_beats_the_naive_one() {
        let p = ExtensionProblem {
            c: C64::new(0.3, -0.2),
            ..bidisk("abs2(z1) + abs2(z2 + 0.5)", unit(5, 1), 4)
        };
        let ext = minimal_extension(&p, &p.ambient_basis()).unwrap();
        let r = budget_check(&p, &ext, BudgetKind::PshOperator).unwrap();
        assert!(r.extension_norm <= r.naive_norm * (1.0 + 1e-12));
        assert!(r.restriction_residual <= RESTRICTION_TOL);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn point_slice_in_one_variable() {
        let p = ExtensionProblem {
            id: "point".into(),
            domain: Domain::unit_disk(),
            c: C64::new(0.0, 0.0),
            psi: WeightExpr::zero(),
            g_coeffs: vec![C64::new(1.0, 0.0)],
            d_max: 6,
            quadrature: QuadratureConfig {
                scheme: Scheme::Polar,
                order: 12,
                seed: 0,
            },
        };
        let ext = minimal_extension(&p, &p.ambient_basis()).unwrap();
        let r = budget_check(&p, &ext, BudgetKind::Uniform).unwrap();
        assert!((r.ratio - PI / 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn general_slice_domain() {
        let rho: WeightExpr = "abs2(z1) + abs2(z2) - 1".parse().unwrap();
        let ball = Domain::new(2, rho, vec![(-1.0, 1.0); 4]).unwrap();
        let p = ExtensionProblem {
            domain: ball,
            quadrature: QuadratureConfig {
                scheme: Scheme::TensorGauss,
                order: 12,
                seed: 0,
            },
            ..bidisk("0", unit(4, 0), 3)
        };
        let ext = minimal_extension(&p, &p.ambient_basis()).unwrap();
        let r = budget_check(&p, &ext, BudgetKind::Uniform).unwrap();
        assert!(r.restriction_residual <= RESTRICTION_TOL);
        assert_eq!(r.verdict, Verdict::Pass);
    }
}
