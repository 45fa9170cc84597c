//! Holomorphic families of weighted Bergman kernels over a parameter space.
//!
//! A [`FamilySpec`] fixes a fiber domain, a weight `phi(z, t)` and a basis
//! truncation. A [`KernelField`] evaluates `K(z, w, t)` for any parameter,
//! caching one Gram matrix per parameter value.

mod nakano;
mod psh;
mod thicken;

pub use nakano::{direct_image_gram, nakano_curvature, nakano_from_gram_fn, CurvatureReport};
pub use psh::levi_psh_verify;
pub use thicken::{thickened_rescaling, ConvergenceReport, ThickenConfig};

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::bergman::{self, monomial_basis, Basis, GramMatrix};
use crate::error::{Error, Result};
use crate::levi::{PshReport, SampleBox};
use crate::quadrature::{build_rule, Domain, QuadratureRule, Scheme};
use crate::weight::{check_psh_sample, PshSampleConfig, WeightExpr};
use crate::C64;

/// How fiber quadrature rules are built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub scheme: Scheme,
    pub order: usize,
    pub seed: u64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Polar,
            order: 32,
            seed: 0,
        }
    }
}

/// Default truncation degree for fiber dimension `n`.
pub fn default_d_max(n: usize) -> u32 {
    if n == 1 {
        20
    } else {
        8
    }
}

/// Fiber dimension `n`, parameter dimension `k`, weight, domain and basis
/// truncation of a family.
#[derive(Debug, Clone)]
pub struct FamilySpec {
    pub n: usize,
    pub k: usize,
    pub weight: WeightExpr,
    pub domain: Domain,
    pub d_max: u32,
    pub t_grid: Vec<Vec<C64>>,
    pub quadrature: QuadratureConfig,
}

impl FamilySpec {
    pub fn new(weight: WeightExpr, domain: Domain, k: usize) -> Result<Self> {
        let n = domain.n();
        let spec = Self {
            n,
            k,
            weight,
            domain,
            d_max: default_d_max(n),
            t_grid: Vec::new(),
            quadrature: QuadratureConfig::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_d_max(mut self, d_max: u32) -> Self {
        self.d_max = d_max;
        self
    }

    pub fn with_quadrature(mut self, q: QuadratureConfig) -> Self {
        self.quadrature = q;
        self
    }

    pub fn with_t_grid(mut self, t_grid: Vec<Vec<C64>>) -> Self {
        self.t_grid = t_grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.weight.check_bound(self.n, self.k)?;
        self.domain.defining_fn().check_bound(self.n, self.k)?;
        if self.quadrature.order == 0 {
            return Err(Error::invalid("quadrature order must be at least 1"));
        }
        if let Some(t) = self.t_grid.iter().find(|t| t.len() != self.k) {
            return Err(Error::invalid(format!(
                "t_grid point has {} coordinates, expected {}",
                t.len(),
                self.k
            )));
        }
        Ok(())
    }

    /// Fiber quadrature rule at parameter `t`.
    pub fn rule_at(&self, t: &[C64]) -> Result<QuadratureRule> {
        build_rule(
            &self.domain,
            t,
            self.quadrature.scheme,
            self.quadrature.order,
            self.quadrature.seed,
        )
    }

    /// Sampled plurisubharmonicity of the weight on `sample_box`, a box in
    /// `C^{n+k}` listing `z` before `t`.
    pub fn weight_precondition(
        &self,
        sample_box: &SampleBox,
        cfg: &PshSampleConfig,
    ) -> Result<PshReport> {
        check_psh_sample(&self.weight, sample_box, self.n, cfg)
    }
}

pub(crate) fn t_label(t: &[C64]) -> String {
    let parts: Vec<String> = t.iter().map(|v| format!("{}{:+}i", v.re, v.im)).collect();
    format!("({})", parts.join(", "))
}

type CacheKey = Vec<u64>;

fn key(t: &[C64]) -> CacheKey {
    t.iter()
        .flat_map(|v| [v.re.to_bits(), v.im.to_bits()])
        .collect()
}

/// Evaluator of `K(z, w, t)` with a per-parameter Gram cache.
#[derive(Debug)]
pub struct KernelField {
    spec: FamilySpec,
    basis: Arc<dyn Basis>,
    fixed_rule: Option<Arc<QuadratureRule>>,
    cache: RwLock<HashMap<CacheKey, Arc<GramMatrix>>>,
}

/// Kernel field of `spec` over monomials of degree at most `spec.d_max`.
pub fn kernel_field(spec: FamilySpec) -> Result<KernelField> {
    let basis = monomial_basis(spec.n, spec.d_max);
    KernelField::with_basis(spec, Arc::new(basis))
}

impl KernelField {
    pub fn with_basis(spec: FamilySpec, basis: Arc<dyn Basis>) -> Result<Self> {
        spec.validate()?;
        if basis.n() != spec.n {
            return Err(Error::invalid(
                "basis dimension differs from the fiber dimension",
            ));
        }
        let fixed_rule = if spec.domain.depends_on_t() {
            None
        } else {
            Some(Arc::new(spec.rule_at(&[])?))
        };
        let field = Self {
            spec,
            basis,
            fixed_rule,
            cache: RwLock::new(HashMap::new()),
        };
        let grid = field.spec.t_grid.clone();
        crate::exec::map(grid.len(), |i| field.gram(&grid[i]).map(|_| ()))
            .into_iter()
            .collect::<Result<Vec<()>>>()?;
        Ok(field)
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    pub fn basis(&self) -> &dyn Basis {
        self.basis.as_ref()
    }

    /// Fiber rule at `t` (shared when the domain does not depend on `t`).
    pub fn rule(&self, t: &[C64]) -> Result<Arc<QuadratureRule>> {
        match &self.fixed_rule {
            Some(r) => Ok(r.clone()),
            None => Ok(Arc::new(self.spec.rule_at(t)?)),
        }
    }

    /// Gram matrix at `t`, computed on first use.
    pub fn gram(&self, t: &[C64]) -> Result<Arc<GramMatrix>> {
        if t.len() != self.spec.k {
            return Err(Error::invalid(format!(
                "parameter has {} coordinates, expected {}",
                t.len(),
                self.spec.k
            )));
        }
        let k = key(t);
        if let Some(g) = self.cache.read().expect("cache lock").get(&k) {
            return Ok(g.clone());
        }
        let rule = self.rule(t)?;
        let g = bergman::compute_gram(self.basis.as_ref(), &rule, &self.spec.weight, t).map_err(
            |e| match e {
                Error::DegenerateGram { .. } => Error::DegenerateGram {
                    context: format!(" at t = {}", t_label(t)),
                },
                other => other,
            },
        )?;
        let g = Arc::new(g);
        Ok(self
            .cache
            .write()
            .expect("cache lock")
            .entry(k)
            .or_insert(g)
            .clone())
    }

    pub fn cached_parameters(&self) -> usize {
        self.cache.read().expect("cache lock").len()
    }

    pub fn kernel(&self, z: &[C64], w: &[C64], t: &[C64]) -> Result<C64> {
        bergman::kernel_eval(self.basis.as_ref(), &*self.gram(t)?, z, w)
    }

    pub fn diag(&self, z: &[C64], t: &[C64]) -> Result<f64> {
        bergman::kernel_diag(self.basis.as_ref(), &*self.gram(t)?, z)
    }

    /// `log K(z, z, t)` at the point `(z, t)` given as one slice.
    pub fn log_diag_at(&self, point: &[C64]) -> Result<f64> {
        let (z, t) = point.split_at(self.spec.n);
        Ok(self.diag(z, t)?.ln())
    }
}
