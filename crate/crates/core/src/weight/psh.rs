use super::WeightExpr;
use crate::error::{Error, Result};
use crate::levi::{self, LeviConfig, PshReport, SampleBox};
use crate::C64;

/// Probes whose nearest log pole is closer than this many finite-difference
/// steps are skipped; the stencil and the sub-mean circles reach about two.
const POLE_MARGIN_STEPS: f64 = 4.0;

/// Parameters of [`check_psh_sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct PshSampleConfig {
    /// Lattice points per real axis.
    pub grid: usize,
    pub fd_step: f64,
    pub tol: f64,
    pub directions: usize,
    pub seed: u64,
}

impl Default for PshSampleConfig {
    fn default() -> Self {
        Self {
            grid: 5,
            fd_step: 1e-3,
            tol: 1e-4,
            directions: 8,
            seed: 0,
        }
    }
}

impl PshSampleConfig {
    pub(crate) fn levi(&self) -> LeviConfig {
        LeviConfig {
            fd_step: self.fd_step,
            tol: self.tol,
            directions: self.directions,
            seed: self.seed,
            ..LeviConfig::default()
        }
    }
}

/// Sample the Levi form of `expr` on a lattice over `sample_box`, a box in
/// `C^{n+k}` whose first `n` complex coordinates are the `z` variables.
pub fn check_psh_sample(
    expr: &WeightExpr,
    sample_box: &SampleBox,
    n: usize,
    cfg: &PshSampleConfig,
) -> Result<PshReport> {
    let d = sample_box.complex_dim();
    if n > d {
        return Err(Error::invalid(format!(
            "fiber dimension {n} exceeds box dimension {d}"
        )));
    }
    expr.check_bound(n, d - n)?;
    let probes = sample_box.lattice(cfg.grid)?;
    let f = |w: &[C64]| -> Result<f64> { Ok(expr.eval_bound(&w[..n], &w[n..])) };
    let margin = (POLE_MARGIN_STEPS * cfg.fd_step).powi(2);
    let skip = |w: &[C64]| expr.min_log_argument(&w[..n], &w[n..]) < margin;
    levi::sample(&f, &probes, &cfg.levi(), &skip)
}
