use nalgebra::{DMatrix, DVector};

use super::Basis;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::weight::WeightExpr;
use crate::{exec, C64};

/// Relative eigenvalue floor, applied after unit-diagonal scaling.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Hermitian Gram matrix with its eigendecomposition.
///
/// With `D = diag(G)` the factorization is `D^{-1/2} G D^{-1/2} = V L V^H`.
/// Eigenvalues below `EIGEN_FLOOR * max(L)` are raised to the floor and the
/// stored entries are rebuilt from the floored spectrum.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: DMatrix<C64>,
    basis_id: String,
    floored: bool,
    condition_estimate: f64,
    inv_sqrt_diag: Vec<f64>,
    vectors: DMatrix<C64>,
    values: Vec<f64>,
}

impl GramMatrix {
    /// Symmetrize, scale, factor and floor `raw`.
    pub fn from_entries(raw: DMatrix<C64>, basis_id: impl Into<String>) -> Result<Self> {
        let basis_id = basis_id.into();
        let n = raw.nrows();
        if raw.ncols() != n {
            return Err(Error::invalid("Gram matrix must be square"));
        }
        if raw.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Factorization(format!(
                "non-finite Gram entry ({basis_id})"
            )));
        }
        if n == 0 {
            return Ok(Self {
                entries: raw,
                basis_id,
                floored: false,
                condition_estimate: 1.0,
                inv_sqrt_diag: Vec::new(),
                vectors: DMatrix::zeros(0, 0),
                values: Vec::new(),
            });
        }
        let sym = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
        let inv_sqrt_diag: Vec<f64> = (0..n)
            .map(|i| {
                if sym[(i, i)].re > 0.0 {
                    1.0 / sym[(i, i)].re.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let scaled = DMatrix::from_fn(n, n, |i, j| {
            sym[(i, j)] * (inv_sqrt_diag[i] * inv_sqrt_diag[j])
        });
        let eig = scaled.symmetric_eigen();
        let max = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(Error::DegenerateGram {
                context: format!(" ({basis_id})"),
            });
        }
        let floor = EIGEN_FLOOR * max;
        let floored = eig.eigenvalues.iter().any(|&l| l < floor);
        let values: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(floor)).collect();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let vectors = eig.eigenvectors;
        let entries = if floored {
            let l = DMatrix::from_diagonal(&DVector::from_iterator(
                n,
                values.iter().map(|&v| C64::new(v, 0.0)),
            ));
            let rebuilt = &vectors * l * vectors.adjoint();
            DMatrix::from_fn(n, n, |i, j| {
                rebuilt[(i, j)] / (inv_sqrt_diag[i] * inv_sqrt_diag[j])
            })
        } else {
            sym
        };
        Ok(Self {
            entries,
            basis_id,
            floored,
            condition_estimate: max / min,
            inv_sqrt_diag,
            vectors,
            values,
        })
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn regularization_floor_applied(&self) -> bool {
        self.floored
    }

    /// Condition number of the diagonally scaled matrix.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// `L^{-1/2} V^H D^{-1/2} b`, whose squared norm is `b^H G^{-1} b`.
    pub fn whiten(&self, b: &[C64]) -> DVector<C64> {
        let s = DVector::from_iterator(
            b.len(),
            b.iter().zip(&self.inv_sqrt_diag).map(|(v, d)| v * *d),
        );
        let mut y = self.vectors.adjoint() * s;
        for (v, l) in y.iter_mut().zip(&self.values) {
            *v /= l.sqrt();
        }
        y
    }

    /// Solve `G x = b`.
    pub fn solve(&self, b: &[C64]) -> DVector<C64> {
        let mut y = self.whiten(b);
        for (v, l) in y.iter_mut().zip(&self.values) {
            *v /= l.sqrt();
        }
        let mut x = &self.vectors * y;
        for (v, d) in x.iter_mut().zip(&self.inv_sqrt_diag) {
            *v *= *d;
        }
        x
    }

    /// `sum_ij a_i conj(b_j) G_ij`.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        let bc = DVector::from_iterator(b.len(), b.iter().map(|v| v.conj()));
        let gb = &self.entries * bc;
        a.iter().zip(gb.iter()).map(|(x, y)| x * y).sum()
    }
}

/// Gram matrix of `basis` against `weight(x) * e^{-phi(x, t)}` on `rule`.
pub fn compute_gram<B: Basis + ?Sized>(
    basis: &B,
    rule: &QuadratureRule,
    weight: &WeightExpr,
    t: &[C64],
) -> Result<GramMatrix> {
    weight.check_bound(basis.n(), t.len())?;
    gram_with_density(basis, rule, |x| (-weight.eval_bound(x, t)).exp())
}

/// Gram matrix of `basis` against `density(x) dV` on `rule`.
pub fn gram_with_density<B, F>(basis: &B, rule: &QuadratureRule, density: F) -> Result<GramMatrix>
where
    B: Basis + ?Sized,
    F: Fn(&[C64]) -> f64 + Sync,
{
    gram_with_node_density(basis, rule, |i| density(rule.node(i)))
}

/// Gram matrix with the density given per node index of `rule`.
pub fn gram_with_node_density<B, F>(
    basis: &B,
    rule: &QuadratureRule,
    density: F,
) -> Result<GramMatrix>
where
    B: Basis + ?Sized,
    F: Fn(usize) -> f64 + Sync,
{
    if rule.n() != basis.n() {
        return Err(Error::invalid(format!(
            "rule has dimension {} but the basis has dimension {}",
            rule.n(),
            basis.n()
        )));
    }
    let m = basis.len();
    let leaf = |r: std::ops::Range<usize>| -> Result<DMatrix<C64>> {
        let mut rows = DMatrix::<C64>::zeros(r.len(), m);
        let mut e = vec![C64::new(0.0, 0.0); m];
        for (k, i) in r.enumerate() {
            let s = rule.weights()[i] * density(i);
            if !s.is_finite() || s < 0.0 {
                return Err(Error::NonFiniteIntegrand { index: i });
            }
            basis.eval_into(rule.node(i), &mut e);
            let sq = s.sqrt();
            for (j, v) in e.iter().enumerate() {
                rows[(k, j)] = v * sq;
            }
        }
        Ok(rows.transpose() * rows.map(|v| v.conj()))
    };
    let combine = |a: Result<DMatrix<C64>>, b: Result<DMatrix<C64>>| Ok(a? + b?);
    let raw =
        exec::tree_fold(rule.len(), &leaf, &combine).unwrap_or_else(|| Ok(DMatrix::zeros(m, m)))?;
    GramMatrix::from_entries(raw, basis.id())
}
