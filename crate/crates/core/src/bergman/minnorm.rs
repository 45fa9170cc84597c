use nalgebra::{DMatrix, DVector};

use super::{Basis, GramMatrix};
use crate::error::{Error, Result};
use crate::C64;

/// Linear functional on the span of a basis.
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    /// `f -> f(z)`.
    Point(Vec<C64>),
    /// `f -> d^alpha f(z)`.
    Derivative { at: Vec<C64>, order: Vec<u32> },
}

impl Functional {
    /// Row `a` with `L(sum_i c_i e_i) = sum_i a_i c_i`.
    pub fn row<B: Basis + ?Sized>(&self, basis: &B) -> Result<Vec<C64>> {
        let (at, order) = match self {
            Functional::Point(z) => (z, None),
            Functional::Derivative { at, order } => (at, Some(order)),
        };
        if at.len() != basis.n() || order.is_some_and(|o| o.len() != basis.n()) {
            return Err(Error::invalid(
                "functional dimension differs from the basis",
            ));
        }
        Ok(match order {
            None => basis.eval(at),
            Some(o) => basis.derivative(at, o),
        })
    }
}

/// `||f||^2 = sum_ij c_i conj(c_j) G_ij`.
pub fn norm_sq(gram: &GramMatrix, coeffs: &[C64]) -> f64 {
    gram.inner(coeffs, coeffs).re
}

const RANK_TOL: f64 = 1e-12;
const FEASIBILITY_TOL: f64 = 1e-8;

/// Coefficients of the norm-minimal `f` with `L_k(f) = b_k` for all constraints.
///
/// With `M = conj(G)` the norm is `c^H M c`, so the minimizer is
/// `c = M^{-1} A^H (A M^{-1} A^H)^{-1} b`.
pub fn min_norm_element<B: Basis + ?Sized>(
    basis: &B,
    gram: &GramMatrix,
    constraints: &[(Functional, C64)],
) -> Result<Vec<C64>> {
    let m = basis.len();
    if gram.dim() != m {
        return Err(Error::invalid(
            "Gram matrix size differs from the basis size",
        ));
    }
    if constraints.is_empty() {
        return Ok(vec![C64::new(0.0, 0.0); m]);
    }
    let rows = constraints
        .iter()
        .map(|(f, _)| f.row(basis))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<C64> = constraints.iter().map(|(_, b)| *b).collect();
    let k = rows.len();
    // u_k = M^{-1} a_k^H = conj(G^{-1} a_k^T)
    let u: Vec<DVector<C64>> = rows
        .iter()
        .map(|a| gram.solve(a).map(|v| v.conj()))
        .collect();
    let s = DMatrix::from_fn(k, k, |l, j| {
        rows[l]
            .iter()
            .zip(u[j].iter())
            .map(|(a, b)| a * b)
            .sum::<C64>()
    });
    let s = (&s + s.adjoint()) * C64::new(0.5, 0.0);
    let eig = s.clone().symmetric_eigen();
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let ratio = if max > 0.0 { min / max } else { 0.0 };
    if !(ratio > RANK_TOL) {
        return Err(Error::RankDeficient { ratio });
    }
    let b = DVector::from_vec(targets.clone());
    let y = eig.eigenvectors.adjoint() * b;
    let y = DVector::from_iterator(k, y.iter().zip(eig.eigenvalues.iter()).map(|(v, l)| v / *l));
    let y = &eig.eigenvectors * y;
    let mut c = DVector::<C64>::zeros(m);
    for (uk, yk) in u.iter().zip(y.iter()) {
        c += uk * *yk;
    }
    let scale = 1.0 + targets.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let residual = rows
        .iter()
        .zip(&targets)
        .map(|(a, t)| (a.iter().zip(c.iter()).map(|(x, y)| x * y).sum::<C64>() - t).norm())
        .fold(0.0, f64::max);
    if residual > FEASIBILITY_TOL * scale {
        return Err(Error::Infeasible { residual });
    }
    Ok(c.iter().copied().collect())
}
