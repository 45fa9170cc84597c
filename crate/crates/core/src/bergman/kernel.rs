use super::{Basis, GramMatrix};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureRule};
use crate::weight::WeightExpr;
use crate::C64;

fn point_label(z: &[C64]) -> String {
    let parts: Vec<String> = z.iter().map(|v| format!("{}{:+}i", v.re, v.im)).collect();
    format!("({})", parts.join(", "))
}

fn checked_eval<B: Basis + ?Sized>(basis: &B, gram: &GramMatrix, z: &[C64]) -> Result<Vec<C64>> {
    if z.len() != basis.n() {
        return Err(Error::invalid(format!(
            "point has {} coordinates, basis expects {}",
            z.len(),
            basis.n()
        )));
    }
    if gram.dim() != basis.len() {
        return Err(Error::invalid(format!(
            "Gram matrix is {0}x{0} but the basis has {1} elements",
            gram.dim(),
            basis.len()
        )));
    }
    let e = basis.eval(z);
    if e.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::KernelEvaluation {
            point: point_label(z),
            reason: "non-finite basis value".into(),
        });
    }
    Ok(e)
}

/// `K(z, w) = e(w)^H G^{-1} e(z)`; holomorphic in `z`, antiholomorphic in `w`.
pub fn kernel_eval<B: Basis + ?Sized>(
    basis: &B,
    gram: &GramMatrix,
    z: &[C64],
    w: &[C64],
) -> Result<C64> {
    let ez = checked_eval(basis, gram, z)?;
    let ew = checked_eval(basis, gram, w)?;
    let x = gram.solve(&ez);
    Ok(ew.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum())
}

/// `K(z, z)` through the whitened basis vector.
pub fn kernel_diag<B: Basis + ?Sized>(basis: &B, gram: &GramMatrix, z: &[C64]) -> Result<f64> {
    let e = checked_eval(basis, gram, z)?;
    Ok(gram.whiten(&e).norm_squared())
}

/// `K(z, z)` as the Rayleigh quotient `|f(z)|^2 / ||f||^2` of its maximizer
/// `f = sum_i c_i e_i` with `c = conj(G^{-1} e(z))`.
pub fn kernel_diag_rayleigh<B: Basis + ?Sized>(
    basis: &B,
    gram: &GramMatrix,
    z: &[C64],
) -> Result<f64> {
    let e = checked_eval(basis, gram, z)?;
    if e.is_empty() {
        return Ok(0.0);
    }
    let c: Vec<C64> = gram.solve(&e).iter().map(|v| v.conj()).collect();
    let value: C64 = c.iter().zip(&e).map(|(a, b)| a * b).sum();
    let norm = gram.inner(&c, &c).re;
    if norm <= 0.0 {
        return Ok(0.0);
    }
    Ok(value.norm_sqr() / norm)
}

/// `|int K(z, x) f(x) e^{-phi(x, t)} dV(x) - f(z)|` for `f = sum_i c_i e_i`.
#[allow(clippy::too_many_arguments)]
pub fn reproducing_check<B: Basis + ?Sized>(
    basis: &B,
    gram: &GramMatrix,
    rule: &QuadratureRule,
    weight: &WeightExpr,
    t: &[C64],
    coeffs: &[C64],
    z: &[C64],
) -> Result<f64> {
    if coeffs.len() != basis.len() {
        return Err(Error::invalid(
            "coefficient vector length differs from the basis size",
        ));
    }
    weight.check_bound(basis.n(), t.len())?;
    let ez = checked_eval(basis, gram, z)?;
    let x = gram.solve(&ez);
    let f = |e: &[C64]| -> C64 { coeffs.iter().zip(e).map(|(c, v)| c * v).sum() };
    let integral = integrate(rule, |p| {
        let e = basis.eval(p);
        let k: C64 = e.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
        k * f(&e) * (-weight.eval_bound(p, t)).exp()
    })?;
    Ok((integral - f(&ez)).norm())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::bergman::{compute_gram, monomial_basis, MonomialBasis};
    use crate::quadrature::{build_rule, Domain, Scheme};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn disk(d: u32) -> (MonomialBasis, GramMatrix, QuadratureRule) {
        let b = monomial_basis(1, d);
        let rule = build_rule(&Domain::unit_disk(), &[], Scheme::Polar, d as usize + 4, 0).unwrap();
        let g = compute_gram(&b, &rule, &WeightExpr::zero(), &[]).unwrap();
        (b, g, rule)
    }

    #[test]
    fn disk_kernel_values() {
        let (b, g, _) = disk(10);
        assert!((kernel_diag(&b, &g, &[c(0.0)]).unwrap() - 1.0 / PI).abs() < 1e-6);
        assert!((kernel_eval(&b, &g, &[c(0.5)], &[c(0.0)]).unwrap() - c(1.0 / PI)).norm() < 1e-6);
        let (b, g, _) = disk(30);
        let k = kernel_diag(&b, &g, &[c(0.5)]).unwrap();
        assert!((k - 1.0 / (PI * 0.75 * 0.75)).abs() < 1e-4, "{k}");
    }

    #[test]
    fn fock_kernel_at_one() {
        let b = monomial_basis(1, 20);
        let rule = build_rule(&Domain::disk(6.0).unwrap(), &[], Scheme::Polar, 48, 0).unwrap();
        let g = compute_gram(&b, &rule, &"abs2(z1)".parse().unwrap(), &[]).unwrap();
        let k = kernel_diag(&b, &g, &[c(1.0)]).unwrap();
        assert!((k - std::f64::consts::E / PI).abs() < 1e-3, "{k}");
    }

    #[test]
    fn empty_basis_kernel_is_zero() {
        let b = MonomialBasis::empty(1);
        let g = GramMatrix::from_entries(nalgebra::DMatrix::zeros(0, 0), "empty").unwrap();
        assert_eq!(kernel_diag(&b, &g, &[c(0.3)]).unwrap(), 0.0);
        assert_eq!(kernel_diag_rayleigh(&b, &g, &[c(0.3)]).unwrap(), 0.0);
    }

    #[test]
    fn reproducing_property() {
        let (b, g, rule) = disk(6);
        let mut one = vec![c(0.0); b.len()];
        one[0] = c(1.0);
        let mut z = vec![c(0.0); b.len()];
        z[1] = c(1.0);
        let w = WeightExpr::zero();
        assert!(reproducing_check(&b, &g, &rule, &w, &[], &one, &[c(0.0)]).unwrap() <= 1e-6);
        assert!(reproducing_check(&b, &g, &rule, &w, &[], &z, &[c(0.3)]).unwrap() <= 1e-6);
        assert_eq!(
            reproducing_check(&b, &g, &rule, &w, &[], &vec![c(0.0); b.len()], &[c(0.3)]).unwrap(),
            0.0
        );
    }
}
