use nalgebra::DMatrix;

use super::{t_label, KernelField};
use crate::bergman::{compute_gram, GramMatrix};
use crate::error::{Error, Result};
use crate::levi::{min_hermitian_eigenvalue, Verdict};
use crate::C64;

/// Curvature of the fiberwise L2 metric on the direct image at one parameter.
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub t_point: C64,
    pub curvature_matrix: DMatrix<C64>,
    pub min_eigenvalue: f64,
    /// Largest `|Theta - Theta^H|` entry before symmetrization.
    pub hermitian_defect: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

/// Unfloored Gram matrix of the field's frame at `t`.
pub fn direct_image_gram(field: &KernelField, t: &[C64]) -> Result<GramMatrix> {
    let spec = field.spec();
    let rule = field.rule(t)?;
    compute_gram(field.basis(), &rule, &spec.weight, t)
}

/// Chern curvature `Theta(t)` of the frame metric `G(t)` for `k = 1`.
pub fn nakano_curvature(
    field: &KernelField,
    t: C64,
    fd_step: f64,
    tol: f64,
) -> Result<CurvatureReport> {
    if field.spec().k != 1 {
        return Err(Error::invalid(
            "curvature of the direct image needs a one-dimensional parameter",
        ));
    }
    nakano_from_gram_fn(
        |s| {
            let g = direct_image_gram(field, &[s])?;
            if g.regularization_floor_applied() {
                return Err(Error::StencilFloored { t: t_label(&[s]) });
            }
            Ok(g.entries().clone())
        },
        t,
        fd_step,
        tol,
    )
}

struct Derivatives {
    dt: DMatrix<C64>,
    dtbar: DMatrix<C64>,
    ddbar: DMatrix<C64>,
}

fn stencil<F>(gram: &F, t: C64, h: f64, g0: &DMatrix<C64>) -> Result<Derivatives>
where
    F: Fn(C64) -> Result<DMatrix<C64>>,
{
    let xp = gram(t + C64::new(h, 0.0))?;
    let xm = gram(t - C64::new(h, 0.0))?;
    let yp = gram(t + C64::new(0.0, h))?;
    let ym = gram(t - C64::new(0.0, h))?;
    let dx = (&xp - &xm) / C64::new(2.0 * h, 0.0);
    let dy = (&yp - &ym) / C64::new(2.0 * h, 0.0);
    let i = C64::new(0.0, 1.0);
    let lap = (xp + xm + yp + ym - g0 * C64::new(4.0, 0.0)) / C64::new(h * h, 0.0);
    Ok(Derivatives {
        dt: (&dx - &dy * i) * C64::new(0.5, 0.0),
        dtbar: (&dx + &dy * i) * C64::new(0.5, 0.0),
        ddbar: lap * C64::new(0.25, 0.0),
    })
}

fn richardson(fine: DMatrix<C64>, coarse: DMatrix<C64>) -> DMatrix<C64> {
    (fine * C64::new(4.0, 0.0) - coarse) / C64::new(3.0, 0.0)
}

/// Curvature from an arbitrary Gram function `t -> G(t)`, with
/// `G_ij = <e_i, e_j>`:
/// `Theta = -G^{-1/2} (d_t dbar_t G - d_t G G^{-1} dbar_t G) G^{-1/2}`.
///
/// Derivatives are central differences with steps `h` and `h/2` combined by
/// Richardson extrapolation.
pub fn nakano_from_gram_fn<F>(gram: F, t: C64, fd_step: f64, tol: f64) -> Result<CurvatureReport>
where
    F: Fn(C64) -> Result<DMatrix<C64>>,
{
    if !(fd_step > 0.0) {
        return Err(Error::invalid("fd_step must be positive"));
    }
    let g0 = gram(t)?;
    let r = g0.nrows();
    let coarse = stencil(&gram, t, fd_step, &g0)?;
    let fine = stencil(&gram, t, fd_step / 2.0, &g0)?;
    let dt = richardson(fine.dt, coarse.dt);
    let dtbar = richardson(fine.dtbar, coarse.dtbar);
    let ddbar = richardson(fine.ddbar, coarse.ddbar);

    let eig = g0.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::DegenerateGram {
            context: format!(" at t = {}", t_label(&[t])),
        });
    }
    let v = &eig.eigenvectors;
    let diag = |p: f64| DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.powf(p), 0.0)));
    let inv = v * diag(-1.0) * v.adjoint();
    let inv_sqrt = v * diag(-0.5) * v.adjoint();
    let inner = ddbar - &dt * inv * &dtbar;
    let theta = -(&inv_sqrt * inner * &inv_sqrt);
    let defect = (&theta - theta.adjoint())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let theta = (&theta + theta.adjoint()) * C64::new(0.5, 0.0);
    let min_eigenvalue = if r == 0 {
        0.0
    } else {
        min_hermitian_eigenvalue(&theta)
    };
    Ok(CurvatureReport {
        t_point: t,
        curvature_matrix: theta,
        min_eigenvalue,
        hermitian_defect: defect,
        tol,
        verdict: Verdict::from_bool(min_eigenvalue >= -tol),
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::family::{kernel_field, FamilySpec, QuadratureConfig};
    use crate::quadrature::Domain;

    fn eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
        let mut v: Vec<f64> = m
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn flat_frame_change_has_zero_curvature() {
        let g = |t: C64| {
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[
                    C64::new(1.0, 0.0),
                    t.conj(),
                    t,
                    C64::new(1.0 + t.norm_sqr(), 0.0),
                ],
            ))
        };
        for t in [C64::new(0.0, 0.0), C64::new(0.3, -0.4)] {
            let r = nakano_from_gram_fn(g, t, 1e-2, 1e-6).unwrap();
            assert!(
                r.curvature_matrix.iter().all(|c| c.norm() < 1e-8),
                "{}",
                r.curvature_matrix
            );
        }
    }

    #[test]
    fn line_bundle_curvature_matches_closed_form() {
        let g = |t: C64| {
            Ok(DMatrix::from_element(
                1,
                1,
                C64::new(PI / (1.0 + t.norm_sqr()), 0.0),
            ))
        };
        let t = C64::new(0.5, 0.2);
        let r = nakano_from_gram_fn(g, t, 1e-2, 1e-6).unwrap();
        let expect = 1.0 / (1.0 + t.norm_sqr()).powi(2);
        assert!((r.min_eigenvalue - expect).abs() < 1e-6);
    }

    #[test]
    fn fock_direct_image() {
        let spec = FamilySpec::new(
            "(1 + abs2(t1)) * abs2(z1)".parse().unwrap(),
            Domain::disk(6.0).unwrap(),
            1,
        )
        .unwrap()
        .with_d_max(2)
        .with_quadrature(QuadratureConfig {
            order: 48,
            ..Default::default()
        });
        let field = kernel_field(spec).unwrap();
        let t = C64::new(0.3, 0.1);
        let g = direct_image_gram(&field, &[t]).unwrap();
        let s = 1.0 + t.norm_sqr();
        for (k, f) in [1.0, 1.0, 2.0].iter().enumerate() {
            let expect = PI * f / s.powi(k as i32 + 1);
            assert!((g.entries()[(k, k)].re - expect).abs() < 1e-3 * expect);
        }
        let r = nakano_curvature(&field, C64::new(0.0, 0.0), 1e-2, 1e-4).unwrap();
        let ev = eigenvalues(&r.curvature_matrix);
        for (k, l) in ev.iter().enumerate() {
            assert!((l - (k + 1) as f64).abs() < 0.05 * (k + 1) as f64, "{ev:?}");
        }
        assert!(r.hermitian_defect < 1e-10);
    }
}
