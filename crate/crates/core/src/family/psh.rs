use std::f64::consts::PI;

use super::{t_label, KernelField};
use crate::error::{Error, Result};
use crate::levi::{self, LeviConfig, PshReport};
use crate::C64;

/// Sampled Levi form and sub-mean-value test of `log K(z, z, t)` at each
/// probe `(z, t)`.
pub fn levi_psh_verify(
    field: &KernelField,
    probes: &[Vec<C64>],
    cfg: &LeviConfig,
) -> Result<PshReport> {
    let spec = field.spec();
    let d = spec.n + spec.k;
    if let Some(p) = probes.iter().find(|p| p.len() != d) {
        return Err(Error::invalid(format!(
            "probe has {} coordinates, expected {d}",
            p.len()
        )));
    }
    let margin = cfg.circle_radius_steps.max(2.0) * cfg.fd_step;
    for p in probes {
        let (z, t) = p.split_at(spec.n);
        if !interior(field, z, t, margin) {
            return Err(Error::invalid(format!(
                "probe z = {} at t = {} is within {margin} of the boundary",
                t_label(z),
                t_label(t)
            )));
        }
    }
    levi::sample(
        &|q: &[C64]| field.log_diag_at(q),
        probes,
        cfg,
        &|_: &[C64]| false,
    )
}

fn interior(field: &KernelField, z: &[C64], t: &[C64], margin: f64) -> bool {
    let domain = &field.spec().domain;
    if !domain.contains(z, t) {
        return false;
    }
    (0..z.len()).all(|j| {
        (0..8).all(|a| {
            let mut q = z.to_vec();
            q[j] += C64::from_polar(margin, a as f64 * PI / 4.0);
            domain.contains(&q, t)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{kernel_field, FamilySpec};
    use crate::levi::{SampleBox, Verdict};
    use crate::quadrature::Domain;
    use crate::weight::WeightExpr;

    #[test]
    fn boundary_probes_are_rejected() {
        let spec = FamilySpec::new(WeightExpr::zero(), Domain::unit_disk(), 1)
            .unwrap()
            .with_d_max(4);
        let field = kernel_field(spec).unwrap();
        let cfg = LeviConfig::default();
        let near = vec![vec![C64::new(0.999, 0.0), C64::new(0.0, 0.0)]];
        assert!(levi_psh_verify(&field, &near, &cfg).is_err());
    }

    #[test]
    fn product_family_is_psh() {
        let spec = FamilySpec::new(
            "abs2(z1) + abs2(t1)".parse().unwrap(),
            Domain::unit_disk(),
            1,
        )
        .unwrap()
        .with_d_max(15);
        let field = kernel_field(spec).unwrap();
        let probes = SampleBox::new(vec![(-0.5, 0.5), (-0.5, 0.5), (-0.3, 0.3), (-0.3, 0.3)])
            .unwrap()
            .lattice(2)
            .unwrap();
        let cfg = LeviConfig {
            fd_step: 1e-2,
            ..Default::default()
        };
        let r = levi_psh_verify(&field, &probes, &cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.min_levi_eigenvalue > 0.9);
    }
}
