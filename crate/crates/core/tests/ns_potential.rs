use std::f64::consts::PI;
use std::sync::Arc;

use bergman_lab::bergman::{compute_gram, kernel_diag, monomial_basis, Basis};
use bergman_lab::family::{kernel_field, levi_psh_verify, FamilySpec, QuadratureConfig};
use bergman_lab::levi::{LeviConfig, SampleBox, Verdict};
use bergman_lab::ns::{ns_field_psh_check, ns_potential_at, NsFamily, NsOptimizerConfig, NsSpace};
use bergman_lab::quadrature::{build_rule, Domain, Scheme};
use bergman_lab::weight::WeightExpr;
use bergman_lab::C64;
use proptest::prelude::*;

fn disk_space(m: u32, d: u32, weight: &str) -> NsSpace {
    let rule = Arc::new(build_rule(&Domain::unit_disk(), &[], Scheme::Polar, 24, 0).unwrap());
    NsSpace::new(m, monomial_basis(1, d), rule, &weight.parse().unwrap(), &[]).unwrap()
}

#[test]
fn m_one_matches_bergman_at_random_points() {
    let weight: WeightExpr = "abs2(z1)".parse().unwrap();
    let rule = Arc::new(build_rule(&Domain::unit_disk(), &[], Scheme::Polar, 24, 0).unwrap());
    let space = NsSpace::new(1, monomial_basis(1, 8), rule.clone(), &weight, &[]).unwrap();
    let gram = compute_gram(space.basis(), &rule, &weight, &[]).unwrap();
    let cfg = NsOptimizerConfig::default();
    for k in 0..10 {
        let x = C64::from_polar(0.08 * k as f64, 1.3 * k as f64);
        let r = ns_potential_at(&space, &[x], &cfg).unwrap();
        let want = kernel_diag(space.basis(), &gram, &[x]).unwrap();
        assert!(
            (r.value - want).abs() <= 1e-4 * want,
            "{x}: {} vs {want}",
            r.value
        );
    }
}

#[test]
fn m_two_on_the_disk_at_the_origin() {
    let space = disk_space(2, 4, "0");
    let r = ns_potential_at(&space, &[C64::new(0.0, 0.0)], &NsOptimizerConfig::default()).unwrap();
    assert!((r.value - 1.0 / (PI * PI)).abs() <= 1e-4, "{}", r.value);
    assert!(r.best_gap <= 1e-3);
}

#[test]
fn m_one_levi_form_matches_bergman_levi_form() {
    let weight = "abs2(z1 - t1)";
    let sb = SampleBox::new(vec![(-0.4, 0.4), (-0.4, 0.4), (-0.2, 0.2), (0.0, 0.0)]).unwrap();
    let probes = sb.lattice(2).unwrap();
    let cfg = LeviConfig {
        fd_step: 1e-2,
        tol: 1e-3,
        ..LeviConfig::default()
    };

    let rule = build_rule(&Domain::unit_disk(), &[], Scheme::Polar, 24, 0).unwrap();
    let fam = NsFamily::new(1, 6, 1, weight.parse().unwrap(), Domain::unit_disk(), rule).unwrap();
    let ns = ns_field_psh_check(
        &fam,
        &probes,
        &cfg,
        &NsOptimizerConfig {
            starts: 4,
            ..Default::default()
        },
    )
    .unwrap();

    let spec = FamilySpec::new(weight.parse().unwrap(), Domain::unit_disk(), 1)
        .unwrap()
        .with_d_max(6)
        .with_quadrature(QuadratureConfig {
            order: 24,
            ..Default::default()
        });
    let bergman = levi_psh_verify(&kernel_field(spec).unwrap(), &probes, &cfg).unwrap();

    assert_eq!(ns.verdict, Verdict::Pass);
    assert_eq!(bergman.verdict, Verdict::Pass);
    for (a, b) in ns.per_probe_min.iter().zip(&bergman.per_probe_min) {
        assert!((a - b).abs() <= 2e-3, "{a} vs {b}");
    }
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec(
        (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b)),
        n,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pseudonorm_is_absolutely_homogeneous(m in 1u32..4, cf in coeffs(4), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let space = disk_space(m, 3, "abs2(z1)");
        let lam = C64::new(re, im);
        let scaled: Vec<C64> = cf.iter().map(|v| v * lam).collect();
        let a = space.pseudonorm(&scaled);
        let b = lam.norm() * space.pseudonorm(&cf);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b));
    }

    #[test]
    fn potential_dominates_every_ratio(m in 1u32..4, cf in coeffs(4), r in 0.0f64..0.8, th in 0.0f64..std::f64::consts::TAU) {
        let space = disk_space(m, 3, "abs2(z1)");
        let x = [C64::from_polar(r, th)];
        let res = ns_potential_at(&space, &x, &NsOptimizerConfig { starts: 4, ..Default::default() }).unwrap();
        let px: C64 = space.basis().eval(&x).iter().zip(&cf).map(|(a, b)| a * b).sum();
        let norm = space.pseudonorm(&cf);
        prop_assume!(norm > 1e-6);
        prop_assert!(res.value * (1.0 + 1e-9) >= px.norm_sqr() / (norm * norm));
    }
}
