use std::hint::black_box;

use bergman_lab::bergman::{compute_gram, monomial_basis};
use bergman_lab::exec;
use bergman_lab::family::{kernel_field, levi_psh_verify, FamilySpec};
use bergman_lab::levi::{LeviConfig, SampleBox};
use bergman_lab::quadrature::{build_rule, Domain, Scheme};
use bergman_lab::weight::WeightExpr;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, bool); 2] = [("parallel", false), ("sequential", true)];

fn gram_assembly(c: &mut Criterion) {
    let dom = Domain::polydisk(vec![Default::default(); 2], vec![1.0, 1.0]).unwrap();
    let rule = build_rule(&dom, &[], Scheme::Polar, 12, 0).unwrap();
    let basis = monomial_basis(2, 8);
    let weight: WeightExpr = "abs2(z1) + log(1 + abs2(z2))".parse().unwrap();
    let mut group = c.benchmark_group("gram_assembly");
    group.sample_size(10);
    for (name, seq) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_sequential(seq);
            b.iter(|| black_box(compute_gram(&basis, &rule, &weight, &[]).unwrap()));
        });
    }
    exec::set_sequential(false);
    group.finish();
}

fn psh_sampling(c: &mut Criterion) {
    let probes = SampleBox::new(vec![(-0.5, 0.5), (-0.5, 0.5), (-0.3, 0.3), (0.0, 0.0)])
        .unwrap()
        .lattice(3)
        .unwrap();
    let cfg = LeviConfig {
        fd_step: 1e-2,
        ..LeviConfig::default()
    };
    let mut group = c.benchmark_group("psh_sampling");
    group.sample_size(10);
    for (name, seq) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            exec::set_sequential(seq);
            b.iter(|| {
                let spec =
                    FamilySpec::new("abs2(z1 - t1)".parse().unwrap(), Domain::unit_disk(), 1)
                        .unwrap()
                        .with_d_max(10);
                let field = kernel_field(spec).unwrap();
                black_box(levi_psh_verify(&field, &probes, &cfg).unwrap())
            });
        });
    }
    exec::set_sequential(false);
    group.finish();
}

criterion_group!(benches, gram_assembly, psh_sampling);
criterion_main!(benches);
