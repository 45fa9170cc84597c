use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use bergman_lab::levi::Verdict;
use bergman_lab_cli::config::{Config, Kind};
use bergman_lab_cli::run::{run_config, Detail, InstanceOutput, RunOptions, RunSummary};

fn config_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.json")
}

struct Check {
    label: &'static str,
    ok: bool,
    note: String,
}

fn timed(cfg: &Config, kinds: &[Kind]) -> (RunSummary, Duration) {
    let mut sub = cfg.clone();
    sub.experiments.retain(|e| kinds.contains(&e.kind()));
    let start = Instant::now();
    let summary = run_config(&sub, &RunOptions::default()).expect("acceptance run");
    (summary, start.elapsed())
}

fn inst<'a>(s: &'a RunSummary, kind: Kind, id: &str) -> &'a InstanceOutput {
    s.instance(kind, id)
        .unwrap_or_else(|| panic!("missing {} {id}", kind.name()))
}

fn kernel_errors(s: &RunSummary, id: &str) -> f64 {
    match &inst(s, Kind::ComputeKernel, id).detail {
        Detail::Kernel(v) => v.iter().filter_map(|k| k.rel_error).fold(0.0, f64::max),
        _ => unreachable!(),
    }
}

fn criterion_kernels(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::ComputeKernel]);
    let disk = kernel_errors(&s, "disk-d30");
    let fock = kernel_errors(&s, "fock-r6-d20");
    out.push(Check {
        label: "disk kernel d=30 within 1e-4 on |z| <= 0.7",
        ok: disk <= 1e-4 && dt < Duration::from_secs(5),
        note: format!("max rel error {disk:.2e}, {dt:.2?}"),
    });
    out.push(Check {
        label: "Fock kernel R=6 d=20 within 1e-3 on |z| <= 1.5",
        ok: fock <= 1e-3 && dt < Duration::from_secs(5),
        note: format!("max rel error {fock:.2e}, {dt:.2?}"),
    });
}

fn criterion_psh(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::VerifyPsh]);
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for id in ["family-1", "family-2", "family-3"] {
        if let Detail::Psh { report, .. } = &inst(&s, Kind::VerifyPsh, id).detail {
            worst = worst.min(report.min_levi_eigenvalue);
            ok &= report.grid_size == 625 && report.verdict == Verdict::Pass;
        }
    }
    let control = psh_control();
    out.push(Check {
        label: "log K psh for three families on a 5^4 grid; concave control fails",
        ok: ok && worst >= -1e-4 && control <= -0.5 && dt < Duration::from_secs(120),
        note: format!("min eigenvalue {worst:.3e}, control {control:.3}, {dt:.2?}"),
    });
}

fn psh_control() -> f64 {
    let cfg = Config::from_json(
        r#"{"schema_version": 1, "experiments": [{"experiment": "verify-psh", "id": "control",
            "field": "weight", "family": {"k": 1, "weight": "-(abs2(z1) + abs2(t1))",
            "domain": {"polydisk": {"radii": [1.0]}}},
            "box": [[-0.5, 0.5], [-0.5, 0.5], [-0.3, 0.3], [-0.3, 0.3]], "grid": 5}]}"#,
    )
    .unwrap();
    let s = run_config(&cfg, &RunOptions::default()).unwrap();
    match &inst(&s, Kind::VerifyPsh, "control").detail {
        Detail::Psh { report, .. } if report.verdict == Verdict::Fail => report.min_levi_eigenvalue,
        _ => f64::NAN,
    }
}

fn criterion_thicken(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::ThickenLimit]);
    let report = |id| match &inst(&s, Kind::ThickenLimit, id).detail {
        Detail::Thicken(r) => r.clone(),
        _ => unreachable!(),
    };
    let product = report("product");
    let shifted = report("shifted");
    let exact = product.values.iter().all(|v| (v - 1.0 / PI).abs() <= 1e-6);
    let e = &shifted.errors;
    let decreasing = e.windows(2).all(|w| w[1] < w[0]);
    let last = *e.last().unwrap();
    out.push(Check {
        label: "thickening: product exact, |z-t|^2 errors strictly decreasing",
        ok: exact && decreasing && last <= 1e-2 && dt < Duration::from_secs(120),
        note: format!(
            "errors {:?}, {dt:.2?}",
            e.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>()
        ),
    });
}

fn criterion_nakano(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::DirectImageCurvature]);
    let eig = |id| match &inst(&s, Kind::DirectImageCurvature, id).detail {
        Detail::Curvature(r) => {
            let mut v: Vec<f64> = r[0]
                .curvature_matrix
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            v.sort_by(f64::total_cmp);
            (v, r[0].curvature_matrix.norm())
        }
        _ => unreachable!(),
    };
    let (twisted, _) = eig("twisted-fock");
    let (_, flat) = eig("trivial-fock");
    let close = twisted
        .iter()
        .enumerate()
        .all(|(k, x)| (x - (k + 1) as f64).abs() <= 0.05 * (k + 1) as f64);
    out.push(Check {
        label: "Nakano eigenvalues {1, 2, 3} within 5%; t-independent family flat",
        ok: close && flat <= 1e-6 && dt < Duration::from_secs(60),
        note: format!("eigenvalues {twisted:.4?}, flat norm {flat:.1e}, {dt:.2?}"),
    });
}

fn criterion_azd(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::AzdIterate]);
    let (ok, note) = match &inst(&s, Kind::AzdIterate, "fock-a1").detail {
        Detail::Azd {
            limit, growth, psh, ..
        } => {
            let s10 = limit.sequences[0][9];
            let psh_ok = psh.len() == 10 && psh.iter().all(|r| r.verdict == Verdict::Pass);
            (
                (s10 - 1.0 / PI).abs() <= 1e-2
                    && limit.cauchy_gap <= 5e-3
                    && growth.verdict == Verdict::Pass
                    && psh_ok
                    && dt < Duration::from_secs(180),
                format!(
                    "s10 {s10:.6}, gap {:.2e}, psh at every m {psh_ok}, {dt:.2?}",
                    limit.cauchy_gap
                ),
            )
        }
        _ => unreachable!(),
    };
    out.push(Check {
        label: "iterated kernels on C converge to 1/pi",
        ok,
        note,
    });
}

fn criterion_ns(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::NsPotential]);
    let points = |id| match &inst(&s, Kind::NsPotential, id).detail {
        Detail::Ns { points, psh } => (points.clone(), psh.clone()),
        _ => unreachable!(),
    };
    let (m1, _) = points("m1-fock-disk");
    let (m2, _) = points("m2-disk");
    let (_, psh) = points("m1-family-psh");
    let m1_err = m1.iter().filter_map(|p| p.rel_error).fold(0.0, f64::max);
    let m2_err = (m2[0].result.value - 1.0 / (PI * PI)).abs();
    let gap = m1
        .iter()
        .chain(&m2)
        .map(|p| p.result.best_gap)
        .fold(0.0, f64::max);
    let psh_ok = psh.is_some_and(|r| r.verdict == Verdict::Pass && r.tol == 1e-3);
    out.push(Check {
        label: "NS potential: m=1 equals Bergman, m=2 gives 1/pi^2, psh in t",
        ok: m1.len() == 10
            && m1_err <= 1e-4
            && m2_err <= 1e-4
            && gap <= 1e-3
            && psh_ok
            && dt < Duration::from_secs(300),
        note: format!("m1 {m1_err:.1e}, m2 {m2_err:.1e}, best gap {gap:.1e}, {dt:.2?}"),
    });
}

fn criterion_ot(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::OtExtend]);
    let report = |id| match &inst(&s, Kind::OtExtend, id).detail {
        Detail::Ot(r) => r.clone(),
        _ => unreachable!(),
    };
    let mut ok = dt < Duration::from_secs(60);
    let mut ratios = Vec::new();
    for id in ["bidisk-constant-uniform", "bidisk-constant-psh_operator"] {
        let r = report(id);
        ok &= (r.ratio - PI / 2.0).abs() <= 1e-3 && r.verdict == Verdict::Pass;
        ratios.push(r.ratio);
    }
    let mut residual: f64 = 0.0;
    for id in ["psh-1", "psh-2", "psh-3"] {
        let r = report(id);
        ok &= r.verdict == Verdict::Pass && r.restriction_residual <= 1e-8;
        residual = residual.max(r.restriction_residual);
    }
    out.push(Check {
        label: "L2 extension: bidisk ratio pi/2, psh weights within budget",
        ok,
        note: format!("ratios {ratios:.6?}, max residual {residual:.1e}, {dt:.2?}"),
    });
}

fn criterion_integrability(cfg: &Config, out: &mut Vec<Check>) {
    let (s, dt) = timed(cfg, &[Kind::Integrability]);
    let div = |id| match &inst(&s, Kind::Integrability, id).detail {
        Detail::Integrability { report, .. } => report.divergent,
        _ => unreachable!(),
    };
    let got = [div("log-pole-0.5"), div("log-pole-0.99"), div("log-pole-1")];
    out.push(Check {
        label: "integrability threshold of c log|z|^2 at c = 1",
        ok: got == [false, false, true] && dt < Duration::from_secs(30),
        note: format!("divergent {got:?}, {dt:.2?}"),
    });
}

fn criterion_reproducible(cfg: &Config, out: &mut Vec<Check>) {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_config(cfg, &RunOptions::default()).unwrap();
    let second = run_config(cfg, &RunOptions::default()).unwrap();
    first.write(a.path(), false).unwrap();
    second.write(b.path(), false).unwrap();
    let mut same = true;
    let mut files = 0;
    for kind in first.kinds() {
        let name = format!("{}.csv", kind.file_stem());
        same &= std::fs::read(a.path().join(&name)).unwrap()
            == std::fs::read(b.path().join(&name)).unwrap();
        files += 1;
    }
    out.push(Check {
        label: "CSV output byte-identical on rerun",
        ok: same && files == Kind::ALL.len(),
        note: format!("{files} files compared"),
    });
}

fn main() {
    let cfg = Config::load(&config_path()).unwrap();
    let mut checks = Vec::new();
    criterion_kernels(&cfg, &mut checks);
    criterion_psh(&cfg, &mut checks);
    criterion_thicken(&cfg, &mut checks);
    criterion_nakano(&cfg, &mut checks);
    criterion_azd(&cfg, &mut checks);
    criterion_ns(&cfg, &mut checks);
    criterion_ot(&cfg, &mut checks);
    criterion_integrability(&cfg, &mut checks);
    criterion_reproducible(&cfg, &mut checks);
    for (i, c) in checks.iter().enumerate() {
        println!(
            "[{}] {:>2} {} ({})",
            if c.ok { "PASS" } else { "FAIL" },
            i + 1,
            c.label,
            c.note
        );
    }
    let failed = checks.iter().filter(|c| !c.ok).count();
    println!(
        "acceptance: {} of {} criteria pass",
        checks.len() - failed,
        checks.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
