//! Experiment execution and CSV emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bergman_lab::azd::{
    azd_iterate, azd_limit, growth_bound_check, kodaira_dim_estimate, AzdLimitReport, GrowthReport,
};
use bergman_lab::bergman::{compute_gram, kernel_diag};
use bergman_lab::family::{
    kernel_field, levi_psh_verify, nakano_curvature, thickened_rescaling, ConvergenceReport,
    CurvatureReport, ThickenConfig,
};
use bergman_lab::levi::{LeviConfig, PshReport, SampleBox, Verdict};
use bergman_lab::ns::{ns_field_psh_check, ns_potential_at, NsFamily, NsResult};
use bergman_lab::ot::{budget_check, minimal_extension, BudgetReport, ExtensionProblem};
use bergman_lab::quadrature::build_rule;
use bergman_lab::weight::{
    check_psh_sample, integrability_check, IntegrabilityConfig, IntegrabilityReport,
    PshSampleConfig,
};
use bergman_lab::{exec, seed, C64};

use crate::config::{
    cx, cxs, parse_expr, AzdIterate, ComputeKernel, Config, DirectImageCurvature, Expectation,
    Experiment, FieldKind, Integrability, Kind, NsPotential, OtExtend, PshBlock, Reference,
    ThickenLimit, VerifyPsh,
};
use crate::plot::{emit_plot, Plot, PlotKind};

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
}

/// One kernel evaluation of `compute-kernel`.
#[derive(Debug, Clone)]
pub struct KernelValue {
    pub z: Vec<C64>,
    pub kernel: f64,
    pub oracle: Option<f64>,
    pub rel_error: Option<f64>,
    pub verdict: Verdict,
}

/// One point evaluation of `ns-potential`.
#[derive(Debug, Clone)]
pub struct NsPoint {
    pub result: NsResult,
    pub reference: Option<f64>,
    pub rel_error: Option<f64>,
    pub verdict: Verdict,
}

/// Typed results of one experiment instance.
#[derive(Debug, Clone)]
pub enum Detail {
    Kernel(Vec<KernelValue>),
    Psh {
        report: PshReport,
        precondition: Option<Verdict>,
    },
    Thicken(ConvergenceReport),
    Curvature(Vec<CurvatureReport>),
    Azd {
        dims: Vec<usize>,
        limit: AzdLimitReport,
        growth: GrowthReport,
        psh: Vec<PshReport>,
        verdict: Verdict,
    },
    Ns {
        points: Vec<NsPoint>,
        psh: Option<PshReport>,
    },
    Ot(BudgetReport),
    Integrability {
        report: IntegrabilityReport,
        expected: Option<Expectation>,
        verdict: Verdict,
    },
}

#[derive(Debug, Clone)]
pub struct InstanceOutput {
    pub kind: Kind,
    pub id: String,
    pub rows: Vec<Vec<String>>,
    pub verdict: Verdict,
    pub wall_time: f64,
    pub detail: Detail,
    pub plot: Option<Plot>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub instances: Vec<InstanceOutput>,
}

/// Combine verdicts: any failure fails, otherwise any vacuous result is vacuous.
pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Vacuous => out = Verdict::Vacuous,
            Verdict::Pass => {}
        }
    }
    out
}

pub fn fmt_f(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

pub fn fmt_c(v: C64) -> String {
    let im = if v.im == 0.0 { 0.0 } else { v.im };
    format!("{}{:+.16e}i", fmt_f(v.re), im)
}

pub fn fmt_point(p: &[C64]) -> String {
    p.iter().map(|v| fmt_c(*v)).collect::<Vec<_>>().join(";")
}

pub fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f(*x)).collect::<Vec<_>>().join(";")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f).unwrap_or_default()
}

/// Fixed CSV header of each experiment kind.
pub fn header(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::ComputeKernel => &[
            "instance_id",
            "index",
            "z",
            "t",
            "kernel",
            "oracle",
            "rel_error",
            "verdict",
        ],
        Kind::VerifyPsh => &[
            "instance_id",
            "field",
            "grid_size",
            "skipped",
            "min_levi_eigenvalue",
            "worst_point",
            "sub_mean_violations",
            "fd_step",
            "tol",
            "precondition",
            "verdict",
        ],
        Kind::ThickenLimit => &[
            "instance_id",
            "epsilon",
            "value",
            "limit_value",
            "error",
            "fitted_rate",
            "verdict",
        ],
        Kind::DirectImageCurvature => &[
            "instance_id",
            "t",
            "eigenvalues",
            "min_eigenvalue",
            "matrix_norm",
            "hermitian_defect",
            "verdict",
        ],
        Kind::AzdIterate => &[
            "instance_id",
            "probe",
            "z",
            "nu",
            "dims",
            "s_m",
            "limit_value",
            "cauchy_gap",
            "upper_gap",
            "lower_gap",
            "collapse",
            "growth_slope",
            "growth_verdict",
            "psh_min_levi",
            "verdict",
        ],
        Kind::NsPotential => &[
            "instance_id",
            "kind",
            "index",
            "point",
            "value",
            "reference",
            "rel_error",
            "best_gap",
            "starts_used",
            "min_levi_eigenvalue",
            "verdict",
        ],
        Kind::OtExtend => &[
            "problem_id",
            "extension_norm",
            "slice_norm",
            "ratio",
            "budget",
            "budget_kind",
            "naive_norm",
            "restriction_residual",
            "verdict",
        ],
        Kind::Integrability => &[
            "instance_id",
            "center",
            "fitted_exponent",
            "divergent",
            "extrapolated_total",
            "integral_estimates",
            "excluded_nodes",
            "expected",
            "verdict",
        ],
    }
}

fn sample_box(ranges: &[[f64; 2]]) -> Result<SampleBox> {
    Ok(SampleBox::new(
        ranges.iter().map(|r| (r[0], r[1])).collect(),
    )?)
}

fn levi_config(block: &PshBlock, seed: u64) -> LeviConfig {
    LeviConfig {
        fd_step: block.fd_step,
        tol: block.tol,
        directions: block.directions,
        seed,
        ..LeviConfig::default()
    }
}

struct Partial {
    rows: Vec<Vec<String>>,
    verdict: Verdict,
    detail: Detail,
    plot: Option<Plot>,
}

fn line_plot(title: String, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Option<Plot> {
    if points.is_empty() {
        return None;
    }
    Some(Plot {
        kind: PlotKind::Line,
        title,
        x_label: x_label.into(),
        y_label: y_label.into(),
        rows: points.into_iter().map(|(x, y)| [x, y, 0.0]).collect(),
    })
}

fn compute_kernel(e: &ComputeKernel, seed_value: u64) -> Result<Partial> {
    let t = cxs(&e.t);
    let spec = e.family.build(seed_value)?.with_t_grid(vec![t.clone()]);
    let field = kernel_field(spec)?;
    let values: Vec<KernelValue> = exec::map(e.points.len(), |i| -> Result<KernelValue> {
        let z = cxs(&e.points[i]);
        let kernel = field.diag(&z, &t)?;
        let oracle = e.oracle.map(|o| o.value(&z));
        let rel_error = oracle.map(|o| ((kernel - o) / o).abs());
        let verdict = match rel_error {
            Some(r) => Verdict::from_bool(r <= e.tol),
            None => Verdict::from_bool(kernel.is_finite() && kernel > 0.0),
        };
        Ok(KernelValue {
            z,
            kernel,
            oracle,
            rel_error,
            verdict,
        })
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let rows = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            vec![
                e.id.clone(),
                i.to_string(),
                fmt_point(&v.z),
                fmt_point(&t),
                fmt_f(v.kernel),
                fmt_opt(v.oracle),
                fmt_opt(v.rel_error),
                v.verdict.as_str().into(),
            ]
        })
        .collect();
    let plot = line_plot(
        format!("K(z, z) for {}", e.id),
        "|z|",
        "log K(z, z)",
        values
            .iter()
            .map(|v| {
                (
                    v.z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt(),
                    v.kernel.ln(),
                )
            })
            .collect(),
    );
    Ok(Partial {
        rows,
        verdict: combine(values.iter().map(|v| v.verdict)),
        detail: Detail::Kernel(values),
        plot,
    })
}

fn psh_heatmap(title: String, probes: &[Vec<C64>], n: usize, values: &[f64]) -> Option<Plot> {
    let mut cells: BTreeMap<(u64, u64), [f64; 3]> = BTreeMap::new();
    for (p, &v) in probes.iter().zip(values) {
        let x = p[0].re;
        let y = if p.len() > n { p[n].re } else { p[0].im };
        let cell = cells
            .entry((x.to_bits(), y.to_bits()))
            .or_insert([x, y, f64::INFINITY]);
        if v.is_finite() {
            cell[2] = cell[2].min(v);
        }
    }
    let rows: Vec<[f64; 3]> = cells
        .into_values()
        .map(|mut c| {
            if c[2] == f64::INFINITY {
                c[2] = f64::NAN;
            }
            c
        })
        .collect();
    if rows.is_empty() {
        return None;
    }
    let y_label = if probes.first().is_some_and(|p| p.len() > n) {
        "re t1"
    } else {
        "im z1"
    };
    Some(Plot {
        kind: PlotKind::Heatmap,
        title,
        x_label: "re z1".into(),
        y_label: y_label.into(),
        rows,
    })
}

fn verify_psh(e: &VerifyPsh, seed_value: u64) -> Result<Partial> {
    let spec = e.family.build(seed_value)?;
    let sb = sample_box(&e.sample_box)?;
    let sample_cfg = PshSampleConfig {
        grid: e.grid,
        fd_step: e.fd_step,
        tol: e.tol,
        directions: e.directions,
        seed: seed_value,
    };
    let probes = sb.lattice(e.grid)?;
    let (report, precondition) = match e.field {
        FieldKind::Weight => (
            check_psh_sample(&spec.weight, &sb, spec.n, &sample_cfg)?,
            None,
        ),
        FieldKind::LogKernel => {
            let pre = spec.weight_precondition(&sb, &sample_cfg)?;
            let field = kernel_field(spec)?;
            let levi = LeviConfig {
                fd_step: e.fd_step,
                tol: e.tol,
                directions: e.directions,
                seed: seed_value,
                ..LeviConfig::default()
            };
            let mut report = levi_psh_verify(&field, &probes, &levi)?;
            if pre.verdict == Verdict::Fail {
                report.downgrade_to_vacuous();
            }
            (report, Some(pre.verdict))
        }
    };
    let n = e.family.domain.build()?.n();
    let plot = psh_heatmap(
        format!("min Levi eigenvalue, {}", e.id),
        &probes,
        n,
        &report.per_probe_min,
    );
    let row = vec![
        e.id.clone(),
        e.field.as_str().into(),
        report.grid_size.to_string(),
        report.skipped.to_string(),
        fmt_f(report.min_levi_eigenvalue),
        fmt_point(&report.worst_point),
        report.sub_mean_violations.to_string(),
        fmt_f(report.fd_step),
        fmt_f(report.tol),
        precondition
            .map(|v| v.as_str().to_string())
            .unwrap_or_default(),
        report.verdict.as_str().into(),
    ];
    Ok(Partial {
        rows: vec![row],
        verdict: report.verdict,
        detail: Detail::Psh {
            report,
            precondition,
        },
        plot,
    })
}

fn thicken_limit(e: &ThickenLimit, seed_value: u64) -> Result<Partial> {
    let field = kernel_field(e.family.build(seed_value)?)?;
    let cfg = ThickenConfig {
        d_max: e.d_max,
        disk_radial: e.disk_radial,
        disk_angular: e.disk_angular,
        tol: e.tol,
        ..ThickenConfig::default()
    };
    let r = thickened_rescaling(&field, cx(e.t0), &e.epsilons, &cxs(&e.probe), &cfg)?;
    let rows = (0..r.epsilons.len())
        .map(|i| {
            vec![
                e.id.clone(),
                fmt_f(r.epsilons[i]),
                fmt_f(r.values[i]),
                fmt_f(r.limit_value),
                fmt_f(r.errors[i]),
                fmt_f(r.fitted_rate),
                r.verdict.as_str().into(),
            ]
        })
        .collect();
    let plot = line_plot(
        format!("pi eps^2 K_eps, {}", e.id),
        "epsilon",
        "rescaled kernel",
        r.epsilons
            .iter()
            .copied()
            .zip(r.values.iter().copied())
            .collect(),
    );
    Ok(Partial {
        rows,
        verdict: r.verdict,
        detail: Detail::Thicken(r),
        plot,
    })
}

fn curvature(e: &DirectImageCurvature, seed_value: u64) -> Result<Partial> {
    let field = kernel_field(e.family.build(seed_value)?)?;
    let reports: Vec<CurvatureReport> =
        e.t.iter()
            .map(|t| Ok(nakano_curvature(&field, cx(*t), e.fd_step, e.tol)?))
            .collect::<Result<_>>()?;
    let rows = reports
        .iter()
        .map(|r| {
            let mut ev: Vec<f64> = r
                .curvature_matrix
                .clone()
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            ev.sort_by(f64::total_cmp);
            vec![
                e.id.clone(),
                fmt_c(r.t_point),
                fmt_list(&ev),
                fmt_f(r.min_eigenvalue),
                fmt_f(r.curvature_matrix.norm()),
                fmt_f(r.hermitian_defect),
                r.verdict.as_str().into(),
            ]
        })
        .collect();
    Ok(Partial {
        rows,
        verdict: combine(reports.iter().map(|r| r.verdict)),
        detail: Detail::Curvature(reports),
        plot: None,
    })
}

fn azd(e: &AzdIterate, seed_value: u64) -> Result<Partial> {
    let model = e.model.build();
    let rule = model.rule(e.radial_order)?;
    let run = azd_iterate(&model, e.m_max, &rule)?;
    let dims = run.dims();
    let nu = match e.nu {
        Some(v) => v,
        None => kodaira_dim_estimate(&dims)
            .context("estimating nu; set \"nu\" for short runs")?
            .round(),
    };
    let probes: Vec<Vec<C64>> = e.probes.iter().map(|p| cxs(p)).collect();
    let limit = azd_limit(&run, nu, &probes)?;
    let growth = growth_bound_check(&run, nu, &probes)?;
    let psh: Vec<PshReport> = match &e.psh {
        Some(block) => {
            let grid = sample_box(&block.sample_box)?.lattice(block.grid)?;
            let cfg = levi_config(block, seed_value);
            (1..=e.m_max)
                .map(|m| Ok(run.psh_check(m, &grid, &cfg)?))
                .collect::<Result<_>>()?
        }
        None => Vec::new(),
    };
    let collapse = Verdict::from_bool(!limit.collapse);
    let verdict = combine(
        [growth.verdict, collapse]
            .into_iter()
            .chain(psh.iter().map(|r| r.verdict)),
    );
    let psh_min: Vec<f64> = psh.iter().map(|r| r.min_levi_eigenvalue).collect();
    let dims_s = dims
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(";");
    let rows = probes
        .iter()
        .enumerate()
        .map(|(i, z)| {
            vec![
                e.id.clone(),
                i.to_string(),
                fmt_point(z),
                fmt_f(nu),
                dims_s.clone(),
                fmt_list(&limit.sequences[i]),
                fmt_f(limit.limit_values[i]),
                fmt_f(limit.cauchy_gap),
                fmt_f(limit.upper_gap),
                fmt_f(limit.lower_gap),
                limit.collapse.to_string(),
                fmt_f(growth.normalized_slope),
                growth.verdict.as_str().into(),
                fmt_list(&psh_min),
                verdict.as_str().into(),
            ]
        })
        .collect();
    let plot = limit.sequences.first().and_then(|s| {
        line_plot(
            format!("K_m^(1/m) at probe 0, {}", e.id),
            "m",
            "s_m",
            s.iter()
                .enumerate()
                .map(|(m, v)| ((m + 1) as f64, *v))
                .collect(),
        )
    });
    Ok(Partial {
        rows,
        verdict,
        detail: Detail::Azd {
            dims,
            limit,
            growth,
            psh,
            verdict,
        },
        plot,
    })
}

fn ns_potential(e: &NsPotential, seed_value: u64) -> Result<Partial> {
    let weight = parse_expr(&e.weight, "weight")?;
    let domain = e.domain.build()?;
    let t = cxs(&e.t);
    if t.len() != e.k {
        bail!("t has {} coordinates but k = {}", t.len(), e.k);
    }
    let rule = build_rule(
        &domain,
        &t,
        e.quadrature.scheme.into(),
        e.quadrature.order,
        seed_value,
    )?;
    let fam = NsFamily::new(e.m, e.d_max, e.k, weight.clone(), domain, rule.clone())?;
    let opt = e.optimizer.build(seed_value);
    let mut rows = Vec::new();
    let mut points = Vec::new();
    if !e.points.is_empty() {
        let space = fam.space(&t)?;
        let bergman = match e.reference {
            Some(Reference::Named(_)) => {
                Some(Arc::new(compute_gram(space.basis(), &rule, &weight, &t)?))
            }
            _ => None,
        };
        points = exec::map(e.points.len(), |i| -> Result<NsPoint> {
            let x = cxs(&e.points[i]);
            let result = ns_potential_at(&space, &x, &opt)?;
            let reference = match (&e.reference, &bergman) {
                (Some(Reference::Value(v)), _) => Some(*v),
                (Some(Reference::Named(_)), Some(g)) => Some(kernel_diag(space.basis(), g, &x)?),
                _ => None,
            };
            let rel_error = reference.map(|r| ((result.value - r) / r).abs());
            let ok = rel_error.is_none_or(|r| r <= e.tol) && result.best_gap <= e.best_gap_tol;
            Ok(NsPoint {
                result,
                reference,
                rel_error,
                verdict: Verdict::from_bool(ok),
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;
        for (i, p) in points.iter().enumerate() {
            rows.push(vec![
                e.id.clone(),
                "point".into(),
                i.to_string(),
                fmt_point(&p.result.x),
                fmt_f(p.result.value),
                fmt_opt(p.reference),
                fmt_opt(p.rel_error),
                fmt_f(p.result.best_gap),
                p.result.starts_used.to_string(),
                String::new(),
                p.verdict.as_str().into(),
            ]);
        }
    }
    let psh = match &e.psh {
        Some(block) => {
            let probes = sample_box(&block.sample_box)?.lattice(block.grid)?;
            let r = ns_field_psh_check(&fam, &probes, &levi_config(block, seed_value), &opt)?;
            rows.push(vec![
                e.id.clone(),
                "psh".into(),
                String::new(),
                fmt_point(&r.worst_point),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                fmt_f(r.min_levi_eigenvalue),
                r.verdict.as_str().into(),
            ]);
            Some(r)
        }
        None => None,
    };
    if rows.is_empty() {
        bail!("ns-potential needs points or a psh block");
    }
    let verdict = combine(
        points
            .iter()
            .map(|p| p.verdict)
            .chain(psh.iter().map(|r| r.verdict)),
    );
    Ok(Partial {
        rows,
        verdict,
        detail: Detail::Ns { points, psh },
        plot: None,
    })
}

fn ot_extend(e: &OtExtend, seed_value: u64) -> Result<Partial> {
    let problem = ExtensionProblem {
        id: e.id.clone(),
        domain: e.domain.build()?,
        c: cx(e.c),
        psi: parse_expr(&e.psi, "psi")?,
        g_coeffs: cxs(&e.g_coeffs),
        d_max: e.d_max,
        quadrature: e.quadrature.build(seed_value),
    };
    let ext = minimal_extension(&problem, &problem.ambient_basis())?;
    let r = budget_check(&problem, &ext, e.budget.into())?;
    let row = vec![
        r.problem_id.clone(),
        fmt_f(r.extension_norm),
        fmt_f(r.slice_norm),
        fmt_f(r.ratio),
        fmt_f(r.budget),
        r.budget_kind.as_str().into(),
        fmt_f(r.naive_norm),
        fmt_f(r.restriction_residual),
        r.verdict.as_str().into(),
    ];
    Ok(Partial {
        rows: vec![row],
        verdict: r.verdict,
        detail: Detail::Ot(r),
        plot: None,
    })
}

fn integrability(e: &Integrability) -> Result<Partial> {
    let expr = parse_expr(&e.weight, "weight")?;
    let cfg = IntegrabilityConfig {
        radial_order: e.radial_order,
        angular_points: e.angular_points,
    };
    let center = cxs(&e.center);
    let report = integrability_check(&expr, &center, &e.radii, &cfg)?;
    let verdict = match e.expect {
        Some(x) => Verdict::from_bool(report.divergent == (x == Expectation::Divergent)),
        None => Verdict::Pass,
    };
    let row = vec![
        e.id.clone(),
        fmt_point(&center),
        fmt_f(report.fitted_exponent),
        report.divergent.to_string(),
        fmt_opt(report.extrapolated_total),
        fmt_list(&report.integral_estimates),
        report.excluded_nodes.to_string(),
        e.expect.map(|x| x.as_str().to_string()).unwrap_or_default(),
        verdict.as_str().into(),
    ];
    Ok(Partial {
        rows: vec![row],
        verdict,
        detail: Detail::Integrability {
            report,
            expected: e.expect,
            verdict,
        },
        plot: None,
    })
}

fn run_one(e: &Experiment, master_seed: u64) -> Result<InstanceOutput> {
    let kind = e.kind();
    let id = e.id().to_string();
    let s = seed::derive(master_seed, &format!("{}/{}", kind.name(), id));
    let start = Instant::now();
    let partial = match e {
        Experiment::ComputeKernel(x) => compute_kernel(x, s),
        Experiment::VerifyPsh(x) => verify_psh(x, s),
        Experiment::ThickenLimit(x) => thicken_limit(x, s),
        Experiment::DirectImageCurvature(x) => curvature(x, s),
        Experiment::AzdIterate(x) => azd(x, s),
        Experiment::NsPotential(x) => ns_potential(x, s),
        Experiment::OtExtend(x) => ot_extend(x, s),
        Experiment::Integrability(x) => integrability(x),
    }
    .with_context(|| format!("{} {id:?}", kind.name()))?;
    Ok(InstanceOutput {
        kind,
        id,
        rows: partial.rows,
        verdict: partial.verdict,
        wall_time: start.elapsed().as_secs_f64(),
        detail: partial.detail,
        plot: partial.plot,
    })
}

/// Run every experiment of `cfg`; independent instances run concurrently.
pub fn run_config(cfg: &Config, opts: &RunOptions) -> Result<RunSummary> {
    let master = opts.seed.unwrap_or(cfg.seed);
    let mut instances: Vec<InstanceOutput> = exec::map(cfg.experiments.len(), |i| {
        run_one(&cfg.experiments[i], master)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    instances.sort_by(|a, b| (a.kind, &a.id).cmp(&(b.kind, &b.id)));
    Ok(RunSummary { instances })
}

impl RunSummary {
    pub fn verdict(&self) -> Verdict {
        combine(self.instances.iter().map(|i| i.verdict))
    }

    /// 0 when nothing failed, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.verdict() == Verdict::Fail {
            2
        } else {
            0
        }
    }

    pub fn kinds(&self) -> Vec<Kind> {
        let mut k: Vec<Kind> = self.instances.iter().map(|i| i.kind).collect();
        k.dedup();
        k
    }

    pub fn instance(&self, kind: Kind, id: &str) -> Option<&InstanceOutput> {
        self.instances.iter().find(|i| i.kind == kind && i.id == id)
    }

    /// CSV text for one experiment kind, rows sorted by instance id.
    pub fn csv(&self, kind: Kind) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header(kind))?;
        for inst in self.instances.iter().filter(|i| i.kind == kind) {
            for row in &inst.rows {
                w.write_record(row)?;
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Wall times, kept apart from the result CSVs so those stay reproducible.
    pub fn timing_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "instance_id", "verdict", "wall_time"])?;
        for i in &self.instances {
            w.write_record([
                i.kind.name(),
                &i.id,
                i.verdict.as_str(),
                &format!("{:.6}", i.wall_time),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Write one CSV per experiment kind, `timing.csv` and optional plots.
    pub fn write(&self, out_dir: &Path, plots: bool) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create {}", out_dir.display()))?;
        let mut written = Vec::new();
        for kind in self.kinds() {
            let path = out_dir.join(format!("{}.csv", kind.file_stem()));
            std::fs::write(&path, self.csv(kind)?)
                .with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
        let timing = out_dir.join("timing.csv");
        std::fs::write(&timing, self.timing_csv()?)?;
        written.push(timing);
        if plots {
            for inst in &self.instances {
                if let Some(p) = &inst.plot {
                    let path = out_dir.join(format!(
                        "{}__{}.svg",
                        inst.kind.file_stem(),
                        sanitize(&inst.id)
                    ));
                    emit_plot(p, &path)?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
