use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bergman_lab::exec;
use bergman_lab_cli::config::{Config, Kind};
use bergman_lab_cli::run::{run_config, RunOptions};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bergman-lab",
    version,
    about = "Numerical experiments on weighted Bergman kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV files and plots.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in the configuration.
    Run(Common),
    /// Evaluate Bergman kernels, optionally against a closed form.
    ComputeKernel(Common),
    /// Sample plurisubharmonicity of log K or of the weight.
    VerifyPsh(Common),
    /// Rescaled kernels of thickened fibres.
    ThickenLimit(Common),
    /// Curvature of the direct-image bundle.
    DirectImageCurvature(Common),
    /// Iterated kernels of the pluricanonical construction.
    AzdIterate(Common),
    /// Extremal potentials of pseudonormed section spaces.
    NsPotential(Common),
    /// Minimal L2 extensions and their budgets.
    OtExtend(Common),
    /// Local integrability of exp(-weight).
    Integrability(Common),
}

impl Command {
    fn split(self) -> (Option<Kind>, Common) {
        match self {
            Command::Run(c) => (None, c),
            Command::ComputeKernel(c) => (Some(Kind::ComputeKernel), c),
            Command::VerifyPsh(c) => (Some(Kind::VerifyPsh), c),
            Command::ThickenLimit(c) => (Some(Kind::ThickenLimit), c),
            Command::DirectImageCurvature(c) => (Some(Kind::DirectImageCurvature), c),
            Command::AzdIterate(c) => (Some(Kind::AzdIterate), c),
            Command::NsPotential(c) => (Some(Kind::NsPotential), c),
            Command::OtExtend(c) => (Some(Kind::OtExtend), c),
            Command::Integrability(c) => (Some(Kind::Integrability), c),
        }
    }
}

fn configure_jobs(jobs: Option<usize>) -> Result<()> {
    match jobs {
        Some(0) => anyhow::bail!("--jobs must be at least 1"),
        Some(1) => exec::set_sequential(true),
        #[cfg(feature = "parallel")]
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?,
        #[cfg(not(feature = "parallel"))]
        Some(_) => exec::set_sequential(true),
        None => {}
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<u8> {
    let (kind, common) = cli.command.split();
    configure_jobs(common.jobs)?;
    let mut cfg = Config::load(&common.config)?;
    if let Some(kind) = kind {
        cfg.restrict_to(kind)?;
    }
    let summary = run_config(&cfg, &RunOptions { seed: common.seed })?;
    summary.write(&common.out, common.plot)?;
    for inst in &summary.instances {
        println!(
            "{} {}: {} ({:.2}s)",
            inst.kind.name(),
            inst.id,
            inst.verdict.as_str(),
            inst.wall_time
        );
    }
    Ok(summary.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
