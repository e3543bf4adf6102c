use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use stit_cli::commands::kernel::Mode;
use stit_cli::commands::{density, kernel, project, regress, tessellate};
use stit_cli::config::ExperimentConfig;
use stit_cli::error::{CliError, CliResult};
use stit_cli::report::{OutDir, RunReport};

/// STIT tessellations, their kernels and forest estimators.
#[derive(Parser)]
#[command(name = "stit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one tessellation and write its cells.
    Tessellate(Common),
    /// Kernel convergence and limit-kernel contour grids.
    Kernel(Common),
    /// Sup-error convergence of K_M to the limit kernel.
    KernelConverge(Common),
    /// Limit-kernel contour grids.
    KernelGrid(Common),
    /// Compare a discrete STIT with the projection of a Mondrian.
    ProjectVerify(Common),
    /// Forest density estimation.
    #[command(alias = "density-fit")]
    Density(Common),
    /// Forest regression.
    #[command(alias = "regress-fit")]
    Regress(Common),
    /// Run the acceptance suite.
    Acceptance {
        #[command(flatten)]
        common: Common,
        /// Smaller samples, wider tolerances.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> CliResult<(ExperimentConfig, OutDir)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        Ok((cfg, OutDir::create(&self.out)?))
    }
}

type Runner = Box<dyn Fn(&ExperimentConfig, &mut OutDir) -> CliResult<RunReport>>;

fn dispatch(command: Command) -> CliResult<RunReport> {
    let start = Instant::now();
    let (common, run): (&Common, Runner) = match &command {
        Command::Tessellate(c) => (c, Box::new(tessellate::run)),
        Command::Kernel(c) => (c, Box::new(|cfg, out| kernel::run(cfg, out, Mode::Both))),
        Command::KernelConverge(c) => (c, Box::new(|cfg, out| kernel::run(cfg, out, Mode::Converge))),
        Command::KernelGrid(c) => (c, Box::new(|cfg, out| kernel::run(cfg, out, Mode::Grid))),
        Command::ProjectVerify(c) => (c, Box::new(project::run)),
        Command::Density(c) => (c, Box::new(density::run)),
        Command::Regress(c) => (c, Box::new(regress::run)),
        Command::Acceptance { common, quick } => {
            let quick = *quick;
            (common, Box::new(move |cfg, out| stit_cli::acceptance::run(cfg, quick, out)))
        }
    };
    let (cfg, mut out) = common.load()?;
    let mut report = run(&cfg, &mut out)?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    out.finish(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(r) if r.passed == Some(false) => {
            eprintln!("{}: {}", r.command, CliError::Criterion("acceptance check failed".into()));
            ExitCode::from(2)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
