use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xyloc_core::model::RunConfig;
use xyloc_core::parallel::Executor;
use xyloc_core::runner::{exit_code, run, Command, RunOptions, Tamper};
use xyloc_core::Error;

const DEFAULT_CONFIG: &str = include_str!("../../../configs/default.toml");

#[derive(Parser, Debug)]
#[command(name = "xyloc", version, about = "Disordered XY chains: free fermions, exact oracle, localization estimators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// TOML run configuration; a small built-in fixture when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, default_value = "xyloc-out")]
    out: PathBuf,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "XYLOC_WORKERS", default_value_t = 0)]
    workers: usize,

    /// Replace the configured base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Sub {
    /// One-body spectra, ground energies and gaps per realization.
    Diagonalize,
    /// Ensemble propagator correlator and its decay fit.
    Dynloc,
    /// Spin commutator sweep against the Lieb-Robinson bound.
    Lr,
    /// Per-realization clustering inequality.
    Cluster,
    /// Distribution of the distance from zero to the one-body spectrum.
    GapStats,
    /// Ground-state correlation decay.
    Correlations,
    /// Cross-engine invariant suite.
    Verify {
        /// Negate one column of W before checking (negative control).
        #[arg(long, hide = true)]
        corrupt_w: Option<usize>,
    },
}

impl Sub {
    fn command(self) -> Command {
        match self {
            Sub::Diagonalize => Command::Diagonalize,
            Sub::Dynloc => Command::Dynloc,
            Sub::Lr => Command::Lr,
            Sub::Cluster => Command::Cluster,
            Sub::GapStats => Command::GapStats,
            Sub::Correlations => Command::Correlations,
            Sub::Verify { .. } => Command::Verify,
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse(DEFAULT_CONFIG)?,
    };
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    let exec = Executor::new(cli.workers)?;
    let opts = RunOptions {
        config_path: cli.config.clone(),
        tamper: match cli.command {
            Sub::Verify { corrupt_w: Some(c) } => Some(Tamper::FlipWColumn(c)),
            _ => None,
        },
    };
    let outcome = run(cli.command.command(), &cfg, &cli.out, &exec, &opts)?;
    for line in &outcome.lines {
        println!("{line}");
    }
    for a in &outcome.artifacts {
        println!("wrote {} ({} bytes)", cli.out.join(&a.file).display(), a.bytes);
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("xyloc {}: {e}", cli.command.command().name());
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
