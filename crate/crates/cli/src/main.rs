//! `pwscat` — batch front end for the momentum-space scattering solver.
//!
//! Every subcommand reads one TOML config and writes its results under the
//! output directory. Runs are deterministic: the same config produces the
//! same bytes, regardless of `--threads`.
//!
//! Exit codes: `0` success, `2` config error, `3` numerical failure.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunConfig;
use run::AppError;

#[derive(Parser)]
#[command(name = "pwscat", version, about = "Transfer-matrix scattering amplitudes from config files")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for independent incidences (0 = library default).
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    threads: usize,
    /// Reserved for future stochastic features; the pipeline is
    /// deterministic and ignores it today.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scattering amplitudes for each configured incidence.
    Amplitude,
    /// Per-direction table: propagating vs full vs first-order solves.
    Compare,
    /// Structural checks (product identity, half-axis support, exactness).
    Verify,
    /// Dump the momentum discretization.
    GridReport,
    /// Amplitude drift under grid refinement.
    GridConvergence,
}

fn dispatch(cli: &Cli) -> Result<Vec<PathBuf>, AppError> {
    let path = cli.config.as_deref().ok_or_else(|| {
        AppError::Config(config::ConfigError::Invalid("--config <PATH> is required".into()))
    })?;
    let cfg = RunConfig::load(path)?;
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if cli.threads > 0 {
        // ignore the error when a pool already exists (repeat calls in-process)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global();
    }
    match cli.cmd {
        Cmd::Amplitude => run::amplitude(&cfg, &out_dir),
        Cmd::Compare => run::compare(&cfg, &out_dir),
        Cmd::Verify => run::verify(&cfg, &out_dir),
        Cmd::GridReport => run::grid_report(&cfg, &out_dir),
        Cmd::GridConvergence => run::grid_convergence(&cfg, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, code) = match &e {
                AppError::Config(_) => ("config", 2),
                AppError::Numerical(_) => ("numerical", 3),
            };
            let doc = serde_json::json!({"error": {"kind": kind, "message": e.to_string()}});
            eprintln!("{doc}");
            ExitCode::from(code)
        }
    }
}
