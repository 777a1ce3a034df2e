//! `spdelab`: run simulations, lambda sweeps, bound tables and the kernel
//! verification suite from a flat config file.

mod commands;
mod config;
mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Report, RunOptions};
use config::{ExperimentConfig, RawConfig, VerifyKeys};
use output::{Seed, SeedSource};

const SEED_ENV: &str = "SPDE_SEED";

#[derive(Parser)]
#[command(name = "spdelab", version, about = "Stochastic heat and wave equation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for replicate loops (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Overrides SPDE_SEED and the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample paths at snapshot times (fields.csv) and path maxima (heights.csv).
    Simulate,
    /// Energy over a lambda grid (energy.csv) with index fits and bound checks.
    Sweep,
    /// Kernel identities and resolvent bounds (verify.txt).
    Verify,
    /// Rate constants and explicit bounds for each (t, lambda) (bounds.csv).
    Bounds,
}

fn read_raw(path: &Path) -> Result<RawConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    Ok(RawConfig::parse(&text)?)
}

fn resolve_seed(flag: Option<u64>, config: Option<u64>) -> Result<Seed, CliError> {
    if let Some(value) = flag {
        return Ok(Seed {
            value,
            source: SeedSource::Flag,
        });
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        let value = v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{SEED_ENV}=`{v}` is not a non-negative integer")))?;
        return Ok(Seed {
            value,
            source: SeedSource::Env,
        });
    }
    Ok(match config {
        Some(value) => Seed {
            value,
            source: SeedSource::Config,
        },
        None => Seed {
            value: 0,
            source: SeedSource::Default,
        },
    })
}

/// Runs the command and returns its report with the output directory.
fn run(cli: &Cli) -> Result<(Report, PathBuf), CliError> {
    if let Command::Verify = cli.command {
        let raw = match &cli.config {
            Some(p) => read_raw(p)?,
            None => RawConfig::default(),
        };
        let report = commands::verify(&VerifyKeys::from_raw(&raw)?)?;
        return Ok((report, out_dir(cli, None)));
    }
    let Some(path) = &cli.config else {
        return Err(CliError::Validation("--config is required".into()));
    };
    let cfg = ExperimentConfig::from_raw(&read_raw(path)?)?;
    let opts = RunOptions {
        seed: resolve_seed(cli.seed, cfg.seed)?,
        workers: cli.workers.or(cfg.workers).unwrap_or(0),
    };
    let report = match cli.command {
        Command::Simulate => commands::simulate(&cfg, &opts)?,
        Command::Sweep => commands::sweep(&cfg, &opts)?,
        Command::Bounds => commands::bounds(&cfg)?,
        Command::Verify => unreachable!(),
    };
    Ok((report, out_dir(cli, Some(&cfg))))
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.and_then(|c| c.output.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (report, dir) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    print!("{}", report.stdout);
    match report.outputs.write(&dir) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: cannot write to {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    }
    if report.failed {
        eprintln!("error: one or more checks failed");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}
