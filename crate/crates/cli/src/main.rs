use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mafair_core::{load_config, Scenario, SolverConfig};

mod solve;
mod sweep;
mod validate;

/// Environment variable capping the worker threads.
const THREADS_VAR: &str = "MAFAIR_THREADS";

#[derive(Parser)]
#[command(name = "mafair", version, about = "Max-min fair movable-antenna uplink designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write a JSON result record.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Overrides `solver.rng_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Result record path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Dual iteration trace as CSV (ideal and ssmt modes).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Stays and moves for a motion controller as TOML (ssmt mode).
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Leave wall-clock fields out so that records are reproducible.
        #[arg(long)]
        omit_timing: bool,
    },
    /// Sweep one parameter and write one CSV row per point and mode.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        axis: sweep::Axis,
        /// `start:stop:step` or a comma-separated list. Optional for `x1_curve`.
        #[arg(long)]
        range: Option<String>,
        /// Restrict to one mode; all three by default.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        /// CSV path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        omit_timing: bool,
    },
    /// Run the property checks on one scenario.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Mode {
    Ideal,
    Ssmt,
    Static,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Ideal, Mode::Ssmt, Mode::Static];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Ideal => "ideal",
            Mode::Ssmt => "ssmt",
            Mode::Static => "static",
        }
    }
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<(Scenario, SolverConfig)> {
    let (scenario, mut cfg) = load_config(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = seed {
        cfg.rng_seed = seed;
    }
    Ok((scenario, cfg))
}

fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var(THREADS_VAR) {
        let threads: usize = value
            .parse()
            .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    match cli.command {
        Command::Solve {
            scenario,
            mode,
            seed,
            out,
            trace,
            plan,
            omit_timing,
        } => {
            let (s, cfg) = load(&scenario, seed)?;
            let outcome = solve::solve(&s, &cfg, mode, &scenario, omit_timing)?;
            if let (Some(path), Some(rows)) = (&trace, &outcome.trace) {
                let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
                mafair_core::dual::write_trace_csv(rows, file)?;
            }
            if let (Some(path), Some(text)) = (&plan, &outcome.plan_toml) {
                std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
            }
            let json = serde_json::to_string_pretty(&outcome.record)? + "\n";
            if out.is_some() {
                write_output(out.as_ref(), &json)?;
                println!("{:.6}", outcome.record.min_rate);
            } else {
                write_output(None, &json)?;
            }
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            scenario,
            axis,
            range,
            mode,
            seed,
            out,
            omit_timing,
        } => {
            let (s, cfg) = load(&scenario, seed)?;
            let modes: Vec<Mode> = mode.map_or(Mode::ALL.to_vec(), |m| vec![m]);
            let rows = sweep::sweep(&s, &cfg, axis, range.as_deref(), &modes, omit_timing)?;
            write_output(out.as_ref(), &sweep::to_csv(&rows)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { scenario, seed } => {
            let (s, cfg) = load(&scenario, seed)?;
            let passed = validate::validate(&s, &cfg)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
