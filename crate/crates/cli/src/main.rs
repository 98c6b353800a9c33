//! Command-line front end: loads a chain, runs an analysis and prints a
//! table or JSON document.
//!
//! Exit codes: 0 all checks pass, 1 a checked invariant failed, 2 input could
//! not be parsed, 3 input was rejected, 4 a numerical cross-check failed.

mod commands;
mod input;
mod render;

use std::io::{IsTerminal, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use geomsum::bounds::{default_thetas, BoundsOptions, DEFAULT_TOL};
use geomsum::dist::DEFAULT_TAIL_EPS;
use geomsum::sim::SimConfig;
use geomsum::MarkovChain;
use serde::Serialize;

use commands::{Settings, SweepSst};
use input::{resolve_state, ChainSource};
use render::Table;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Validation(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Numeric(m) => write!(f, "numerical diagnostic: {m}"),
        }
    }
}

impl From<geomsum::Error> for CliError {
    fn from(e: geomsum::Error) -> Self {
        if e.is_numeric_diagnostic() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Args)]
struct Numeric {
    /// Truncate laws once the remaining mass is below this.
    #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
    tail_eps: f64,
    /// Relative slack for bound comparisons.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Horizon for the all-t side conditions; adaptive when omitted.
    #[arg(long)]
    horizon: Option<usize>,
    /// MGF evaluation point; repeat for several.
    #[arg(long = "theta")]
    thetas: Vec<f64>,
    /// Length of the ergodic average in the chain-level checks.
    #[arg(long, default_value_t = 100)]
    ergodic_steps: usize,
}

impl Numeric {
    fn settings(&self) -> Result<Settings, CliError> {
        for (name, v) in [("--tail-eps", self.tail_eps), ("--tol", self.tol)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Validation(format!(
                    "{name} must lie in (0, 1), got {v}"
                )));
            }
        }
        if self.ergodic_steps == 0 {
            return Err(CliError::Validation(
                "--ergodic-steps must be positive".into(),
            ));
        }
        Ok(Settings {
            opts: BoundsOptions {
                tail_eps: self.tail_eps,
                tol: self.tol,
                thetas: if self.thetas.is_empty() {
                    default_thetas()
                } else {
                    self.thetas.clone()
                },
            },
            horizon: self.horizon,
            ergodic_steps: self.ergodic_steps,
        })
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "geomsum",
    version,
    about = "Hitting times from stationarity as geometric sums of strong stationary times"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every bound, dual construction and side condition for one or all states.
    Analyze {
        #[command(flatten)]
        source: ChainSource,
        /// Target state label or index; all states when omitted.
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        numeric: Numeric,
    },
    /// Bound checks over random ergodic chains.
    Sweep {
        /// Number of chains.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// States per chain.
        #[arg(long, default_value_t = 4)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Which strong stationary time to test.
        #[arg(long, value_enum, default_value_t = SweepSst::Fastest)]
        sst: SweepSst,
        #[command(flatten)]
        numeric: Numeric,
    },
    /// Monte Carlo check of the hitting time and greedy dual SST laws.
    Simulate {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        /// Independent random streams; must divide the sample count.
        #[arg(long, default_value_t = 8)]
        replicas: usize,
        #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
        tail_eps: f64,
    },
    /// Trace of the greedy dual construction.
    Greedy {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long)]
        state: String,
        #[command(flatten)]
        numeric: Numeric,
    },
    /// Strong stationary time and hitting time laws as series.
    Sst {
        #[command(flatten)]
        source: ChainSource,
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = DEFAULT_TAIL_EPS)]
        tail_eps: f64,
    },
}

struct Output {
    text: String,
    pass: bool,
}

fn emit<T: Serialize>(
    format: Format,
    doc: &T,
    table: impl FnOnce(&T) -> String,
    pass: bool,
) -> Output {
    let text = match format {
        Format::Json => {
            serde_json::to_string_pretty(doc).expect("report documents serialise") + "\n"
        }
        Format::Table => table(doc),
    };
    Output { text, pass }
}

fn load(source: &ChainSource, state: &str) -> Result<(MarkovChain, usize), CliError> {
    let chain = source.load()?;
    let j = resolve_state(&chain, state)?;
    Ok((chain, j))
}

fn run(cli: Cli, color: bool) -> Result<Output, CliError> {
    let fmt = cli.format;
    let table = || Table::new(color);
    match cli.command {
        Command::Analyze {
            source,
            state,
            numeric,
        } => {
            let s = numeric.settings()?;
            let chain = source.load()?;
            let targets = match state {
                Some(label) => vec![resolve_state(&chain, &label)?],
                None => (0..chain.len()).collect(),
            };
            let doc = commands::analyze(&chain, &targets, &s, source.two_state_delta())?;
            Ok(emit(fmt, &doc, |d| table().analyze(d), doc.all_pass))
        }
        Command::Sweep {
            count,
            size,
            seed,
            sst,
            numeric,
        } => {
            let s = numeric.settings()?;
            if count == 0 {
                return Err(CliError::Validation("--count must be at least 1".into()));
            }
            if !(2..=50).contains(&size) {
                return Err(CliError::Validation(format!(
                    "--size must lie in 2..=50, got {size}"
                )));
            }
            let doc = commands::sweep(count, size, seed, sst, &s)?;
            Ok(emit(fmt, &doc, |d| table().sweep(d), doc.all_pass))
        }
        Command::Simulate {
            source,
            state,
            seed,
            samples,
            replicas,
            tail_eps,
        } => {
            let (chain, j) = load(&source, &state)?;
            let cfg = SimConfig::new(seed, replicas, samples)?;
            let doc = commands::simulate(&chain, j, &cfg, tail_eps)?;
            Ok(emit(fmt, &doc, |d| table().simulate(d), doc.all_pass))
        }
        Command::Greedy {
            source,
            state,
            numeric,
        } => {
            let s = numeric.settings()?;
            let (chain, j) = load(&source, &state)?;
            let doc = commands::greedy(&chain, j, &s.opts)?;
            Ok(emit(fmt, &doc, |d| table().greedy_doc(d), true))
        }
        Command::Sst {
            source,
            state,
            tail_eps,
        } => {
            let (chain, j) = load(&source, &state)?;
            let doc = commands::sst(&chain, j, tail_eps)?;
            Ok(emit(fmt, &doc, |d| table().sst(d), true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let color = cli.format == Format::Table
        && std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty())
        && std::io::stdout().is_terminal();
    match run(cli, color) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(out.text.as_bytes());
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("one or more checked invariants FAILED; see the report above");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
