//! Chain ingestion: JSON chain files, CSV matrices and builtin generators.

use std::fs;
use std::path::Path;

use clap::{Args, ValueEnum};
use geomsum::{fixtures, MarkovChain};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Builtin {
    TwoState,
    Iid,
    BirthDeath,
}

#[derive(Debug, Clone, Args)]
pub struct ChainSource {
    /// JSON chain file: {"states": [...], "P": [[...], ...]}.
    #[arg(long, value_name = "PATH", group = "source")]
    pub chain: Option<String>,
    /// CSV transition matrix, one row per line; states are labelled 0..n-1.
    #[arg(long, value_name = "PATH", group = "source")]
    pub csv: Option<String>,
    /// Builtin chain generator.
    #[arg(long, value_enum, value_name = "NAME", group = "source")]
    pub builtin: Option<Builtin>,
    /// Parameter of the two-state builtin.
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    /// Common row of the iid builtin, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.3,0.2")]
    pub pi: Vec<f64>,
    /// Number of states of the birth-death builtin.
    #[arg(long = "size", default_value_t = 5)]
    pub bd_size: usize,
    /// Up-step probability of the birth-death builtin.
    #[arg(long, default_value_t = 0.3)]
    pub up: f64,
    /// Down-step probability of the birth-death builtin.
    #[arg(long, default_value_t = 0.3)]
    pub down: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainFile {
    states: Vec<String>,
    #[serde(rename = "P")]
    p: Vec<Vec<f64>>,
}

impl ChainSource {
    pub fn load(&self) -> Result<MarkovChain, CliError> {
        if let Some(path) = &self.chain {
            return load_json(Path::new(path));
        }
        if let Some(path) = &self.csv {
            return load_csv(Path::new(path));
        }
        let chain = match self.builtin {
            Some(Builtin::TwoState) => fixtures::two_state(self.delta),
            Some(Builtin::Iid) => fixtures::iid_rows(&self.pi),
            Some(Builtin::BirthDeath) => fixtures::birth_death(self.bd_size, self.up, self.down),
            None => {
                return Err(CliError::Parse(
                    "one of --chain, --csv or --builtin is required".into(),
                ))
            }
        };
        Ok(chain?)
    }

    /// The two-state builtin parameter, when that is the chosen source.
    pub fn two_state_delta(&self) -> Option<f64> {
        (self.chain.is_none() && self.csv.is_none() && self.builtin == Some(Builtin::TwoState))
            .then_some(self.delta)
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_json(text: &str, origin: &str) -> Result<MarkovChain, CliError> {
    let file: ChainFile =
        serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{origin}: {e}")))?;
    Ok(MarkovChain::new(file.p, file.states)?)
}

fn load_json(path: &Path) -> Result<MarkovChain, CliError> {
    parse_json(&read(path)?, &path.display().to_string())
}

pub fn parse_csv(text: &str, origin: &str) -> Result<MarkovChain, CliError> {
    let mut rows = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .enumerate()
            .map(|(col, cell)| {
                cell.trim().parse::<f64>().map_err(|e| {
                    CliError::Parse(format!(
                        "{origin}: line {} column {}: {:?}: {e}",
                        line_no + 1,
                        col + 1,
                        cell.trim()
                    ))
                })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        rows.push(row);
    }
    Ok(MarkovChain::from_rows(rows)?)
}

fn load_csv(path: &Path) -> Result<MarkovChain, CliError> {
    parse_csv(&read(path)?, &path.display().to_string())
}

/// Resolves a state by label, falling back to a numeric index.
pub fn resolve_state(chain: &MarkovChain, label: &str) -> Result<usize, CliError> {
    match chain.state_index(label) {
        Ok(j) => Ok(j),
        Err(e) => match label.parse::<usize>() {
            Ok(j) if j < chain.len() => Ok(j),
            _ => Err(e.into()),
        },
    }
}
