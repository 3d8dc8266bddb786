//! Command-line driver for the LAS workbench.
//!
//! `las-mud <command> [--config FILE] [--out PATH] [--seed N] [--threads N]
//! [--format csv|json]`. A config file holds one [`ExperimentSpec`]; flags
//! override it.

pub mod commands;
pub mod output;
pub mod spec;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::commands::Suite;
use crate::output::{render, Provenance};
use crate::spec::{ChannelSpec, CommandName, ExperimentSpec, Format, Grid, OutputSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_AUDIT: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] las_mud::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "las-mud", version, about = "LAS multiuser detection workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// Experiment file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Channel file (JSON); replaces the config's channel.
    #[arg(long, global = true)]
    pub channel: Option<PathBuf>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

/// A comma list `a,b,c` or a range `start:stop:step`.
fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => Ok(Grid::Range {
            start: num(a)?,
            stop: num(b)?,
            step: num(c)?,
        }),
        [list] => list.split(',').map(num).collect::<Result<_, _>>().map(Grid::List),
        _ => Err(format!("expected a,b,c or start:stop:step, got '{s}'")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form AME curves over a correlation grid.
    AmeSweep {
        #[arg(long = "users")]
        k: Option<usize>,
        #[arg(long, value_parser = parse_grid)]
        rho: Option<Grid>,
        /// Group sizes, comma separated.
        #[arg(long = "groups", value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long)]
        singleton_term: bool,
    },
    /// Union bounds on per-user BER.
    Bounds {
        #[arg(long, value_parser = parse_grid)]
        sigma: Option<Grid>,
        #[arg(long, value_parser = parse_grid)]
        snr_db: Option<Grid>,
        /// Bound tags, comma separated.
        #[arg(long, value_delimiter = ',')]
        detectors: Option<Vec<String>>,
        #[arg(long)]
        max_weight: Option<usize>,
    },
    /// Monte Carlo BER/VER/BFR estimates.
    Simulate {
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        target_errors: Option<u64>,
        #[arg(long, value_parser = parse_grid)]
        snr_db: Option<Grid>,
        #[arg(long)]
        overlay_bound: bool,
    },
    /// Dump the indecomposable error set.
    EnumerateErrors {
        #[arg(long)]
        max_weight: Option<usize>,
    },
    /// Run audit suites; exit 2 on any violation.
    Audit {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
    },
}

impl Command {
    pub fn name(&self) -> CommandName {
        match self {
            Self::AmeSweep { .. } => CommandName::AmeSweep,
            Self::Bounds { .. } => CommandName::Bounds,
            Self::Simulate { .. } => CommandName::Simulate,
            Self::EnumerateErrors { .. } => CommandName::EnumerateErrors,
            Self::Audit { .. } => CommandName::Audit,
        }
    }

    /// Flag values as `params` entries.
    fn overrides(&self) -> Result<Vec<(&'static str, Value)>, CliError> {
        let mut o: Vec<(&'static str, Value)> = Vec::new();
        let mut put = |k: &'static str, v: Value| o.push((k, v));
        let grid = |g: &Grid| serde_json::to_value(g).map_err(CliError::from);
        match self {
            Self::AmeSweep {
                k,
                rho,
                m,
                singleton_term,
            } => {
                if let Some(k) = k {
                    put("K", (*k).into());
                }
                if let Some(r) = rho {
                    put("rho", grid(r)?);
                }
                if let Some(m) = m {
                    put("M", m.clone().into());
                }
                if *singleton_term {
                    put("singleton_term", true.into());
                }
            }
            Self::Bounds {
                sigma,
                snr_db,
                detectors,
                max_weight,
            } => {
                if let Some(s) = sigma {
                    put("sigma", grid(s)?);
                }
                if let Some(s) = snr_db {
                    put("snr_db", grid(s)?);
                }
                if let Some(d) = detectors {
                    put("detectors", d.clone().into());
                }
                if let Some(w) = max_weight {
                    put("max_weight", (*w).into());
                }
            }
            Self::Simulate {
                trials,
                target_errors,
                snr_db,
                overlay_bound,
            } => {
                if let Some(t) = trials {
                    put("trials", (*t).into());
                    put("target_errors", Value::Null);
                }
                if let Some(t) = target_errors {
                    put("target_errors", (*t).into());
                    put("trials", Value::Null);
                }
                if let Some(s) = snr_db {
                    put("snr_db", s.values()?.into());
                }
                if *overlay_bound {
                    put("overlay_bound", true.into());
                }
            }
            Self::EnumerateErrors { max_weight } => {
                if let Some(w) = max_weight {
                    put("max_weight", (*w).into());
                }
            }
            Self::Audit { suite } => {
                if let Some(s) = suite {
                    put("suite", serde_json::to_value(s)?);
                }
            }
        }
        Ok(o)
    }
}

/// Merges the config file, channel file and flags into one spec.
pub fn resolve(cli: &Cli) -> Result<ExperimentSpec, CliError> {
    let g = &cli.global;
    let mut spec = match &g.config {
        Some(path) => ExperimentSpec::from_json(&std::fs::read_to_string(path)?)?,
        None => ExperimentSpec::default(),
    };
    let name = cli.command.name();
    if let Some(c) = spec.command {
        if c != name {
            return Err(CliError::Usage(format!(
                "config is for '{}' but '{}' was requested",
                c.as_str(),
                name.as_str()
            )));
        }
    }
    spec.command = Some(name);
    if let Some(path) = &g.channel {
        let text = std::fs::read_to_string(path)?;
        let c: ChannelSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid channel file: {e}")))?;
        spec.channel = Some(c);
    }
    if g.seed.is_some() {
        spec.seed = g.seed;
    }
    if spec.seed.is_none() && matches!(name, CommandName::Simulate | CommandName::Audit) {
        spec.seed = Some(1);
    }
    let mut params = spec.params_or_empty();
    let obj = params
        .as_object_mut()
        .ok_or_else(|| CliError::Usage("params must be an object".into()))?;
    for (k, v) in cli.command.overrides()? {
        if v.is_null() {
            obj.remove(k);
        } else {
            obj.insert(k.into(), v);
        }
    }
    spec.params = params;
    let out = spec.output.get_or_insert_with(OutputSpec::default);
    if g.out.is_some() {
        out.path = g.out.clone();
    }
    if g.format.is_some() {
        out.format = g.format;
    }
    Ok(spec)
}

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let go = || -> Result<i32, CliError> {
        let spec = resolve(cli)?;
        let name = cli.command.name();
        let outcome = match cli.global.threads {
            Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?
                .install(|| commands::run(name, &spec))?,
            None => commands::run(name, &spec)?,
        };
        let output = spec.output.clone().unwrap_or_default();
        let text = render(&outcome, &Provenance::new(name.as_str(), &spec), output.format.unwrap_or_default())?;
        match &output.path {
            Some(p) => std::fs::write(p, text)?,
            None => print!("{text}"),
        }
        for n in &outcome.notes {
            eprintln!("las-mud: {n}");
        }
        Ok(outcome.exit_code)
    };
    match go() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("las-mud: {e}");
            EXIT_USAGE
        }
    }
}
