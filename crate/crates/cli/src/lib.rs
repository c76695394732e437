//! Batch front end for the prosumer market experiments.
//!
//! A run reads an optional configuration file, applies command-line
//! overrides, computes one table and writes it as CSV next to a
//! `manifest.toml` holding the fully resolved configuration. Feeding the
//! manifest back with `--config` reproduces the table byte for byte.

pub mod config;
pub mod experiments;
pub mod grid;
pub mod table;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser};

pub use config::{parse_config, Config, ConfigError};
pub use experiments::{execute, with_default_grids, Experiment};
pub use grid::{GridOverride, GridSpec};
pub use table::{format_significant, Cell, Table};

pub const MANIFEST_FILE: &str = "manifest.toml";

const MANIFEST_HEADER: &str = "\
# Resolved configuration of a prosumer-market run.
# Pass this file back with --config to reproduce the table.
#
# Caveat: the consumption curvature alpha (population.alpha) is a modelling
# choice, not a measured quantity. Absolute sell-back, contract and savings
# magnitudes scale with it; compare signs and orderings across runs rather
# than levels.
";

#[derive(Debug, Parser)]
#[command(
    name = "prosumer-market",
    version,
    about = "Prosumer sell-back incentive experiments"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// TOML scenario file; omitted keys take the reference defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory receiving the table and the manifest.
    #[arg(long, value_name = "DIR", default_value = "results")]
    pub out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sweep override, repeatable.
    #[arg(long = "grid", value_name = "NAME=START:STOP:STEPS")]
    pub grids: Vec<GridOverride>,
}

/// Files written by a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: PathBuf,
    pub manifest: PathBuf,
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(experiment: Experiment, args: &RunArgs) -> Result<Config> {
    let mut config = match &args.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    for o in &args.grids {
        if !experiment.uses_grid(&o.name) {
            let known: Vec<&str> = experiment.default_grids().iter().map(|(n, _)| *n).collect();
            bail!(
                "{} does not sweep `{}` (sweeps: {})",
                experiment.name(),
                o.name,
                if known.is_empty() {
                    "none".into()
                } else {
                    known.join(", ")
                }
            );
        }
        config.grids.insert(o.name.clone(), o.grid);
    }
    config.validate()?;
    Ok(with_default_grids(&config, experiment).resolved())
}

pub fn manifest_text(experiment: Experiment, config: &Config) -> String {
    format!(
        "{MANIFEST_HEADER}# experiment: {}\n\n{}",
        experiment.name(),
        config.to_toml()
    )
}

pub fn run(experiment: Experiment, args: &RunArgs) -> Result<RunOutput> {
    let config = resolve_config(experiment, args)?;
    let table = execute(experiment, &config)?;
    let output = RunOutput {
        table: args.out.join(format!("{}.csv", experiment.name())),
        manifest: args.out.join(MANIFEST_FILE),
    };
    let files = [
        (&output.table, table.to_csv()),
        (&output.manifest, manifest_text(experiment, &config)),
    ];
    write_all(&args.out, &files)?;
    Ok(output)
}

/// Writes every file or none: on failure anything already written is
/// removed.
fn write_all(dir: &Path, files: &[(&PathBuf, String)]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written: Vec<&Path> = Vec::new();
    for (path, contents) in files {
        let tmp = path.with_extension("partial");
        let result = fs::write(&tmp, contents).and_then(|_| fs::rename(&tmp, path));
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            for p in written {
                let _ = fs::remove_file(p);
            }
            return Err(e).with_context(|| format!("writing {}", path.display()));
        }
        written.push(path);
    }
    Ok(())
}
