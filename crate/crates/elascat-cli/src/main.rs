//! Command-line driver: forward solves, dataset synthesis, the Landweber
//! reconstruction variants, validation suites, and dataset inspection.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 validation failure.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use config::RunConfig;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "elascat", version, about = "Elastic inverse medium scattering on a disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration file (applied after defaults).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named experiment preset (applied after the config file).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = machine core count).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long = "mesh-level", global = true)]
    mesh_level: Option<u32>,
    #[arg(long = "data-mesh-level", global = true)]
    data_mesh_level: Option<u32>,
    /// Relative noise level for synthesis.
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// Discrepancy parameter τ.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Stopping rule: fixed | discrepancy.
    #[arg(long, global = true)]
    stop: Option<String>,
    /// Assumed relative noise level for the discrepancy rule.
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    phantom: Option<String>,
    /// Algorithm variant: full | phaseless | density | density-phaseless.
    #[arg(long, global = true)]
    variant: Option<String>,
    /// Incidence kind: P | S.
    #[arg(long, global = true)]
    incidence: Option<String>,
    /// Frequency for single forward solves.
    #[arg(long, global = true)]
    omega: Option<f64>,
    /// Incidence angle for single forward solves.
    #[arg(long, global = true)]
    angle: Option<f64>,
    /// Dataset file consumed by `invert` / `dataset-info`.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// One forward solve; writes the displacement field and boundary trace.
    Forward,
    /// Synthesize a near-field dataset on a finer mesh.
    Synthesize,
    /// Run a Landweber reconstruction against a dataset.
    Invert,
    /// Run the self-check suites and print a pass/fail table.
    Validate,
    /// Print the JSON header of a dataset file.
    DatasetInfo,
}

/// Error classified by exit code.
pub enum CliError {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Validation(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Validation(m) => m,
        }
    }
}

pub fn classify(e: elascat::Error) -> CliError {
    use elascat::Error::*;
    match e {
        SolverFailure { .. } | SingularMode { .. } | OrderOverflow { .. } | Domain(_) => {
            CliError::Numerical(e.to_string())
        }
        _ => CliError::Config(e.to_string()),
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad config file: {e}")))?;
    }
    if let Some(id) = &cli.preset {
        cfg.apply_preset(id).map_err(CliError::Config)?;
    }
    macro_rules! over {
        ($field:ident) => {
            if let Some(v) = &cli.$field {
                cfg.$field = v.clone();
            }
        };
    }
    over!(seed);
    over!(workers);
    over!(mesh_level);
    over!(data_mesh_level);
    over!(noise);
    over!(tau);
    over!(phantom);
    over!(variant);
    over!(incidence);
    over!(omega);
    over!(angle);
    if let Some(s) = &cli.stop {
        cfg.stop = s.clone();
    }
    if let Some(d) = cli.delta {
        cfg.delta = d;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(d) = &cli.data {
        cfg.dataset = Some(d.clone());
    }
    Ok(cfg)
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let cfg = build_config(&cli)?;
    if cfg.workers > 0 {
        commands::init_workers(cfg.workers);
    }
    match cli.command {
        Command::Forward => commands::cmd_forward(&cfg),
        Command::Synthesize => commands::cmd_synthesize(&cfg),
        Command::Invert => commands::cmd_invert(&cfg),
        Command::Validate => commands::cmd_validate(),
        Command::DatasetInfo => commands::cmd_dataset_info(&cfg),
    }
}

fn main() {
    match run() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}
