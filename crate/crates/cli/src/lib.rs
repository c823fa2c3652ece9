//! Command-line front end: simulate or ingest recurrent-events data, fit
//! the posterior, evaluate plan grids and keep the Pareto front.
//!
//! Exit status: 0 success, 1 usage or configuration error, 2 data error,
//! 3 no feasible plan.

mod commands;
pub mod config;
pub mod svg;

use std::io::Write;
use std::path::PathBuf;

use avplan_core::risk::ModelKind;
use clap::{Parser, Subcommand, ValueEnum};

pub use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "avplan",
    version,
    about = "Reliability assurance test planning"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Posterior draws CSV (written by `fit`, read by `plan`).
    #[arg(long, global = true, value_name = "PATH")]
    pub draws: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Planning model.
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelArg>,

    /// Also write the front trade-off plot as SVG.
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Simulate a fleet and write events.csv, mileage.csv and simulation.json.
    Simulate,
    /// Fit the posterior to events/mileage CSVs and write draws.csv.
    Fit,
    /// Evaluate the plan grid and write results.csv, front.csv and selection.json.
    Plan,
    /// Summarize an existing results.csv.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Hpp,
    Nhpp,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Hpp => ModelKind::Hpp,
            ModelArg::Nhpp => ModelKind::Nhpp,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] avplan_core::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },

    #[error("{0}")]
    Infeasible(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) => core_exit_code(e),
            CliError::Io { .. } => 2,
            CliError::Infeasible(_) => 3,
        }
    }
}

fn core_exit_code(e: &avplan_core::Error) -> i32 {
    use avplan_core::Error as E;
    match e {
        E::Parse { .. } | E::Data(_) | E::EmptyDraws | E::Sampler(_) => 2,
        E::NoFeasiblePlan(_) => 3,
        E::Plan { source, .. } => core_exit_code(source),
        E::InvalidParameter(_) | E::Domain { .. } | E::Degenerate(_) => 1,
    }
}

impl Cli {
    /// Loads the configuration and applies command-line overrides.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(m) = self.model {
            cfg.model = m.into();
        }
        if let Some(out) = &self.out {
            cfg.paths.out = Some(out.clone());
        }
        if let Some(d) = &self.draws {
            cfg.paths.draws = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Runs one command, writing progress and summaries to `log`.
pub fn run(cli: &Cli, log: &mut dyn Write) -> Result<(), CliError> {
    let cfg = cli.resolve_config()?;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg, log),
        Command::Fit => commands::fit(&cfg, log),
        Command::Plan => commands::plan(&cfg, cli.svg, log),
        Command::Report => commands::report(&cfg, cli.svg, log),
    }
}

/// Caps rayon's worker count from `AVPLAN_THREADS` when set.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Config(format!(
            "AVPLAN_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}
