//! JSON run configuration.
//!
//! Everything the pipeline needs lives in one document. Only the sections a
//! command uses are required: `simulate` and `fit` run on defaults, `plan`
//! needs `requirement`, `mileage`, `grid` and `constraints`.

use std::path::{Path, PathBuf};

use avplan_core::bayes::{McmcConfig, NormalPrior};
use avplan_core::model::{MileageAssumption, WeibullGrowthParams};
use avplan_core::planner::{ConstraintSpec, PlanGrid, PriorityRule};
use avplan_core::risk::{ModelKind, ModelSpec, ReliabilityRequirement};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_start")]
    pub study_start: NaiveDate,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_model")]
    pub model: ModelKind,
    #[serde(default)]
    pub windows: Windows,
    pub requirement: Option<ReliabilityRequirement>,
    pub mileage: Option<MileageAssumption>,
    pub grid: Option<PlanGrid>,
    pub constraints: Option<ConstraintSpec>,
    pub priority: Option<PriorityRule>,
    #[serde(default)]
    pub prior: NormalPrior,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default = "default_n_post")]
    pub n_post: usize,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub paths: Paths,
}

/// Historical window `τ_h` (also the data horizon) and demonstration
/// window `τ_d`, in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Windows {
    pub tau_h: f64,
    pub tau_d: f64,
}

impl Default for Windows {
    fn default() -> Self {
        Self {
            tau_h: 730.0,
            tau_d: 730.0,
        }
    }
}

/// Synthetic fleet for `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub theta: WeibullGrowthParams,
    pub units: usize,
    /// Constant daily mileage, k-miles/day.
    pub daily_miles: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            theta: WeibullGrowthParams::new(2.0, 0.005, 1.2).expect("valid default"),
            units: 20,
            daily_miles: 0.2,
        }
    }
}

/// File locations; unset entries default to names inside `out`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub out: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub mileage: Option<PathBuf>,
    pub draws: Option<PathBuf>,
}

fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2017, 12, 1).expect("valid date")
}

fn default_model() -> ModelKind {
    ModelKind::Hpp
}

fn default_n_post() -> usize {
    1001
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config deserializes")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            context: format!("reading config {}", path.display()),
            source: e,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let w = self.windows;
        if !(w.tau_h.is_finite() && w.tau_h > 0.0) {
            return bad(format!("windows.tau_h must be > 0, got {}", w.tau_h));
        }
        if !(w.tau_d.is_finite() && w.tau_d > 0.0) {
            return bad(format!("windows.tau_d must be > 0, got {}", w.tau_d));
        }
        if self.n_post == 0 {
            return bad("n_post must be >= 1".into());
        }
        let sim = self.simulation;
        if sim.units == 0 {
            return bad("simulation.units must be >= 1".into());
        }
        if !(sim.daily_miles.is_finite() && sim.daily_miles >= 0.0) {
            return bad(format!(
                "simulation.daily_miles must be >= 0, got {}",
                sim.daily_miles
            ));
        }
        if let Some(m) = self.mileage {
            MileageAssumption::new(m.x_t, m.x_d)
                .map_err(|e| CliError::Config(format!("mileage: {e}")))?;
        }
        if let Some(grid) = &self.grid {
            grid.validate()
                .map_err(|e| CliError::Config(format!("grid: {e}")))?;
            if self.model == ModelKind::Nhpp && grid.tau_t.max > w.tau_d {
                return bad(format!(
                    "grid.tau_t.max = {} exceeds windows.tau_d = {}; the demonstration \
                     window must cover the test",
                    grid.tau_t.max, w.tau_d
                ));
            }
        }
        if let Some(rule) = &self.priority {
            rule.validate()
                .map_err(|e| CliError::Config(format!("priority: {e}")))?;
        }
        Ok(())
    }

    pub fn model_spec(&self) -> ModelSpec {
        match self.model {
            ModelKind::Hpp => ModelSpec::Hpp {
                tau_h: self.windows.tau_h,
            },
            ModelKind::Nhpp => ModelSpec::Nhpp {
                tau_h: self.windows.tau_h,
                tau_d: self.windows.tau_d,
            },
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn events_path(&self) -> PathBuf {
        self.paths
            .events
            .clone()
            .unwrap_or_else(|| self.out_dir().join("events.csv"))
    }

    pub fn mileage_path(&self) -> PathBuf {
        self.paths
            .mileage
            .clone()
            .unwrap_or_else(|| self.out_dir().join("mileage.csv"))
    }

    pub fn draws_path(&self) -> PathBuf {
        self.paths
            .draws
            .clone()
            .unwrap_or_else(|| self.out_dir().join("draws.csv"))
    }

    /// Section required by a command, or a config error naming it.
    pub fn require<'a, T>(&self, section: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        section
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("config is missing `{name}`")))
    }
}
