//! Versioned JSON manifests describing one run of the `wl1` tool.
//!
//! A run directory holds exactly one `manifest.json`. It records every
//! parameter that affects the outputs, so [`crate::runner::execute`] on the
//! stored manifest rewrites the same CSV bytes. Thread count is deliberately
//! absent: results do not depend on it.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ExperimentPlan;
use crate::exponents::AsymptoticConfig;
use crate::model::{AmplitudeLaw, SparsityModel, WeightScheme};
use crate::recovery::SUCCESS_TOL;
use crate::rng::GENERATOR;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL: &str = "wl1";

/// Model and weight configuration of a single instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub n: usize,
    pub n1: usize,
    pub n2: usize,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "W2")]
    pub w2: f64,
    pub seed: u64,
    #[serde(default)]
    pub amplitude: AmplitudeLaw,
}

impl ModelManifest {
    pub fn validate(&self) -> Result<()> {
        if self.n1 + self.n2 != self.n {
            return Err(Error::Manifest(format!("n1 + n2 = {} differs from n = {}", self.n1 + self.n2, self.n)));
        }
        self.model()?;
        if !(self.w2 > 0.0 && self.w2.is_finite()) {
            return Err(Error::Manifest(format!("W2 must be positive, got {}", self.w2)));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SparsityModel> {
        SparsityModel::new(self.n1, self.n2, self.p1, self.p2)
    }

    pub fn weights(&self) -> Result<WeightScheme> {
        WeightScheme::two_valued(&self.model()?, self.w2)
    }
}

/// Output encoding for tabular results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One subcommand with all of its effective parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Recover {
        model: ModelManifest,
        m: usize,
        #[serde(default = "default_success_tol")]
        success_tol: f64,
    },
    Simulate {
        plan: ExperimentPlan,
        /// Also compare 50% crossings against asymptotic thresholds.
        #[serde(default)]
        theory: bool,
    },
    Threshold {
        delta: f64,
        #[serde(rename = "P2")]
        p2: f64,
        gamma1: f64,
        gamma2: f64,
        #[serde(rename = "W2_values")]
        w2_values: Vec<f64>,
        tol: f64,
    },
    Weights {
        delta: f64,
        #[serde(rename = "P2")]
        p2: f64,
        gamma1: f64,
        gamma2: f64,
        w_min: f64,
        w_max: f64,
        tol: f64,
    },
    Surface {
        config: AsymptoticConfig,
        grid: usize,
    },
    Angles {
        n1: usize,
        n2: usize,
        #[serde(rename = "W2")]
        w2: f64,
        k1: usize,
        k2: usize,
        /// Restricts the table to the union-bound range `t1 + t2 > m − k + 1`.
        #[serde(default)]
        m: Option<usize>,
    },
}

fn default_success_tol() -> f64 {
    SUCCESS_TOL
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Recover { .. } => "recover",
            Command::Simulate { .. } => "simulate",
            Command::Threshold { .. } => "threshold",
            Command::Weights { .. } => "weights",
            Command::Surface { .. } => "surface",
            Command::Angles { .. } => "angles",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub code_version: String,
    pub generator: String,
    #[serde(default)]
    pub format: Format,
    /// Emit SVG plots next to the tables.
    #[serde(default)]
    pub plot: bool,
    #[serde(flatten)]
    pub command: Command,
}

impl RunManifest {
    pub fn new(command: Command, format: Format, plot: bool) -> Self {
        RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: TOOL.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR.to_string(),
            format,
            plot,
            command,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: RunManifest = serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        if m.schema_version > SCHEMA_VERSION {
            return Err(Error::Manifest(format!(
                "schema version {} is newer than supported version {SCHEMA_VERSION}",
                m.schema_version
            )));
        }
        Ok(m)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Writes `manifest.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(MANIFEST_FILE), self.to_json())?;
        Ok(())
    }
}

/// Reads an experiment plan from either a full run manifest of a `simulate`
/// command or a bare [`ExperimentPlan`] document.
pub fn read_plan(path: &Path) -> Result<ExperimentPlan> {
    let text = fs::read_to_string(path)?;
    if let Ok(run) = RunManifest::from_json(&text) {
        return match run.command {
            Command::Simulate { plan, .. } => Ok(plan),
            other => Err(Error::Manifest(format!("expected a simulate manifest, found {}", other.name()))),
        };
    }
    serde_json::from_str(&text).map_err(|e| Error::Manifest(e.to_string()))
}

pub fn read_model(path: &Path) -> Result<ModelManifest> {
    let model: ModelManifest =
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| Error::Manifest(e.to_string()))?;
    model.validate()?;
    Ok(model)
}
