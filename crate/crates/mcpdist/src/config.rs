//! Run specifications and their TOML configuration files.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use mcpdist_core::{McpParams, Spacing, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_190_417;

/// Default number of radius grid points.
pub const DEFAULT_STEPS: usize = 200;

/// Default number of cluster radii in a deviation sweep.
pub const DEFAULT_SWEEP_STEPS: usize = 30;

/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: u64 = 100_000;

/// What to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Exact CD and NND CDFs.
    Cdf,
    /// Exact CD and NND PDFs.
    Pdf,
    /// Exact CDFs next to every bound.
    Bounds,
    /// Empirical CDFs from Monte Carlo next to the exact ones.
    Simulate,
    /// Bound tightness metrics over a sweep of cluster radii.
    Deviation,
    /// Acceptance suites.
    Validate,
}

impl Command {
    /// Lowercase name.
    pub fn name(&self) -> &'static str {
        match self {
            Command::Cdf => "cdf",
            Command::Pdf => "pdf",
            Command::Bounds => "bounds",
            Command::Simulate => "simulate",
            Command::Deviation => "deviation",
            Command::Validate => "validate",
        }
    }
}

/// Output file format.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    /// Comma-separated values with `#` header lines.
    #[default]
    Csv,
    /// One JSON object.
    Json,
}

/// Grid point placement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SpacingArg {
    /// Equal steps.
    #[default]
    Linear,
    /// Equal ratios.
    Geometric,
}

impl From<SpacingArg> for Spacing {
    fn from(s: SpacingArg) -> Self {
        match s {
            SpacingArg::Linear => Spacing::Linear,
            SpacingArg::Geometric => Spacing::Geometric,
        }
    }
}

/// Process parameters as written by the user; exactly one of `lambda_d`
/// and `mean_points` must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    /// Dimension.
    pub dim: u32,
    /// Parent intensity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_p: Option<f64>,
    /// Daughter intensity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_d: Option<f64>,
    /// Mean daughters per parent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_points: Option<f64>,
    /// Cluster radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rd: Option<f64>,
}

impl Default for ParamSpec {
    fn default() -> Self {
        Self {
            dim: 2,
            lambda_p: None,
            lambda_d: None,
            mean_points: None,
            rd: None,
        }
    }
}

impl ParamSpec {
    /// Builds the parameters; `rd_fallback` stands in for a missing `rd`.
    pub fn build(&self, rd_fallback: Option<f64>) -> AppResult<McpParams> {
        let lambda_p = self
            .lambda_p
            .ok_or_else(|| AppError::Parameter("missing --lambda-p".into()))?;
        let rd = self
            .rd
            .or(rd_fallback)
            .ok_or_else(|| AppError::Parameter("missing --rd".into()))?;
        let p = match (self.lambda_d, self.mean_points) {
            (Some(ld), None) => McpParams::with_lambda_d(self.dim, lambda_p, ld, rd)?,
            (None, Some(m)) => McpParams::with_mean_points(self.dim, lambda_p, m, rd)?,
            (Some(_), Some(_)) => {
                return Err(AppError::Parameter(
                    "give either --lambda-d or --mean-points, not both".into(),
                ))
            }
            (None, None) => {
                return Err(AppError::Parameter(
                    "missing --lambda-d or --mean-points".into(),
                ))
            }
        };
        Ok(p)
    }
}

/// Radius grid; `r_max` defaults to where the exact CD CDF reaches 0.999.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Smallest radius.
    pub r_min: f64,
    /// Largest radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    /// Number of points, at least 2; each command has its own default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// Point placement.
    pub spacing: SpacingArg,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            r_min: 0.0,
            r_max: None,
            steps: None,
            spacing: SpacingArg::Linear,
        }
    }
}

/// Monte Carlo settings; `r_max` comes from the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    /// Realizations per curve.
    pub samples: u64,
    /// Base seed.
    pub seed: u64,
    /// Window radius as a multiple of `r_max + r_d`.
    pub margin_factor: f64,
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            margin_factor: 1.0,
        }
    }
}

/// Quadrature tolerance for the outer integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    /// Absolute tolerance.
    pub abs: f64,
    /// Relative tolerance.
    pub rel: f64,
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        let t = Tolerance::DEFAULT;
        Self {
            abs: t.abs,
            rel: t.rel,
        }
    }
}

impl ToleranceSpec {
    /// Checked core tolerance.
    pub fn build(&self) -> AppResult<Tolerance> {
        Ok(Tolerance::new(self.abs, self.rel)?)
    }
}

/// Which bounds and metrics a deviation sweep evaluates; empty lists mean
/// all of them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Bound columns such as `CD_ub1`.
    #[serde(default)]
    pub bounds: Vec<String>,
    /// Metric tags `KS`, `Avg` or `KL`.
    #[serde(default)]
    pub metrics: Vec<String>,
    /// Points of the base radius grid per cluster radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
}

/// Where and how to write results; no path means standard output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Output file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// File format.
    pub format: Format,
}

/// Everything one invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// What to compute.
    pub command: Command,
    /// Worker threads; all cores when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Validation suite for `validate`; all suites when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    /// Process parameters.
    #[serde(default)]
    pub params: ParamSpec,
    /// Radius grid, or the `r_d` grid for `deviation`.
    #[serde(default)]
    pub grid: GridSpec,
    /// Monte Carlo settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSpec>,
    /// Deviation sweep selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    /// Outer quadrature tolerance.
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    /// Output destination.
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunSpec {
    /// Defaults for `command`.
    pub fn new(command: Command) -> Self {
        Self {
            command,
            threads: None,
            suite: None,
            params: ParamSpec::default(),
            grid: GridSpec::default(),
            sim: None,
            sweep: None,
            tolerance: ToleranceSpec::default(),
            output: OutputSpec::default(),
        }
    }

    /// Parses a configuration document.
    pub fn from_toml(text: &str) -> AppResult<Self> {
        toml::from_str(text).map_err(|e| AppError::Parameter(format!("config: {}", e.message())))
    }

    /// Reads a configuration file.
    pub fn load(path: &Path) -> AppResult<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Serializes to a configuration document.
    pub fn to_toml(&self) -> AppResult<String> {
        toml::to_string(self).map_err(|e| AppError::Parameter(format!("config: {e}")))
    }

    /// Checks the grid invariants that do not need the parameters.
    pub fn validate(&self) -> AppResult<()> {
        if self.grid.steps.is_some_and(|s| s < 2) {
            return Err(AppError::Parameter("steps must be at least 2".into()));
        }
        if let Some(r_max) = self.grid.r_max {
            if !(self.grid.r_min < r_max) {
                return Err(AppError::Parameter("r_min must be below r_max".into()));
            }
        }
        if !(self.grid.r_min >= 0.0) {
            return Err(AppError::Parameter("r_min must be nonnegative".into()));
        }
        if self.threads == Some(0) {
            return Err(AppError::Parameter("threads must be at least 1".into()));
        }
        self.tolerance.build()?;
        Ok(())
    }
}
