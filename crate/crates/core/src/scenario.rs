//! Scenario files.
//!
//! A scenario is a single JSON document with SI units in the field names:
//!
//! ```json
//! {
//!   "frequency_hz": 2.4868e9,
//!   "d0_m": 5.0, "da_m": 0.06, "h_m": 0.9, "M": 2,
//!   "target": { "ay_m": 0.45, "az_m": 0.9, "theta_rad": 0.0, "x_m": 2.5, "y_m": 0.0 },
//!   "sigma_n": 0.0,
//!   "gamma_grid": { "start_rad": 0.0, "stop_rad": 3.141592653589793, "step_rad": 0.0017453292519943296 },
//!   "quadrature": { "panel_max_side_m": 0.03, "points_per_panel": 4, "rel_tol": 1e-6 },
//!   "seed": 0,
//!   "sweep": { "axis": "target_y", "values": [-0.4, -0.2, 0.0, 0.2, 0.4] }
//! }
//! ```
//!
//! `target`, `sigma_n`, `gamma_grid`, `quadrature`, `seed` and `sweep` may be
//! omitted. Without a target the scene is empty.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::doa::{GammaGrid, DEFAULT_GAMMA_STEP};
use crate::em_model::{NoiseModel, Occupancy};
use crate::error::ModelError;
use crate::geometry::{wavelength_for, LinkLayout, TargetSheet};
use crate::quadrature::QuadratureSpec;

/// Quantity varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    TargetY,
    TargetX,
    Theta,
}

impl SweepAxis {
    /// CSV column name of the swept value.
    pub fn column(&self) -> &'static str {
        match self {
            SweepAxis::TargetY => "target_y_m",
            SweepAxis::TargetX => "target_x_m",
            SweepAxis::Theta => "theta_rad",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").to_ascii_lowercase().as_str() {
            "target_y" | "y" => Ok(SweepAxis::TargetY),
            "target_x" | "x" => Ok(SweepAxis::TargetX),
            "theta" => Ok(SweepAxis::Theta),
            other => Err(format!(
                "unknown sweep axis `{other}` (expected target_y, target_x or theta)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    frequency_hz: f64,
    d0_m: f64,
    da_m: f64,
    h_m: f64,
    #[serde(rename = "M")]
    half_size: i64,
    target: Option<TargetFile>,
    sigma_n: Option<f64>,
    gamma_grid: Option<GridFile>,
    quadrature: Option<QuadratureFile>,
    seed: Option<u64>,
    sweep: Option<SweepBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetFile {
    ay_m: f64,
    az_m: f64,
    #[serde(default)]
    theta_rad: f64,
    x_m: f64,
    y_m: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    start_rad: Option<f64>,
    stop_rad: Option<f64>,
    step_rad: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadratureFile {
    panel_max_side_m: Option<f64>,
    points_per_panel: Option<usize>,
    rel_tol: Option<f64>,
}

/// One failing field of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldIssue {
    pub field: &'static str,
    pub message: String,
}

#[derive(Debug)]
pub enum ScenarioError {
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    Invalid(Vec<FieldIssue>),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Io { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            ScenarioError::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            ScenarioError::Invalid(issues) => {
                write!(f, "invalid scenario:")?;
                for issue in issues {
                    write!(f, "\n  {}: {}", issue.field, issue.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ScenarioError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            ScenarioError::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl ScenarioError {
    /// Names of the failing fields, for validation errors.
    pub fn fields(&self) -> Vec<&'static str> {
        match self {
            ScenarioError::Invalid(issues) => issues.iter().map(|i| i.field).collect(),
            _ => Vec::new(),
        }
    }
}

/// A fully validated scenario with the wavelength derived from the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frequency_hz: f64,
    pub layout: LinkLayout,
    pub target: Option<TargetSheet>,
    pub sigma_n: f64,
    pub grid: GammaGrid,
    pub quadrature: QuadratureSpec,
    pub seed: u64,
    pub sweep: Option<SweepBlock>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        file.validate()
    }

    pub fn wavelength(&self) -> f64 {
        self.layout.wavelength()
    }

    pub fn occupancy(&self) -> Occupancy {
        Occupancy::from_optional(self.target)
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel::new(self.sigma_n, self.seed).expect("sigma_n validated on load")
    }

    /// Non-fatal diagnostics, e.g. tight array spacing.
    pub fn warnings(&self) -> Vec<String> {
        self.layout.coupling_warning().into_iter().collect()
    }
}

struct Issues(Vec<FieldIssue>);

impl Issues {
    fn push(&mut self, field: &'static str, message: impl Into<String>) {
        self.0.push(FieldIssue {
            field,
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &'static str, value: f64) {
        if !(value.is_finite() && value > 0.0) {
            self.push(field, format!("must be finite and > 0, got {value}"));
        }
    }

    fn finite(&mut self, field: &'static str, value: f64) {
        if !value.is_finite() {
            self.push(field, format!("must be finite, got {value}"));
        }
    }

    fn model_error(&mut self, field: &'static str, err: ModelError) {
        let message = match err {
            ModelError::InvalidParameter { reason, .. } => reason,
            other => other.to_string(),
        };
        self.push(field, message);
    }
}

impl ScenarioFile {
    fn validate(self) -> Result<Scenario, ScenarioError> {
        let mut issues = Issues(Vec::new());

        issues.positive("frequency_hz", self.frequency_hz);
        issues.positive("d0_m", self.d0_m);
        issues.positive("da_m", self.da_m);
        if !(self.h_m.is_finite() && self.h_m >= 0.0) {
            issues.push("h_m", format!("must be finite and >= 0, got {}", self.h_m));
        }
        let half_size = match u32::try_from(self.half_size) {
            Ok(m) if m <= 512 => m,
            _ => {
                issues.push("M", format!("must be an integer in [0, 512], got {}", self.half_size));
                0
            }
        };

        if let Some(t) = &self.target {
            issues.positive("target.ay_m", t.ay_m);
            issues.positive("target.az_m", t.az_m);
            if !(t.theta_rad.is_finite() && t.theta_rad.abs() <= std::f64::consts::FRAC_PI_2) {
                issues.push(
                    "target.theta_rad",
                    format!("must lie in [-pi/2, pi/2], got {}", t.theta_rad),
                );
            }
            issues.finite("target.x_m", t.x_m);
            issues.finite("target.y_m", t.y_m);
        }

        let sigma_n = self.sigma_n.unwrap_or(0.0);
        if !(sigma_n.is_finite() && sigma_n >= 0.0) {
            issues.push("sigma_n", format!("must be finite and >= 0, got {sigma_n}"));
        }

        let g = self.gamma_grid.unwrap_or_default();
        let grid = GammaGrid::new(
            g.start_rad.unwrap_or(0.0),
            g.stop_rad.unwrap_or(std::f64::consts::PI),
            g.step_rad.unwrap_or(DEFAULT_GAMMA_STEP),
        )
        .map_err(|e| issues.model_error("gamma_grid", e))
        .ok();

        let q = self.quadrature.unwrap_or_default();
        let wavelength = wavelength_for(self.frequency_hz);
        let defaults = QuadratureSpec::for_wavelength(wavelength);
        let quadrature = QuadratureSpec {
            panel_max_side: q.panel_max_side_m.unwrap_or(defaults.panel_max_side),
            points_per_panel: q.points_per_panel.unwrap_or(defaults.points_per_panel),
            rel_tol: q.rel_tol.unwrap_or(defaults.rel_tol),
        };
        if self.frequency_hz.is_finite() && self.frequency_hz > 0.0 {
            if let Err(e) = quadrature.validate() {
                issues.push("quadrature", e.to_string());
            }
        }

        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                issues.push("sweep.values", "must not be empty");
            } else if sweep.values.iter().any(|v| !v.is_finite()) {
                issues.push("sweep.values", "must all be finite");
            }
        }

        if !issues.0.is_empty() {
            return Err(ScenarioError::Invalid(issues.0));
        }

        // Inputs are individually valid here; the constructors re-check.
        let layout = LinkLayout::new(wavelength, self.d0_m, self.da_m, half_size, self.h_m)
            .map_err(|e| single_issue("layout", e))?;
        let target = self
            .target
            .map(|t| TargetSheet::new(t.ay_m, t.az_m, t.theta_rad, t.x_m, t.y_m))
            .transpose()
            .map_err(|e| single_issue("target", e))?;

        Ok(Scenario {
            frequency_hz: self.frequency_hz,
            layout,
            target,
            sigma_n,
            grid: grid.expect("grid issues reported above"),
            quadrature,
            seed: self.seed.unwrap_or(0),
            sweep: self.sweep,
        })
    }
}

fn single_issue(field: &'static str, err: ModelError) -> ScenarioError {
    let mut issues = Issues(Vec::new());
    issues.model_error(field, err);
    ScenarioError::Invalid(issues.0)
}
