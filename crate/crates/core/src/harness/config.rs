//! Experiment configuration documents.
//!
//! Configs are TOML. Top-level keys `seed` and `T`, then the sections
//! `[objective]`, `[start]`, `[schedule]`, `[adaptive]`, `[audit]` and
//! `[output]`. Unknown keys are rejected. See `docs/config.md` for the
//! full grammar.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::objectives::{linear_spectrum, ObjectiveKind};
use crate::schedules::ScheduleKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub objective: ObjectiveConfig,
    pub start: StartConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveConfig>,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveConfig {
    pub kind: String,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    /// `[min, max]`, expanded to evenly spaced eigenvalues.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<[f64; 2]>,
    /// Leading zero eigenvalues prepended to `spectrum` (singular-quadratic only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_eigenvalues: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l1_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star: Option<Vec<f64>>,
    /// Draw the centre uniformly from the ball of this radius around the origin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_star_radius: Option<f64>,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    /// Uniform direction at exactly this distance from the objective's centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
    /// Uniform in the ball of this radius around the objective's centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub name: String,
    /// Overrides the objective's `f*` for `polyak`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_star: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_tilde: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl ScheduleConfig {
    pub fn named(kind: ScheduleKind) -> Self {
        Self {
            name: kind.as_str().to_owned(),
            f_star: None,
            f_tilde: None,
            eta: None,
            alpha: None,
            scale: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpochCount {
    Fixed(usize),
    Named(AutoEpochs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoEpochs {
    Auto,
}

impl Default for EpochCount {
    fn default() -> Self {
        EpochCount::Named(AutoEpochs::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveConfig {
    /// `K`, or `"auto"` for enough halvings to reach `target`.
    #[serde(default)]
    pub epochs: EpochCount,
    pub f_tilde: f64,
    /// Accuracy used by `epochs = "auto"`; defaults to the γ = 1/2 bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    /// Random points for the elementary-property audit.
    #[serde(default = "default_audit_points")]
    pub points: usize,
}

fn default_audit_points() -> usize {
    200
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            points: default_audit_points(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Text,
    Both,
}

impl FromStr for ReportFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            "both" => Ok(ReportFormat::Both),
            other => Err(HarnessError::field(
                "output.report",
                format!("unknown format `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "default_format")]
    pub report: ReportFormat,
    #[serde(default)]
    pub svg: bool,
    /// Adds wall-clock duration to the JSON report (which then stops being reproducible).
    #[serde(default)]
    pub include_timing: bool,
}

fn default_format() -> ReportFormat {
    ReportFormat::Both
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            report: default_format(),
            svg: false,
            include_timing: false,
        }
    }
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    parse_config_with_overrides(text, &[])
}

/// Parses a config and applies `key.path=value` overrides before validation.
///
/// Override values are read as TOML literals, falling back to a bare string.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> Result<ExperimentConfig, HarnessError> {
    let mut table: toml::Table = text.parse().map_err(|e| syntax_error(text, &e))?;
    let config = if overrides.is_empty() {
        // straight from the text so that unknown keys report a line
        toml::from_str::<ExperimentConfig>(text).map_err(|e| syntax_error(text, &e))?
    } else {
        for item in overrides {
            apply_override(&mut table, item)?;
        }
        ExperimentConfig::deserialize(toml::Value::Table(table)).map_err(|e| HarnessError::Config {
            line: None,
            message: e.message().trim().to_owned(),
        })?
    };
    config.validate()?;
    Ok(config)
}

fn syntax_error(text: &str, err: &toml::de::Error) -> HarnessError {
    let line = err
        .span()
        .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1);
    HarnessError::Config {
        line,
        message: err.message().trim().to_owned(),
    }
}

/// Sets `path` (dot-separated) in `table` to the parsed `value`.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), HarnessError> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| HarnessError::field("--set", format!("expected key=value, got `{item}`")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()));

    let keys: Vec<&str> = path.split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields at least one key");
    let mut cursor = table;
    for key in parents {
        let entry = cursor
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry
            .as_table_mut()
            .ok_or_else(|| HarnessError::field("--set", format!("`{key}` is not a section")))?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    /// Semantic checks that the document grammar cannot express.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.horizon < 1 {
            return Err(HarnessError::field("T", "T must be ≥ 1"));
        }
        self.objective.kind()?;

        let start_modes = [
            self.start.point.is_some(),
            self.start.distance.is_some(),
            self.start.radius.is_some(),
        ];
        match start_modes.iter().filter(|b| **b).count() {
            1 => {}
            0 => {
                return Err(HarnessError::field(
                    "start",
                    "one of point, distance or radius is required",
                ))
            }
            _ => {
                return Err(HarnessError::field(
                    "start",
                    "point, distance and radius are mutually exclusive",
                ))
            }
        }
        if let Some(point) = &self.start.point {
            if point.len() != self.objective.dimension {
                return Err(HarnessError::field(
                    "start.point",
                    format!("expected {} coordinates, got {}", self.objective.dimension, point.len()),
                ));
            }
        }
        for (name, v) in [
            ("start.distance", self.start.distance),
            ("start.radius", self.start.radius),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(HarnessError::field(name, "must be finite and nonnegative"));
                }
            }
        }

        match (&self.schedule, &self.adaptive) {
            (None, None) => {
                return Err(HarnessError::field(
                    "schedule",
                    "a [schedule] or [adaptive] section is required",
                ))
            }
            (Some(s), Some(_)) if s.kind()? != ScheduleKind::PolyakLowerBound => {
                return Err(HarnessError::field(
                    "schedule.name",
                    "adaptive runs use polyak-lb; drop [schedule] or set name = \"polyak-lb\"",
                ))
            }
            (Some(s), None) => s.check()?,
            _ => {}
        }
        if let Some(adaptive) = &self.adaptive {
            if let EpochCount::Fixed(0) = adaptive.epochs {
                return Err(HarnessError::field("adaptive.epochs", "K must be ≥ 1"));
            }
            if let Some(target) = adaptive.target {
                if !(target > 0.0) {
                    return Err(HarnessError::field("adaptive.target", "must be positive"));
                }
            }
        }
        Ok(())
    }
}

impl ScheduleConfig {
    pub fn kind(&self) -> Result<ScheduleKind, HarnessError> {
        self.name
            .parse()
            .map_err(|e: crate::Error| HarnessError::field("schedule.name", e.to_string()))
    }

    fn check(&self) -> Result<(), HarnessError> {
        if self.kind()? == ScheduleKind::PolyakLowerBound && self.f_tilde.is_none() {
            return Err(HarnessError::field("schedule.f_tilde", "missing f_tilde"));
        }
        Ok(())
    }
}

impl ObjectiveConfig {
    /// The objective kind with its coefficients resolved.
    pub fn kind(&self) -> Result<ObjectiveKind, HarnessError> {
        let need = |name: &'static str, v: Option<f64>| {
            v.ok_or_else(|| HarnessError::field(name, format!("missing {}", name.trim_start_matches("objective."))))
        };
        match self.kind.as_str() {
            "quadratic" => Ok(ObjectiveKind::Quadratic {
                eigenvalues: self.eigenvalues(false)?,
            }),
            "singular-quadratic" => Ok(ObjectiveKind::SingularQuadratic {
                eigenvalues: self.eigenvalues(true)?,
            }),
            "scaled-euclidean-norm" => Ok(ObjectiveKind::ScaledEuclideanNorm {
                scale: need("objective.scale", self.scale)?,
            }),
            "strongly-convex-plus-l1" => Ok(ObjectiveKind::StronglyConvexPlusL1 {
                quadratic: need("objective.quadratic", self.quadratic)?,
                l1_weight: need("objective.l1_weight", self.l1_weight)?,
            }),
            other => Err(HarnessError::field(
                "objective.kind",
                format!(
                    "unknown kind `{other}` (expected quadratic, scaled-euclidean-norm, singular-quadratic or strongly-convex-plus-l1)"
                ),
            )),
        }
    }

    fn eigenvalues(&self, singular: bool) -> Result<Vec<f64>, HarnessError> {
        match (&self.eigenvalues, self.spectrum) {
            (Some(_), Some(_)) => Err(HarnessError::field(
                "objective.eigenvalues",
                "eigenvalues and spectrum are mutually exclusive",
            )),
            (Some(e), None) => {
                if self.zero_eigenvalues.is_some() {
                    return Err(HarnessError::field(
                        "objective.zero_eigenvalues",
                        "only valid together with spectrum",
                    ));
                }
                Ok(e.clone())
            }
            (None, Some([min, max])) => {
                let zeros = self.zero_eigenvalues.unwrap_or(0);
                if zeros > 0 && !singular {
                    return Err(HarnessError::field(
                        "objective.zero_eigenvalues",
                        "only valid for singular-quadratic",
                    ));
                }
                if zeros >= self.dimension {
                    return Err(HarnessError::field(
                        "objective.zero_eigenvalues",
                        "must leave at least one positive eigenvalue",
                    ));
                }
                let mut out = vec![0.0; zeros];
                out.extend(linear_spectrum(min, max, self.dimension - zeros));
                Ok(out)
            }
            (None, None) => Err(HarnessError::field(
                "objective.eigenvalues",
                "missing eigenvalues or spectrum",
            )),
        }
    }
}
