//! Step-size policies computed from per-iterate measurements.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::GAP_TOLERANCE;

/// Squared gradient norm below which the iterate is treated as stationary.
pub const CONVERGENCE_GRAD_SQ: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ScheduleRule {
    /// `η = (f - f*) / ‖∇‖²`.
    #[serde(rename = "polyak")]
    PolyakExact { f_star: f64 },
    /// `η = (f - f̃) / (2‖∇‖²)` for a lower bound `f̃ ≤ f*`.
    #[serde(rename = "polyak-lb")]
    PolyakLowerBound { f_tilde: f64 },
    #[serde(rename = "constant")]
    Constant { eta: f64 },
    /// `η = 1 / (α (t + 1))`.
    #[serde(rename = "inv-t")]
    InverseT { alpha: f64 },
    /// `η = scale / √(t + 1)`.
    #[serde(rename = "inv-sqrt-t")]
    InverseSqrtT { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepDecision {
    Step {
        eta: f64,
    },
    /// The gradient vanished; no further step is defined.
    Converged,
}

impl ScheduleRule {
    pub fn kind(&self) -> ScheduleKind {
        match self {
            ScheduleRule::PolyakExact { .. } => ScheduleKind::Polyak,
            ScheduleRule::PolyakLowerBound { .. } => ScheduleKind::PolyakLowerBound,
            ScheduleRule::Constant { .. } => ScheduleKind::Constant,
            ScheduleRule::InverseT { .. } => ScheduleKind::InverseT,
            ScheduleRule::InverseSqrtT { .. } => ScheduleKind::InverseSqrtT,
        }
    }

    /// Checks the rule's own parameters (positivity, finiteness).
    pub fn validate(&self) -> Result<()> {
        let (name, value, positive) = match *self {
            ScheduleRule::PolyakExact { f_star } => ("f_star", f_star, false),
            ScheduleRule::PolyakLowerBound { f_tilde } => ("f_tilde", f_tilde, false),
            ScheduleRule::Constant { eta } => ("eta", eta, true),
            ScheduleRule::InverseT { alpha } => ("alpha", alpha, true),
            ScheduleRule::InverseSqrtT { scale } => ("scale", scale, true),
        };
        if !value.is_finite() {
            return Err(Error::invalid(name, format!("must be finite, got {value}")));
        }
        if positive && value <= 0.0 {
            return Err(Error::invalid(name, format!("must be positive, got {value}")));
        }
        Ok(())
    }

    /// The step size at iteration `t` given `f(x_t)` and `‖∇f(x_t)‖²`.
    pub fn step_size(&self, t: usize, f_value: f64, grad_sq_norm: f64) -> Result<StepDecision> {
        if !(grad_sq_norm >= 0.0) {
            return Err(Error::invalid(
                "grad_sq_norm",
                format!("must be nonnegative, got {grad_sq_norm}"),
            ));
        }
        if grad_sq_norm < CONVERGENCE_GRAD_SQ {
            return Ok(StepDecision::Converged);
        }
        let eta = match *self {
            ScheduleRule::PolyakExact { f_star } => {
                let gap = f_value - f_star;
                if gap < -GAP_TOLERANCE {
                    return Err(Error::FStarNotLowerBound { gap });
                }
                gap.max(0.0) / grad_sq_norm
            }
            ScheduleRule::PolyakLowerBound { f_tilde } => {
                let gap = f_value - f_tilde;
                if gap < -GAP_TOLERANCE {
                    return Err(Error::FTildeExceedsValue { gap });
                }
                gap.max(0.0) / (2.0 * grad_sq_norm)
            }
            ScheduleRule::Constant { eta } => eta,
            ScheduleRule::InverseT { alpha } => 1.0 / (alpha * (t as f64 + 1.0)),
            ScheduleRule::InverseSqrtT { scale } => scale / (t as f64 + 1.0).sqrt(),
        };
        Ok(StepDecision::Step { eta })
    }
}

/// Schedule names accepted on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleKind {
    #[serde(rename = "polyak")]
    Polyak,
    #[serde(rename = "polyak-lb")]
    PolyakLowerBound,
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "inv-t")]
    InverseT,
    #[serde(rename = "inv-sqrt-t")]
    InverseSqrtT,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 5] = [
        ScheduleKind::Polyak,
        ScheduleKind::PolyakLowerBound,
        ScheduleKind::Constant,
        ScheduleKind::InverseT,
        ScheduleKind::InverseSqrtT,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleKind::Polyak => "polyak",
            ScheduleKind::PolyakLowerBound => "polyak-lb",
            ScheduleKind::Constant => "constant",
            ScheduleKind::InverseT => "inv-t",
            ScheduleKind::InverseSqrtT => "inv-sqrt-t",
        }
    }
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScheduleKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            Error::invalid(
                "schedule",
                format!("unknown schedule `{s}` (expected polyak, polyak-lb, constant, inv-t or inv-sqrt-t)"),
            )
        })
    }
}
