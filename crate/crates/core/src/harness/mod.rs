//! Experiment runner: configs in, audited reports and trajectories out.

mod compare;
mod config;
mod experiment;
mod output;
mod verify;

use thiserror::Error;

pub use compare::{compare_schedules, ComparisonReport, ComparisonRow};
pub use config::{
    apply_override, parse_config, parse_config_with_overrides, AdaptiveConfig, AuditConfig, AutoEpochs, EpochCount,
    ExperimentConfig, ObjectiveConfig, OutputConfig, ReportFormat, ScheduleConfig, StartConfig,
};
pub use experiment::{
    prepare, resolve_schedule, run_experiment, AdaptiveSummary, AuditOutcome, Audits, BoundsSection, ComplianceVerdict,
    ExperimentOutcome, ExperimentReport, ObjectiveSummary, Prepared, RunSummary,
};
pub use output::{
    emit_report, emit_trajectory_csv, read_trajectory_csv, render_svg, render_text_report, to_json, trajectory_csv,
    write_outputs, CSV_HEADER,
};
pub use verify::{verify, Regime, VerifyCheck, VerifyReport};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("invalid config field `{field}`: {message}")]
    Field { field: String, message: String },

    #[error(transparent)]
    Core(#[from] crate::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed trajectory CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
}

impl HarnessError {
    pub(crate) fn field(field: &str, message: impl Into<String>) -> Self {
        HarnessError::Field {
            field: field.to_owned(),
            message: message.into(),
        }
    }

    /// True for problems with the experiment description rather than its execution.
    pub fn is_usage(&self) -> bool {
        match self {
            HarnessError::Config { .. } | HarnessError::Field { .. } => true,
            HarnessError::Core(e) => matches!(
                e.root(),
                crate::Error::InvalidParameter { .. }
                    | crate::Error::DimensionMismatch { .. }
                    | crate::Error::InvalidGamma(_)
            ),
            _ => false,
        }
    }
}
