use std::fmt::Write as _;
use std::thread;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ScheduleConfig};
use super::experiment::run_experiment;
use super::HarnessError;
use crate::schedules::ScheduleKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub schedule: String,
    pub best_value: f64,
    pub best_index: usize,
    pub min_h: f64,
    pub steps_taken: usize,
    pub stopped_early: bool,
    /// Whether every enforced verdict and audit of the run passed.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub horizon: usize,
    pub f_star: f64,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, kind: ScheduleKind) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.schedule == kind.as_str())
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "T={} f*={:e}", self.horizon, self.f_star);
        let _ = writeln!(
            out,
            "{:<12} {:>24} {:>10} {:>24} {:>8}  audits",
            "schedule", "best_value", "best_t", "min_h", "steps"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>24.16e} {:>10} {:>24.16e} {:>8}  {}",
                r.schedule,
                r.best_value,
                r.best_index,
                r.min_h,
                r.steps_taken,
                if r.passed { "PASS" } else { "FAIL" }
            );
        }
        out
    }
}

/// Runs `config` once per schedule, concurrently, and tabulates the results.
///
/// A schedule matching the config's own `[schedule]` section keeps its
/// parameters; the others use their objective-derived defaults.
pub fn compare_schedules(
    config: &ExperimentConfig,
    schedules: &[ScheduleKind],
) -> Result<ComparisonReport, HarnessError> {
    if schedules.is_empty() {
        return Err(HarnessError::field("schedules", "at least one schedule is required"));
    }
    let configs: Vec<ExperimentConfig> = schedules
        .iter()
        .map(|&kind| {
            let mut cfg = config.clone();
            cfg.adaptive = None;
            cfg.schedule = match &config.schedule {
                Some(s) if s.name == kind.as_str() => Some(s.clone()),
                _ => Some(ScheduleConfig::named(kind)),
            };
            cfg.validate().map(|_| cfg)
        })
        .collect::<Result<_, _>>()?;

    let outcomes = thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || run_experiment(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect::<Vec<_>>()
    });

    let mut rows = Vec::with_capacity(outcomes.len());
    let mut f_star = f64::NAN;
    for (kind, outcome) in schedules.iter().zip(outcomes) {
        let report = outcome?.report;
        f_star = report.objective.f_star;
        rows.push(ComparisonRow {
            schedule: kind.as_str().to_owned(),
            best_value: report.summary.best_value,
            best_index: report.summary.best_index,
            min_h: report.summary.min_h,
            steps_taken: report.summary.steps_taken,
            stopped_early: report.summary.stopped_early,
            passed: report.passed,
        });
    }
    Ok(ComparisonReport {
        horizon: config.horizon,
        f_star,
        rows,
    })
}
