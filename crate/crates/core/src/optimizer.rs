//! The gradient descent loop, lower-bound restarts, and best-iterate tracking.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::objectives::{gap_from_value, Objective};
use crate::schedules::{ScheduleRule, StepDecision};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Number of steps `T`.
    pub horizon: usize,
    pub schedule: ScheduleRule,
    pub x0: Vec<f64>,
    /// Keep every iterate in [`RunResult::points`].
    pub record_points: bool,
}

impl RunConfig {
    pub fn new(horizon: usize, schedule: ScheduleRule, x0: Vec<f64>) -> Self {
        Self {
            horizon,
            schedule,
            x0,
            record_points: false,
        }
    }

    pub fn with_points(mut self) -> Self {
        self.record_points = true;
        self
    }
}

/// Scalars measured at one iterate. The record at `t` carries the step
/// `eta` taken from `x_t`; the final record has `eta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub t: usize,
    pub f: f64,
    pub h: Option<f64>,
    pub d: Option<f64>,
    pub grad_sq_norm: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub best_index: usize,
    pub trajectory: Vec<TrajectoryRecord>,
    /// Every iterate `x_0, x_1, …` when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    pub steps_taken: usize,
    pub stopped_early: bool,
}

impl RunResult {
    /// `min_t h_t`, if the run tracked suboptimality.
    pub fn min_suboptimality(&self) -> Option<f64> {
        self.trajectory
            .iter()
            .map(|r| r.h)
            .try_fold(f64::INFINITY, |acc, h| h.map(|h| acc.min(h)))
    }
}

/// `x - eta·grad`.
pub fn gd_step(x: &[f64], grad: &[f64], eta: f64) -> Result<Vec<f64>> {
    if x.len() != grad.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: grad.len(),
        });
    }
    Ok(x.iter().zip(grad).map(|(xi, gi)| xi - eta * gi).collect())
}

/// Runs `T` steps of gradient descent under `config.schedule`.
///
/// The final iterate `x_T` is evaluated and is a best-iterate candidate.
/// A vanishing gradient ends the run early.
pub fn run_gd<O: Objective + ?Sized>(objective: &O, config: &RunConfig) -> Result<RunResult> {
    match run_until_error(objective, config)? {
        (result, None) => Ok(result),
        (_, Some(err)) => Err(err),
    }
}

struct Measurement {
    f: f64,
    grad: Vec<f64>,
    grad_sq_norm: f64,
    h: Option<f64>,
    d: Option<f64>,
}

fn measure<O: Objective + ?Sized>(objective: &O, x: &[f64]) -> Result<Measurement> {
    let f = objective.evaluate(x)?;
    let grad = objective.gradient(x)?;
    let grad_sq_norm = linalg::norm_sq(&grad);
    let (h, d) = match (objective.optimal_value(), objective.minimizer()) {
        (Some(f_star), Some(x_star)) => (
            Some(gap_from_value(f, f_star)?),
            Some(linalg::dist_sq(x, x_star).sqrt()),
        ),
        _ => (None, None),
    };
    Ok(Measurement {
        f,
        grad,
        grad_sq_norm,
        h,
        d,
    })
}

/// Like [`run_gd`], but a schedule error mid-run yields the trajectory so far
/// alongside the error. Configuration errors are still returned as `Err`.
pub(crate) fn run_until_error<O: Objective + ?Sized>(
    objective: &O,
    config: &RunConfig,
) -> Result<(RunResult, Option<Error>)> {
    if config.horizon == 0 {
        return Err(Error::invalid("T", "must be at least 1"));
    }
    if config.x0.len() != objective.dimension() {
        return Err(Error::DimensionMismatch {
            expected: objective.dimension(),
            actual: config.x0.len(),
        });
    }
    config.schedule.validate()?;

    let mut x = config.x0.clone();
    let mut trajectory = Vec::with_capacity(config.horizon + 1);
    let mut points = config.record_points.then(Vec::new);
    let mut best_point = x.clone();
    let mut best_value = f64::INFINITY;
    let mut best_index = 0;
    let mut steps_taken = 0;
    let mut stopped_early = false;
    let mut failure = None;

    for t in 0..=config.horizon {
        let m = measure(objective, &x).map_err(|e| at(t, e))?;
        if m.f < best_value {
            best_value = m.f;
            best_index = t;
            best_point.clone_from(&x);
        }
        let mut record = TrajectoryRecord {
            t,
            f: m.f,
            h: m.h,
            d: m.d,
            grad_sq_norm: m.grad_sq_norm,
            eta: 0.0,
        };
        if let Some(points) = points.as_mut() {
            points.push(x.clone());
        }
        if t == config.horizon {
            trajectory.push(record);
            break;
        }
        match config.schedule.step_size(t, m.f, m.grad_sq_norm) {
            Ok(StepDecision::Converged) => {
                stopped_early = true;
                trajectory.push(record);
                break;
            }
            Ok(StepDecision::Step { eta }) => {
                record.eta = eta;
                trajectory.push(record);
                x = gd_step(&x, &m.grad, eta)?;
                steps_taken += 1;
            }
            Err(e) => {
                trajectory.push(record);
                failure = Some(at(t, e));
                break;
            }
        }
    }

    Ok((
        RunResult {
            best_point,
            best_value,
            best_index,
            trajectory,
            points,
            steps_taken,
            stopped_early,
        },
        failure,
    ))
}

fn at(iteration: usize, source: Error) -> Error {
    Error::AtIteration {
        iteration,
        source: Box::new(source),
    }
}

/// One restart of the lower-bound subroutine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochResult {
    /// The lower bound `f̃_k` this epoch ran with.
    pub f_tilde: f64,
    pub run: RunResult,
    /// Set when the epoch was cut short by a lower-bound violation.
    pub aborted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveResult {
    /// Best point over all epochs.
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub best_epoch: usize,
    pub epochs: Vec<EpochResult>,
    /// `f̃_0, f̃_1, …`; one longer than `epochs` unless a run was aborted.
    pub lower_bounds: Vec<f64>,
    pub final_f_tilde: f64,
    pub steps_taken: usize,
    /// The violation that stopped the restarts early, if any.
    pub violation: Option<String>,
}

/// Restarts lower-bound Polyak descent from `x0` for `epochs` epochs, tightening
/// the lower bound after each to `(f(x̄_k) + f̃_k) / 2`.
///
/// A lower-bound violation inside an epoch stops all further epochs; the best
/// point seen so far is still returned.
pub fn adaptive_polyak<O: Objective + ?Sized>(
    objective: &O,
    x0: &[f64],
    horizon: usize,
    epochs: usize,
    f_tilde_0: f64,
) -> Result<AdaptiveResult> {
    if epochs == 0 {
        return Err(Error::invalid("K", "must be at least 1"));
    }
    if !f_tilde_0.is_finite() {
        return Err(Error::invalid("f_tilde", "must be finite"));
    }

    let mut f_tilde = f_tilde_0;
    let mut lower_bounds = vec![f_tilde];
    let mut runs = Vec::with_capacity(epochs);
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut steps_taken = 0;
    let mut violation = None;

    for k in 0..epochs {
        let config = RunConfig::new(horizon, ScheduleRule::PolyakLowerBound { f_tilde }, x0.to_vec());
        let (run, failure) = run_until_error(objective, &config)?;
        steps_taken += run.steps_taken;
        if best.as_ref().is_none_or(|(v, _, _)| run.best_value < *v) {
            best = Some((run.best_value, k, run.best_point.clone()));
        }
        let aborted = failure.map(|e| format!("epoch {k}: {e}"));
        let next = 0.5 * (run.best_value + f_tilde);
        runs.push(EpochResult {
            f_tilde,
            run,
            aborted: aborted.clone(),
        });
        if aborted.is_some() {
            violation = aborted;
            break;
        }
        f_tilde = next;
        lower_bounds.push(f_tilde);
    }

    let (best_value, best_epoch, best_point) = best.expect("at least one epoch ran");
    Ok(AdaptiveResult {
        best_point,
        best_value,
        best_epoch,
        epochs: runs,
        lower_bounds,
        final_f_tilde: f_tilde,
        steps_taken,
        violation,
    })
}

/// Number of halvings needed to shrink `initial_gap` to `target`, at least one.
pub fn epochs_for_gap(initial_gap: f64, target: f64) -> Result<usize> {
    if !(initial_gap > 0.0 && initial_gap.is_finite()) {
        return Err(Error::invalid("initial_gap", "must be positive and finite"));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::invalid("target", "must be positive and finite"));
    }
    let halvings = (initial_gap / target).log2().ceil();
    Ok(if halvings < 1.0 { 1 } else { halvings as usize })
}
