use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{EpochCount, ExperimentConfig, ScheduleConfig};
use super::HarnessError;
use crate::bounds::{
    self, b_t, check_a_sequence, check_descent_condition, check_elementary_properties, check_geometric_contraction,
    check_lemma1, r_t_gamma, BoundParams, BoundReport, Violation,
};
use crate::objectives::ObjectiveSpec;
use crate::optimizer::{
    adaptive_polyak, epochs_for_gap, run_gd, AdaptiveResult, RunConfig, RunResult, TrajectoryRecord,
};
use crate::sampling::{ball_samples, in_ball, on_sphere, seeded_rng};
use crate::schedules::{ScheduleKind, ScheduleRule};

/// Violations listed per audit in reports.
const LISTED_VIOLATIONS: usize = 10;

/// An experiment with all random draws made.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// The objective, with `x_star` bound to the start point.
    pub objective: ObjectiveSpec,
    pub x0: Vec<f64>,
    pub d0: f64,
    /// Gradient bound valid on the ball of radius `d0` around `x*`.
    pub g: f64,
    pub audit_samples: Vec<Vec<f64>>,
}

/// Builds the objective and start point.
///
/// The seed drives a single ChaCha8 stream: first the centre (when
/// `x_star_radius` is set), then the start point. Audit samples use the
/// stream seeded with `seed + 1`.
pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, HarnessError> {
    let obj = &config.objective;
    let dim = obj.dimension;
    let mut rng = seeded_rng(config.seed);
    let center = match (&obj.x_star, obj.x_star_radius) {
        (Some(_), Some(_)) => {
            return Err(HarnessError::field(
                "objective.x_star",
                "x_star and x_star_radius are mutually exclusive",
            ))
        }
        (Some(x), None) => x.clone(),
        (None, Some(r)) => in_ball(&mut rng, &vec![0.0; dim], r),
        (None, None) => vec![0.0; dim],
    };
    let base = ObjectiveSpec::new(obj.kind()?, dim, center, obj.offset)?;

    let start = &config.start;
    let x0 = match (&start.point, start.distance, start.radius) {
        (Some(p), _, _) => p.clone(),
        (None, Some(d), _) => on_sphere(&mut rng, base.center(), d),
        (None, None, Some(r)) => in_ball(&mut rng, base.center(), r),
        _ => {
            return Err(HarnessError::field(
                "start",
                "one of point, distance or radius is required",
            ))
        }
    };
    let objective = base.bind_to_start(&x0)?;
    let d0 = objective.distance_to_opt(&x0)?;
    let g = objective
        .lipschitz_g()
        .unwrap_or_else(|| objective.gradient_bound_on_ball(d0));
    let radius = if d0 > 0.0 { d0 } else { 1.0 };
    let audit_samples = ball_samples(
        config.seed.wrapping_add(1),
        objective.x_star(),
        radius,
        config.audit.points,
    );
    Ok(Prepared {
        objective,
        x0,
        d0,
        g,
        audit_samples,
    })
}

/// Turns a schedule section into a rule, filling defaults from the objective:
/// `constant` → `1/β`, `inv-t` → `α`, `inv-sqrt-t` → `d₀/(G√T)`.
pub fn resolve_schedule(
    schedule: &ScheduleConfig,
    prepared: &Prepared,
    horizon: usize,
) -> Result<ScheduleRule, HarnessError> {
    let objective = &prepared.objective;
    let rule = match schedule.kind()? {
        ScheduleKind::Polyak => ScheduleRule::PolyakExact {
            f_star: schedule.f_star.unwrap_or(objective.f_star()),
        },
        ScheduleKind::PolyakLowerBound => ScheduleRule::PolyakLowerBound {
            f_tilde: schedule
                .f_tilde
                .ok_or_else(|| HarnessError::field("schedule.f_tilde", "missing f_tilde"))?,
        },
        ScheduleKind::Constant => ScheduleRule::Constant {
            eta: match (schedule.eta, objective.beta()) {
                (Some(eta), _) => eta,
                (None, Some(beta)) => 1.0 / beta,
                (None, None) => {
                    return Err(HarnessError::field(
                        "schedule.eta",
                        "missing eta (no 1/β default for a nonsmooth objective)",
                    ))
                }
            },
        },
        ScheduleKind::InverseT => ScheduleRule::InverseT {
            alpha: match schedule.alpha {
                Some(a) => a,
                None if objective.alpha() > 0.0 => objective.alpha(),
                None => {
                    return Err(HarnessError::field(
                        "schedule.alpha",
                        "missing alpha (objective is not strongly convex)",
                    ))
                }
            },
        },
        ScheduleKind::InverseSqrtT => ScheduleRule::InverseSqrtT {
            scale: match schedule.scale {
                Some(s) => s,
                None if prepared.g > 0.0 && prepared.d0 > 0.0 => prepared.d0 / (prepared.g * (horizon as f64).sqrt()),
                None => 1.0,
            },
        },
    };
    rule.validate()?;
    Ok(rule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSummary {
    pub kind: String,
    pub dimension: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub lipschitz_g: Option<f64>,
    pub f_star: f64,
    pub x_star: Vec<f64>,
    pub x0: Vec<f64>,
    pub d0: f64,
    /// The gradient bound used in the bounds: global when known, else valid on the `d0` ball.
    #[serde(rename = "G")]
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schedule: String,
    pub best_value: f64,
    pub best_index: usize,
    pub steps_taken: usize,
    pub stopped_early: bool,
    pub min_h: f64,
    pub max_grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSection {
    pub params: BoundParams,
    pub r_t_1: BoundReport,
    pub r_t_half: BoundReport,
    pub b_t: BoundReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceVerdict {
    pub name: String,
    pub bound: f64,
    pub achieved: f64,
    /// `bound - achieved`.
    pub margin: f64,
    pub pass: bool,
    /// Whether the verdict counts towards the overall result.
    pub enforced: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ComplianceVerdict {
    fn new(name: &str, bound: f64, achieved: f64, enforced: bool) -> Self {
        Self {
            name: name.to_owned(),
            bound,
            achieved,
            margin: bound - achieved,
            pass: achieved <= bound + bounds::slack(bound),
            enforced,
            note: None,
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditOutcome {
    pub applicable: bool,
    pub pass: bool,
    pub checked: usize,
    pub violation_count: usize,
    /// The first few violations.
    pub violations: Vec<Violation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl AuditOutcome {
    fn from_violations(checked: usize, violations: Vec<Violation>) -> Self {
        Self {
            applicable: true,
            pass: violations.is_empty(),
            checked,
            violation_count: violations.len(),
            violations: violations.into_iter().take(LISTED_VIOLATIONS).collect(),
            note: None,
        }
    }

    fn not_applicable(reason: impl Into<String>) -> Self {
        Self {
            applicable: false,
            pass: true,
            checked: 0,
            violation_count: 0,
            violations: Vec::new(),
            note: Some(reason.into()),
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audits {
    pub lemma1: AuditOutcome,
    pub descent_condition: AuditOutcome,
    pub a_sequence: AuditOutcome,
    pub contraction: AuditOutcome,
    pub elementary_properties: AuditOutcome,
}

impl Audits {
    pub fn all(&self) -> [(&'static str, &AuditOutcome); 5] {
        [
            ("lemma1", &self.lemma1),
            ("descent_condition", &self.descent_condition),
            ("a_sequence", &self.a_sequence),
            ("contraction", &self.contraction),
            ("elementary_properties", &self.elementary_properties),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveSummary {
    pub epochs: usize,
    /// Epochs needed to halve `f* - f̃₀` down to the target.
    pub epochs_required: usize,
    pub target: f64,
    pub lower_bounds: Vec<f64>,
    pub best_epoch: usize,
    pub steps_taken: usize,
    /// Epochs whose descent condition held at every step.
    pub near_optimal_epochs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub objective: ObjectiveSummary,
    pub summary: RunSummary,
    pub bounds: BoundsSection,
    pub compliance: Vec<ComplianceVerdict>,
    pub audits: Audits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adaptive: Option<AdaptiveSummary>,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    /// The plain run, or the best epoch of an adaptive run.
    pub run: RunResult,
    pub adaptive: Option<AdaptiveResult>,
}

/// Builds the objective, runs the configured method, evaluates the bounds
/// and audits the trajectory. Nothing is written; see [`super::write_outputs`].
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    config.validate()?;
    let started = Instant::now();
    let prepared = prepare(config)?;
    let objective = &prepared.objective;
    let horizon = config.horizon;

    let params = BoundParams::for_objective(objective, prepared.g, prepared.d0, horizon);
    let bounds = BoundsSection {
        params,
        r_t_1: r_t_gamma(&params)?,
        r_t_half: r_t_gamma(&params.with_gamma(0.5))?,
        b_t: b_t(&params)?,
    };

    let elementary = {
        let audit = check_elementary_properties(objective, &prepared.audit_samples)?;
        let violations = audit
            .violations
            .iter()
            .map(|v| Violation {
                t: v.sample,
                inequality: format!("{:?}", v.family),
                lhs: v.lhs,
                rhs: v.rhs,
            })
            .collect();
        let skipped: Vec<String> = audit.not_applicable.iter().map(|f| format!("{f:?}")).collect();
        let outcome = AuditOutcome::from_violations(audit.samples, violations);
        if skipped.is_empty() {
            outcome
        } else {
            outcome.note(format!("not applicable: {}", skipped.join(", ")))
        }
    };

    let (run, adaptive, adaptive_summary, compliance, audits) = if let Some(adaptive_cfg) = &config.adaptive {
        let initial_gap = objective.f_star() - adaptive_cfg.f_tilde;
        let target = adaptive_cfg.target.unwrap_or(bounds.r_t_half.bound_value);
        let epochs_required = if initial_gap > 0.0 {
            if !(target > 0.0) {
                return Err(HarnessError::field(
                    "adaptive.target",
                    "the γ = 1/2 bound is zero; set an explicit positive target",
                ));
            }
            epochs_for_gap(initial_gap, target)?
        } else {
            1
        };
        let epochs = match adaptive_cfg.epochs {
            EpochCount::Fixed(k) => k,
            EpochCount::Named(_) => epochs_required,
        };
        let result = adaptive_polyak(objective, &prepared.x0, horizon, epochs, adaptive_cfg.f_tilde)?;

        let mut lemma1 = Vec::new();
        let mut descent = Vec::new();
        let mut checked = 0;
        let mut lemma1_checked = 0;
        let mut near_optimal = Vec::new();
        for (k, epoch) in result.epochs.iter().enumerate() {
            let traj = &epoch.run.trajectory;
            lemma1_checked += traj.len().saturating_sub(1);
            lemma1.extend(check_lemma1(traj)?);
            let audit = check_descent_condition(traj, 0.5)?;
            checked += audit.steps_checked;
            if audit.condition_failures.is_empty() {
                near_optimal.push(k);
            }
            descent.extend(audit.violations);
        }

        let h_best = result.best_value - objective.f_star();
        let mut compliance = vec![
            ComplianceVerdict::new(
                "adaptive_gap",
                2.0 * bounds.r_t_half.bound_value,
                h_best,
                epochs >= epochs_required && result.violation.is_none(),
            )
            .note(format!(
                "f(x̄) - f* ≤ 2·R_T,1/2 with K = {epochs}, {epochs_required} required"
            )),
            ComplianceVerdict::new(
                "adaptive_steps",
                (epochs * horizon) as f64,
                result.steps_taken as f64,
                true,
            ),
        ];
        let monotone = result.lower_bounds.windows(2).all(|w| w[1] >= w[0]);
        compliance.push(
            ComplianceVerdict::new(
                "lower_bounds_nondecreasing",
                0.0,
                if monotone { 0.0 } else { 1.0 },
                true,
            )
            .note("f̃_k never decreases"),
        );

        let summary = AdaptiveSummary {
            epochs,
            epochs_required,
            target,
            lower_bounds: result.lower_bounds.clone(),
            best_epoch: result.best_epoch,
            steps_taken: result.steps_taken,
            near_optimal_epochs: near_optimal,
            violation: result.violation.clone(),
        };
        let audits = Audits {
            lemma1: AuditOutcome::from_violations(lemma1_checked, lemma1),
            descent_condition: AuditOutcome::from_violations(checked, descent)
                .note("γ = 1/2 over all epochs, overshooting steps excluded"),
            a_sequence: AuditOutcome::not_applicable("restarted runs"),
            contraction: AuditOutcome::not_applicable("restarted runs"),
            elementary_properties: elementary,
        };
        let run = result.epochs[result.best_epoch].run.clone();
        (run, Some(result), Some(summary), compliance, audits)
    } else {
        let schedule_cfg = config.schedule.as_ref().expect("validated: schedule or adaptive");
        let rule = resolve_schedule(schedule_cfg, &prepared, horizon)?;
        let run = run_gd(objective, &RunConfig::new(horizon, rule, prepared.x0.clone()))?;
        let (compliance, audits) = audit_single_run(&run, rule, &prepared, &bounds, elementary)?;
        (run, None, None, compliance, audits)
    };

    let summary = RunSummary {
        schedule: match &config.adaptive {
            Some(_) => "adaptive-polyak".to_owned(),
            None => config.schedule.as_ref().map(|s| s.name.clone()).unwrap_or_default(),
        },
        best_value: adaptive.as_ref().map_or(run.best_value, |a| a.best_value),
        best_index: run.best_index,
        steps_taken: adaptive.as_ref().map_or(run.steps_taken, |a| a.steps_taken),
        stopped_early: run.stopped_early,
        min_h: run.min_suboptimality().unwrap_or(f64::NAN),
        max_grad_norm: max_grad_norm(&run.trajectory),
    };

    let passed = compliance.iter().all(|c| !c.enforced || c.pass) && audits.all().iter().all(|(_, a)| a.pass);
    let report = ExperimentReport {
        config: config.clone(),
        objective: ObjectiveSummary {
            kind: objective.kind().name().to_owned(),
            dimension: objective.dimension(),
            alpha: objective.alpha(),
            beta: objective.beta(),
            lipschitz_g: objective.lipschitz_g(),
            f_star: objective.f_star(),
            x_star: objective.x_star().to_vec(),
            x0: prepared.x0.clone(),
            d0: prepared.d0,
            g: prepared.g,
        },
        summary,
        bounds,
        compliance,
        audits,
        adaptive: adaptive_summary,
        passed,
        duration_seconds: Some(started.elapsed().as_secs_f64()),
    };
    Ok(ExperimentOutcome { report, run, adaptive })
}

fn max_grad_norm(trajectory: &[TrajectoryRecord]) -> f64 {
    trajectory.iter().map(|r| r.grad_sq_norm.sqrt()).fold(0.0, f64::max)
}

fn audit_single_run(
    run: &RunResult,
    rule: ScheduleRule,
    prepared: &Prepared,
    bounds: &BoundsSection,
    elementary: AuditOutcome,
) -> Result<(Vec<ComplianceVerdict>, Audits), HarnessError> {
    let objective = &prepared.objective;
    let traj = &run.trajectory;
    let steps = traj.len().saturating_sub(1);
    let min_h = run.min_suboptimality().unwrap_or(f64::NAN);
    let lemma1 = AuditOutcome::from_violations(steps, check_lemma1(traj)?);
    let grad_bound_holds = max_grad_norm(traj) <= prepared.g + bounds::slack(prepared.g);

    let gamma = match rule {
        ScheduleRule::PolyakExact { .. } => Some(1.0),
        ScheduleRule::PolyakLowerBound { .. } => Some(0.5),
        _ => None,
    };

    let Some(gamma) = gamma else {
        let reference = ComplianceVerdict::new("r_t_1", bounds.r_t_1.bound_value, min_h, false)
            .note("reference only: no guarantee for this schedule");
        let audits = Audits {
            lemma1,
            descent_condition: AuditOutcome::not_applicable("not a Polyak schedule"),
            a_sequence: AuditOutcome::not_applicable("not a Polyak schedule"),
            contraction: AuditOutcome::not_applicable("not a Polyak schedule"),
            elementary_properties: elementary,
        };
        return Ok((vec![reference], audits));
    };

    let descent = check_descent_condition(traj, gamma)?;
    let condition_held = descent.condition_failures.is_empty();
    let mut descent_outcome = AuditOutcome::from_violations(descent.steps_checked, descent.violations.clone());
    if !condition_held {
        descent_outcome = descent_outcome.note(format!(
            "{} overshooting steps excluded (first at t = {})",
            descent.condition_failures.len(),
            descent.condition_failures[0]
        ));
    }

    let a_sequence = if objective.alpha() <= 0.0 {
        AuditOutcome::not_applicable("objective is not strongly convex")
    } else if prepared.g <= 0.0 {
        AuditOutcome::not_applicable("G = 0: the run starts at the minimizer")
    } else if !condition_held || !grad_bound_holds {
        AuditOutcome::not_applicable("gradient bound not guaranteed along this run")
    } else {
        let audit = check_a_sequence(traj, objective.alpha(), prepared.g, gamma)?;
        AuditOutcome::from_violations(traj.len(), audit.violations).note(format!(
            "a_0 = {:e}; with the factor 4 in the numerator it would be {:e}",
            audit.a.first().copied().unwrap_or(0.0),
            audit.a0_with_inverted_factor
        ))
    };

    let contraction = match objective.beta() {
        Some(beta) if objective.alpha() > 0.0 && condition_held => {
            let rate = gamma * objective.alpha() / beta;
            AuditOutcome::from_violations(steps, check_geometric_contraction(traj, rate)?)
                .note(format!("d_next^2 <= d^2 (1 - {rate})"))
        }
        Some(_) if objective.alpha() > 0.0 => AuditOutcome::not_applicable("descent condition failed"),
        _ => AuditOutcome::not_applicable("objective is not well-conditioned"),
    };

    let mut compliance = Vec::new();
    match rule {
        ScheduleRule::PolyakExact { f_star } => {
            let exact = f_star == objective.f_star();
            compliance.push(ComplianceVerdict::new("r_t_1", bounds.r_t_1.bound_value, min_h, exact));
            compliance.push(
                ComplianceVerdict::new("b_t", bounds.b_t.bound_value, min_h, false)
                    .note("reported only; R_T,1 is the enforced bound"),
            );
        }
        ScheduleRule::PolyakLowerBound { f_tilde } => {
            let f_star = objective.f_star();
            if condition_held {
                compliance.push(ComplianceVerdict::new(
                    "r_t_half",
                    bounds.r_t_half.bound_value,
                    min_h,
                    true,
                ));
            } else {
                compliance.push(
                    ComplianceVerdict::new("r_t_half", bounds.r_t_half.bound_value, min_h, false)
                        .note("descent condition failed; the refined lower bound is enforced instead"),
                );
                let refined = 0.5 * (run.best_value + f_tilde);
                compliance.push(
                    ComplianceVerdict::new("refined_bound_valid", 0.0, refined - f_star, true)
                        .note("f̃₊ = (f(x̄) + f̃)/2 ≤ f*"),
                );
                compliance.push(
                    ComplianceVerdict::new("refined_gap_halved", 0.5 * (f_star - f_tilde), f_star - refined, true)
                        .note("f* - f̃₊ ≤ (f* - f̃)/2"),
                );
            }
        }
        _ => unreachable!("gamma is only set for Polyak rules"),
    }

    let audits = Audits {
        lemma1,
        descent_condition: descent_outcome,
        a_sequence,
        contraction,
        elementary_properties: elementary,
    };
    Ok((compliance, audits))
}
