//! Four-regime convergence bounds and inequality audits over trajectories.
//!
//! Two bound families are evaluated, both as the minimum over whichever of the
//! convex, smooth, strongly convex and well-conditioned terms have their moduli
//! available:
//!
//! * [`b_t`]: `min{ G d₀/√T, β d₀²/T, 2G²/(αT), β d₀² (1 - α/(2β))^T }`
//! * [`r_t_gamma`]: `min{ G d₀/√(γT), 2β d₀²/(γT), G²/(γαT), β d₀² (1 - γα/β)^T }`
//!
//! The audits check per-step inequalities on recorded trajectories and report
//! each failing step instead of stopping at the first.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg;
use crate::objectives::ObjectiveSpec;
use crate::optimizer::TrajectoryRecord;
use crate::schedules::CONVERGENCE_GRAD_SQ;

/// Relative part of the audit slack.
pub const RELATIVE_SLACK: f64 = 1e-9;
/// Absolute part of the audit slack.
pub const ABSOLUTE_SLACK: f64 = 1e-12;

/// `1e-12 + 1e-9·scale`.
pub fn slack(scale: f64) -> f64 {
    ABSOLUTE_SLACK + RELATIVE_SLACK * scale.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Bound on gradient norms along the run.
    #[serde(rename = "G")]
    pub g: f64,
    pub d0: f64,
    /// Zero when the objective is not strongly convex.
    pub alpha: f64,
    /// `None` when the objective is not smooth.
    pub beta: Option<f64>,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub gamma: f64,
}

impl BoundParams {
    pub fn new(g: f64, d0: f64, alpha: f64, beta: Option<f64>, horizon: usize) -> Self {
        Self {
            g,
            d0,
            alpha,
            beta,
            horizon,
            gamma: 1.0,
        }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Parameters for `objective` started at distance `d0`, using `g` as the
    /// gradient bound (see [`ObjectiveSpec::gradient_bound_on_ball`]).
    pub fn for_objective(objective: &ObjectiveSpec, g: f64, d0: f64, horizon: usize) -> Self {
        Self::new(g, d0, objective.alpha(), objective.beta(), horizon)
    }

    fn validate(&self) -> Result<()> {
        let nonneg = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be finite and nonnegative, got {v}")))
            }
        };
        nonneg("G", self.g)?;
        nonneg("d0", self.d0)?;
        nonneg("alpha", self.alpha)?;
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta.is_finite()) {
                return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
            }
            if self.alpha > beta {
                return Err(Error::invalid(
                    "alpha",
                    format!("alpha {} exceeds beta {beta}", self.alpha),
                ));
            }
        }
        if self.horizon == 0 {
            return Err(Error::invalid("T", "must be at least 1"));
        }
        Ok(())
    }

    fn strongly_convex(&self) -> Option<f64> {
        (self.alpha > 0.0).then_some(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundCase {
    Convex,
    Smooth,
    StronglyConvex,
    WellConditioned,
}

impl BoundCase {
    pub const ALL: [BoundCase; 4] = [
        BoundCase::Convex,
        BoundCase::Smooth,
        BoundCase::StronglyConvex,
        BoundCase::WellConditioned,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            BoundCase::Convex => "convex",
            BoundCase::Smooth => "smooth",
            BoundCase::StronglyConvex => "strongly-convex",
            BoundCase::WellConditioned => "well-conditioned",
        }
    }
}

impl fmt::Display for BoundCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Serializes an optional term as a number or the string `"not-applicable"`.
mod term {
    use super::*;

    const NOT_APPLICABLE: &str = "not-applicable";

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(x) => s.serialize_f64(*x),
            None => s.serialize_str(NOT_APPLICABLE),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(f64),
        Label(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Value(x) => Ok(Some(x)),
            Repr::Label(s) if s == NOT_APPLICABLE => Ok(None),
            Repr::Label(s) => Err(serde::de::Error::custom(format!("unexpected bound term `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    #[serde(with = "term")]
    pub term_convex: Option<f64>,
    #[serde(with = "term")]
    pub term_smooth: Option<f64>,
    #[serde(with = "term")]
    pub term_strongly_convex: Option<f64>,
    #[serde(with = "term")]
    pub term_well_conditioned: Option<f64>,
    pub bound_value: f64,
    pub active_case: BoundCase,
}

impl BoundReport {
    fn from_terms(terms: [Option<f64>; 4]) -> Self {
        let (active_case, bound_value) = BoundCase::ALL
            .into_iter()
            .zip(terms)
            .filter_map(|(case, term)| term.map(|v| (case, v)))
            .fold((BoundCase::Convex, f64::INFINITY), |best, (case, v)| {
                if v < best.1 {
                    (case, v)
                } else {
                    best
                }
            });
        Self {
            term_convex: terms[0],
            term_smooth: terms[1],
            term_strongly_convex: terms[2],
            term_well_conditioned: terms[3],
            bound_value,
            active_case,
        }
    }

    pub fn term(&self, case: BoundCase) -> Option<f64> {
        match case {
            BoundCase::Convex => self.term_convex,
            BoundCase::Smooth => self.term_smooth,
            BoundCase::StronglyConvex => self.term_strongly_convex,
            BoundCase::WellConditioned => self.term_well_conditioned,
        }
    }
}

/// The γ-parametrized bound delivered by the per-step descent condition.
pub fn r_t_gamma(params: &BoundParams) -> Result<BoundReport> {
    let gamma = params.gamma;
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    params.validate()?;
    let BoundParams { g, d0, .. } = *params;
    let t = params.horizon as f64;
    let alpha = params.strongly_convex();
    Ok(BoundReport::from_terms([
        Some(g * d0 / (gamma * t).sqrt()),
        params.beta.map(|b| 2.0 * b * d0 * d0 / (gamma * t)),
        alpha.map(|a| g * g / (gamma * a * t)),
        alpha
            .zip(params.beta)
            .map(|(a, b)| b * d0 * d0 * powi_horizon(1.0 - gamma * a / b, params.horizon)),
    ]))
}

/// The bound stated for exact Polyak steps; `gamma` is ignored.
pub fn b_t(params: &BoundParams) -> Result<BoundReport> {
    params.validate()?;
    let BoundParams { g, d0, .. } = *params;
    let t = params.horizon as f64;
    let alpha = params.strongly_convex();
    Ok(BoundReport::from_terms([
        Some(g * d0 / t.sqrt()),
        params.beta.map(|b| b * d0 * d0 / t),
        alpha.map(|a| 2.0 * g * g / (a * t)),
        alpha
            .zip(params.beta)
            .map(|(a, b)| b * d0 * d0 * powi_horizon(1.0 - a / (2.0 * b), params.horizon)),
    ]))
}

fn powi_horizon(base: f64, horizon: usize) -> f64 {
    match i32::try_from(horizon) {
        Ok(n) => base.powi(n),
        Err(_) => base.powf(horizon as f64),
    }
}

/// A failed inequality: `lhs ≤ rhs` did not hold at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: usize,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl Violation {
    fn new(t: usize, inequality: &str, lhs: f64, rhs: f64) -> Self {
        Self {
            t,
            inequality: inequality.to_owned(),
            lhs,
            rhs,
        }
    }
}

fn require(r: &TrajectoryRecord, h: bool) -> Result<(f64, f64)> {
    let d = r.d.ok_or(Error::MissingField { t: r.t, field: "d" })?;
    let hv = if h {
        r.h.ok_or(Error::MissingField { t: r.t, field: "h" })?
    } else {
        0.0
    };
    Ok((hv, d))
}

/// `d_{t+1}² ≤ d_t² - 2η_t h_t + η_t²‖∇_t‖²` for every step.
pub fn check_lemma1(trajectory: &[TrajectoryRecord]) -> Result<Vec<Violation>> {
    let mut out = Vec::new();
    for pair in trajectory.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let (h, d) = require(cur, true)?;
        let (_, d_next) = require(next, false)?;
        let lhs = d_next * d_next;
        let rhs = d * d - 2.0 * cur.eta * h + cur.eta * cur.eta * cur.grad_sq_norm;
        if lhs > rhs + RELATIVE_SLACK * (1.0 + d * d) {
            out.push(Violation::new(
                cur.t,
                "d_next^2 <= d^2 - 2 eta h + eta^2 |g|^2",
                lhs,
                rhs,
            ));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentAudit {
    pub gamma: f64,
    pub violations: Vec<Violation>,
    /// Steps with `η_t > h_t/‖∇_t‖²`; these are excluded from the check and
    /// certify that the step's lower bound can be tightened.
    pub condition_failures: Vec<usize>,
    pub steps_checked: usize,
}

/// `d_{t+1}² ≤ d_t² - γ h_t²/‖∇_t‖²` on every step where `η_t ≤ h_t/‖∇_t‖²`.
pub fn check_descent_condition(trajectory: &[TrajectoryRecord], gamma: f64) -> Result<DescentAudit> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let mut audit = DescentAudit {
        gamma,
        violations: Vec::new(),
        condition_failures: Vec::new(),
        steps_checked: 0,
    };
    for pair in trajectory.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let (h, d) = require(cur, true)?;
        let (_, d_next) = require(next, false)?;
        if cur.grad_sq_norm < CONVERGENCE_GRAD_SQ {
            continue;
        }
        let exact = h / cur.grad_sq_norm;
        if cur.eta > exact + slack(exact) {
            audit.condition_failures.push(cur.t);
            continue;
        }
        audit.steps_checked += 1;
        let lhs = d_next * d_next;
        let rhs = d * d - gamma * h * h / cur.grad_sq_norm;
        if lhs > rhs + RELATIVE_SLACK * (1.0 + d * d) {
            audit
                .violations
                .push(Violation::new(cur.t, "d_next^2 <= d^2 - gamma h^2 / |g|^2", lhs, rhs));
        }
    }
    Ok(audit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ASequenceAudit {
    /// `a_t = γ α² d_t² / (4 G²)`.
    pub a: Vec<f64>,
    pub violations: Vec<Violation>,
    /// `γ · 4α² d₀² / G²`, the same quantity with the factor four moved to the
    /// numerator; 16× `a_0`, so it can exceed one and break the induction base.
    pub a0_with_inverted_factor: f64,
}

/// Checks `a_t ≤ 1/(t+1)` and `a_{t+1} ≤ a_t(1 - a_t)` along the trajectory.
pub fn check_a_sequence(trajectory: &[TrajectoryRecord], alpha: f64, g: f64, gamma: f64) -> Result<ASequenceAudit> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(
            "alpha",
            "the a-sequence needs a strongly convex objective",
        ));
    }
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::invalid("G", "must be positive"));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let scale = gamma * alpha * alpha / (4.0 * g * g);
    let a = trajectory
        .iter()
        .map(|r| require(r, false).map(|(_, d)| scale * d * d))
        .collect::<Result<Vec<f64>>>()?;

    let mut violations = Vec::new();
    for (r, &at) in trajectory.iter().zip(&a) {
        let cap = 1.0 / (r.t as f64 + 1.0);
        if at > cap + slack(cap) {
            violations.push(Violation::new(r.t, "a_t <= 1/(t+1)", at, cap));
        }
    }
    for (pair, w) in trajectory.windows(2).zip(a.windows(2)) {
        let rhs = w[0] * (1.0 - w[0]);
        if w[1] > rhs + slack(w[0]) {
            violations.push(Violation::new(pair[0].t, "a_next <= a (1 - a)", w[1], rhs));
        }
    }
    let a0_with_inverted_factor = a.first().map_or(0.0, |a0| 16.0 * a0);
    Ok(ASequenceAudit {
        a,
        violations,
        a0_with_inverted_factor,
    })
}

/// `d_{t+1}² ≤ d_t² (1 - rate)` for every step.
pub fn check_geometric_contraction(trajectory: &[TrajectoryRecord], rate: f64) -> Result<Vec<Violation>> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::invalid("rate", format!("must lie in [0, 1], got {rate}")));
    }
    let mut out = Vec::new();
    for pair in trajectory.windows(2) {
        let (_, d) = require(&pair[0], false)?;
        let (_, d_next) = require(&pair[1], false)?;
        let lhs = d_next * d_next;
        let rhs = d * d * (1.0 - rate);
        if lhs > rhs + slack(d * d) {
            out.push(Violation::new(pair[0].t, "d_next^2 <= d^2 (1 - rate)", lhs, rhs));
        }
    }
    Ok(out)
}

/// The inequality families checked at sample points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyFamily {
    /// `(α/2) d² ≤ h`
    StrongConvexityGrowth,
    /// `h ≤ (β/2) d²`
    SmoothnessGrowth,
    /// `‖∇f‖²/(2β) ≤ h`
    SmoothGradientLower,
    /// `h ≤ ‖∇f‖²/(2α)`
    StrongGradientUpper,
    /// `‖∇f‖²/β² ≤ d² ≤ ‖∇f‖²/α²`
    DistanceGradientChain,
    /// `f(y) ≥ f(x) + ∇f(x)ᵀ(y - x)`
    Subgradient,
}

impl PropertyFamily {
    pub const ALL: [PropertyFamily; 6] = [
        PropertyFamily::StrongConvexityGrowth,
        PropertyFamily::SmoothnessGrowth,
        PropertyFamily::SmoothGradientLower,
        PropertyFamily::StrongGradientUpper,
        PropertyFamily::DistanceGradientChain,
        PropertyFamily::Subgradient,
    ];

    fn applies(&self, alpha: Option<f64>, beta: Option<f64>) -> bool {
        match self {
            PropertyFamily::StrongConvexityGrowth | PropertyFamily::StrongGradientUpper => alpha.is_some(),
            PropertyFamily::SmoothnessGrowth | PropertyFamily::SmoothGradientLower => beta.is_some(),
            PropertyFamily::DistanceGradientChain => alpha.is_some() && beta.is_some(),
            PropertyFamily::Subgradient => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyViolation {
    pub sample: usize,
    pub family: PropertyFamily,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementaryAudit {
    pub checked: Vec<PropertyFamily>,
    pub not_applicable: Vec<PropertyFamily>,
    pub samples: usize,
    pub violations: Vec<PropertyViolation>,
}

/// Evaluates the growth and gradient inequalities at each sample, and the
/// subgradient inequality between consecutive samples (wrapping around).
pub fn check_elementary_properties(objective: &ObjectiveSpec, samples: &[Vec<f64>]) -> Result<ElementaryAudit> {
    let alpha = (objective.alpha() > 0.0).then_some(objective.alpha());
    let beta = objective.beta();
    let (checked, not_applicable): (Vec<_>, Vec<_>) =
        PropertyFamily::ALL.into_iter().partition(|f| f.applies(alpha, beta));

    let mut values = Vec::with_capacity(samples.len());
    let mut grads = Vec::with_capacity(samples.len());
    let mut violations = Vec::new();
    let mut check = |sample: usize, family: PropertyFamily, lhs: f64, rhs: f64| {
        if lhs > rhs + slack(lhs.abs().max(rhs.abs())) {
            violations.push(PropertyViolation {
                sample,
                family,
                lhs,
                rhs,
            });
        }
    };

    for (i, x) in samples.iter().enumerate() {
        let f = objective.evaluate(x)?;
        let grad = objective.gradient(x)?;
        let h = objective.suboptimality(x)?;
        let d_sq = linalg::dist_sq(x, objective.x_star());
        let g_sq = linalg::norm_sq(&grad);
        if let Some(a) = alpha {
            check(i, PropertyFamily::StrongConvexityGrowth, 0.5 * a * d_sq, h);
            check(i, PropertyFamily::StrongGradientUpper, h, g_sq / (2.0 * a));
        }
        if let Some(b) = beta {
            check(i, PropertyFamily::SmoothnessGrowth, h, 0.5 * b * d_sq);
            check(i, PropertyFamily::SmoothGradientLower, g_sq / (2.0 * b), h);
        }
        if let (Some(a), Some(b)) = (alpha, beta) {
            check(i, PropertyFamily::DistanceGradientChain, g_sq / (b * b), d_sq);
            check(i, PropertyFamily::DistanceGradientChain, d_sq, g_sq / (a * a));
        }
        values.push(f);
        grads.push(grad);
    }

    let n = samples.len();
    if n >= 2 {
        for i in 0..n {
            let j = (i + 1) % n;
            let step = linalg::sub(&samples[j], &samples[i]);
            let tangent = values[i] + linalg::dot(&grads[i], &step);
            let lhs = tangent;
            let rhs = values[j];
            if lhs > rhs + RELATIVE_SLACK * (1.0 + values[j].abs()) {
                violations.push(PropertyViolation {
                    sample: i,
                    family: PropertyFamily::Subgradient,
                    lhs,
                    rhs,
                });
            }
        }
    }

    Ok(ElementaryAudit {
        checked,
        not_applicable,
        samples: n,
        violations,
    })
}
