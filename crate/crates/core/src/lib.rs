//! Gradient descent with Polyak step sizes.
//!
//! The crate is organised bottom-up:
//!
//! * [`objectives`]: convex test functions with exact `α`, `β`, `G`, `f*`, `x*`.
//! * [`schedules`]: step-size rules (exact and lower-bound Polyak, classical baselines).
//! * [`optimizer`]: the descent loop, best-iterate tracking and adaptive restarts.
//! * [`bounds`]: closed-form convergence bounds and trajectory audits.
//! * [`harness`]: experiment configs, reports, CSV/JSON/SVG output and the verification suite.

pub mod bounds;
pub mod error;
pub mod harness;
mod linalg;
pub mod objectives;
pub mod optimizer;
pub mod sampling;
pub mod schedules;

pub use bounds::{b_t, r_t_gamma, BoundCase, BoundParams, BoundReport, Violation};
pub use error::{Error, Result};
pub use objectives::{make_objective, Objective, ObjectiveKind, ObjectiveSpec};
pub use optimizer::{
    adaptive_polyak, epochs_for_gap, gd_step, run_gd, AdaptiveResult, RunConfig, RunResult, TrajectoryRecord,
};
pub use schedules::{ScheduleKind, ScheduleRule, StepDecision};
