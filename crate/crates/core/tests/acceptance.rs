//! Acceptance criteria, one test each. Every test writes a single
//! `criterion N ... PASS|FAIL` line straight to stdout so the verdicts show
//! up in the test log even when output capture is on.

use std::io::Write;
use std::time::{Duration, Instant};

use polyak_core::bounds::{
    check_a_sequence, check_descent_condition, check_elementary_properties, check_geometric_contraction, check_lemma1,
};
use polyak_core::harness::{parse_config, run_experiment, trajectory_csv};
use polyak_core::objectives::linear_spectrum;
use polyak_core::sampling::{ball_samples, on_sphere, seeded_rng};
use polyak_core::{
    adaptive_polyak, epochs_for_gap, make_objective, r_t_gamma, run_gd, BoundParams, ObjectiveKind, ObjectiveSpec,
    RunConfig, RunResult, ScheduleRule,
};

/// Relative slack used by every bound comparison.
const REL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn report(n: u32, title: &str, outcome: Outcome) {
    let line = match &outcome {
        Ok(detail) => format!("criterion {n:>2} {title:<34} PASS  {detail}\n"),
        Err(detail) => format!("criterion {n:>2} {title:<34} FAIL  {detail}\n"),
    };
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    if let Err(detail) = outcome {
        panic!("criterion {n} failed: {detail}");
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(achieved: f64, bound: f64) -> bool {
    achieved <= bound * (1.0 + REL)
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))?;
    Ok(format!("{detail} ({:.0} ms)", elapsed.as_secs_f64() * 1e3))
}

fn exact(objective: &ObjectiveSpec) -> ScheduleRule {
    ScheduleRule::PolyakExact {
        f_star: objective.f_star(),
    }
}

fn min_h(run: &RunResult) -> f64 {
    run.min_suboptimality().expect("objective reports h")
}

fn start_at_distance(center: &[f64], distance: f64, seed: u64) -> Vec<f64> {
    on_sphere(&mut seeded_rng(seed), center, distance)
}

fn norm_objective() -> ObjectiveSpec {
    make_objective(
        ObjectiveKind::ScaledEuclideanNorm { scale: 1.0 },
        10,
        vec![0.0; 10],
        0.0,
    )
    .unwrap()
}

/// Singular quadratic with spectrum {0, 0, 1, 2.5, 4}, started at distance 1
/// from its nearest minimizer.
fn singular_setup() -> (ObjectiveSpec, Vec<f64>) {
    let base = make_objective(
        ObjectiveKind::SingularQuadratic {
            eigenvalues: vec![0.0, 0.0, 1.0, 2.5, 4.0],
        },
        5,
        vec![0.0; 5],
        0.0,
    )
    .unwrap();
    let u = start_at_distance(&[0.0; 3], 1.0, 2);
    let x0 = vec![0.3, -0.7, u[0], u[1], u[2]];
    (base.bind_to_start(&x0).unwrap(), x0)
}

/// Diagonal quadratic with eigenvalues evenly spaced in [1, 10], dimension 20.
fn quadratic_20(offset: f64) -> ObjectiveSpec {
    make_objective(
        ObjectiveKind::Quadratic {
            eigenvalues: linear_spectrum(1.0, 10.0, 20),
        },
        20,
        vec![0.0; 20],
        offset,
    )
    .unwrap()
}

fn quadratic_start() -> Vec<f64> {
    start_at_distance(&[0.0; 20], 1.0, 3)
}

fn l1_objective() -> ObjectiveSpec {
    let center = start_at_distance(&[0.0; 10], 0.5, 4);
    make_objective(
        ObjectiveKind::StronglyConvexPlusL1 {
            quadratic: 1.0,
            l1_weight: 0.5,
        },
        10,
        center,
        0.0,
    )
    .unwrap()
}

fn lemma1_clean(run: &RunResult) -> Result<usize, String> {
    let violations = check_lemma1(&run.trajectory).map_err(|e| e.to_string())?;
    ensure(violations.is_empty(), || {
        format!("lemma 1 violated: {:?}", violations.first())
    })?;
    Ok(run.trajectory.len().saturating_sub(1))
}

fn criterion_1() -> Outcome {
    let objective = norm_objective();
    let x0 = start_at_distance(objective.x_star(), 1.0, 1);
    let run = run_gd(&objective, &RunConfig::new(400, exact(&objective), x0)).map_err(|e| e.to_string())?;
    let bound = 1.0 * 1.0 / 400f64.sqrt();
    let h = min_h(&run);
    ensure(within(h, bound), || format!("min h = {h:e} > {bound}"))?;
    Ok(format!("min h = {h:e} <= {bound}"))
}

#[test]
fn criterion_01_convex_rate() {
    report(1, "convex G d0/sqrt(T)", timed(Duration::from_secs(1), criterion_1));
}

fn criterion_2() -> Outcome {
    let (objective, x0) = singular_setup();
    let d0 = objective.distance_to_opt(&x0).map_err(|e| e.to_string())?;
    ensure((d0 - 1.0).abs() < 1e-12, || format!("d0 = {d0}"))?;
    let run = run_gd(&objective, &RunConfig::new(100, exact(&objective), x0)).map_err(|e| e.to_string())?;
    let bound = 2.0 * 4.0 * d0 * d0 / 100.0;
    let h = min_h(&run);
    ensure(within(h, bound), || format!("min h = {h:e} > {bound}"))?;
    Ok(format!("min h = {h:e} <= {bound}"))
}

#[test]
fn criterion_02_smooth_rate() {
    report(2, "smooth 2 beta d0^2/T", timed(Duration::from_secs(1), criterion_2));
}

fn criterion_3() -> Outcome {
    let objective = quadratic_20(0.0);
    let x0 = quadratic_start();
    let (alpha, beta) = (objective.alpha(), objective.beta().unwrap());
    let d0 = objective.distance_to_opt(&x0).map_err(|e| e.to_string())?;
    let g = beta * d0;
    let run = run_gd(&objective, &RunConfig::new(1000, exact(&objective), x0)).map_err(|e| e.to_string())?;
    let bound = g * g / (alpha * 1000.0);
    let h = min_h(&run);
    ensure(within(h, bound), || format!("min h = {h:e} > {bound}"))?;
    let audit = check_a_sequence(&run.trajectory, alpha, g, 1.0).map_err(|e| e.to_string())?;
    let cap_violations: Vec<_> = audit
        .violations
        .iter()
        .filter(|v| v.inequality.starts_with("a_t <="))
        .collect();
    ensure(cap_violations.is_empty(), || {
        format!("a_t > 1/(t+1): {:?}", cap_violations[0])
    })?;
    Ok(format!(
        "min h = {h:e} <= {bound}; a_t <= 1/(t+1) at {} iterates, a_0 = {:e}",
        audit.a.len(),
        audit.a[0]
    ))
}

#[test]
fn criterion_03_strongly_convex_rate() {
    report(
        3,
        "strongly convex G^2/(alpha T)",
        timed(Duration::from_secs(1), criterion_3),
    );
}

fn criterion_4() -> Outcome {
    let objective = quadratic_20(0.0);
    let x0 = quadratic_start();
    let (alpha, beta) = (objective.alpha(), objective.beta().unwrap());
    let d0 = objective.distance_to_opt(&x0).map_err(|e| e.to_string())?;
    let run = run_gd(&objective, &RunConfig::new(200, exact(&objective), x0)).map_err(|e| e.to_string())?;
    let bound = beta * d0 * d0 * (1.0 - alpha / beta).powi(200);
    let h_best = run.best_value - objective.f_star();
    ensure(within(h_best, bound), || format!("h(x_best) = {h_best:e} > {bound:e}"))?;
    let violations = check_geometric_contraction(&run.trajectory, alpha / beta).map_err(|e| e.to_string())?;
    ensure(violations.is_empty(), || {
        format!("contraction violated: {:?}", violations[0])
    })?;
    Ok(format!(
        "h(x_best) = {h_best:e} <= {bound:e}; contraction holds over {} steps",
        run.trajectory.len() - 1
    ))
}

#[test]
fn criterion_04_well_conditioned_rate() {
    report(
        4,
        "well-conditioned geometric",
        timed(Duration::from_secs(1), criterion_4),
    );
}

fn lower_bound_run() -> Result<(ObjectiveSpec, RunResult), String> {
    let objective = quadratic_20(0.0);
    let rule = ScheduleRule::PolyakLowerBound {
        f_tilde: objective.f_star(),
    };
    let run = run_gd(&objective, &RunConfig::new(1000, rule, quadratic_start())).map_err(|e| e.to_string())?;
    Ok((objective, run))
}

fn criterion_5() -> Outcome {
    let mut runs = Vec::new();
    let norm = norm_objective();
    let x0 = start_at_distance(norm.x_star(), 1.0, 1);
    runs.push(run_gd(&norm, &RunConfig::new(400, exact(&norm), x0)).map_err(|e| e.to_string())?);
    let (singular, x0) = singular_setup();
    runs.push(run_gd(&singular, &RunConfig::new(100, exact(&singular), x0)).map_err(|e| e.to_string())?);
    let quadratic = quadratic_20(0.0);
    for horizon in [1000, 200] {
        let config = RunConfig::new(horizon, exact(&quadratic), quadratic_start());
        runs.push(run_gd(&quadratic, &config).map_err(|e| e.to_string())?);
    }
    runs.push(lower_bound_run()?.1);
    let mut steps = 0;
    for run in &runs {
        steps += lemma1_clean(run)?;
    }
    Ok(format!("0 violations over {} runs, {steps} steps", runs.len()))
}

#[test]
fn criterion_05_lemma1_audit() {
    report(5, "lemma 1 audit", criterion_5());
}

fn criterion_6() -> Outcome {
    let (objective, run) = lower_bound_run()?;
    let d0 = objective
        .distance_to_opt(&quadratic_start())
        .map_err(|e| e.to_string())?;
    let beta = objective.beta().unwrap();
    let params = BoundParams::new(beta * d0, d0, objective.alpha(), Some(beta), 1000).with_gamma(0.5);
    let bound = r_t_gamma(&params).map_err(|e| e.to_string())?.bound_value;
    let h = min_h(&run);
    ensure(within(h, bound), || format!("min h = {h:e} > R = {bound:e}"))?;
    let audit = check_descent_condition(&run.trajectory, 0.5).map_err(|e| e.to_string())?;
    ensure(audit.violations.is_empty(), || {
        format!("descent audit: {:?}", audit.violations[0])
    })?;
    ensure(audit.condition_failures.is_empty(), || {
        format!("step exceeded h/|g|^2 at t = {}", audit.condition_failures[0])
    })?;
    Ok(format!(
        "min h = {h:e} <= R_T,1/2 = {bound:e}; gamma = 1/2 audit clean over {} steps",
        audit.steps_checked
    ))
}

#[test]
fn criterion_06_lower_bound_half_rate() {
    report(6, "lower-bound half rate", criterion_6());
}

fn criterion_7() -> Outcome {
    let objective = quadratic_20(5.0);
    let x0 = quadratic_start();
    let f_star = objective.f_star();
    let beta = objective.beta().unwrap();
    let d0 = objective.distance_to_opt(&x0).map_err(|e| e.to_string())?;
    let horizon = 500;
    let params = BoundParams::new(beta * d0, d0, objective.alpha(), Some(beta), horizon).with_gamma(0.5);
    let r = r_t_gamma(&params).map_err(|e| e.to_string())?.bound_value;
    let epochs = epochs_for_gap(5.0, r).map_err(|e| e.to_string())?;
    let result = adaptive_polyak(&objective, &x0, horizon, epochs, 0.0).map_err(|e| e.to_string())?;

    ensure(result.violation.is_none(), || {
        format!("aborted: {:?}", result.violation)
    })?;
    let gap = result.best_value - f_star;
    ensure(within(gap, 2.0 * r), || {
        format!("f(x) - f* = {gap:e} > 2R = {:e}", 2.0 * r)
    })?;
    ensure(result.steps_taken <= epochs * horizon, || {
        format!("{} steps > K T = {}", result.steps_taken, epochs * horizon)
    })?;
    let lb = &result.lower_bounds;
    ensure(lb.windows(2).all(|w| w[1] >= w[0]), || {
        format!("f_tilde decreased: {lb:?}")
    })?;

    let mut condition_met = false;
    for epoch in &result.epochs {
        let audit = check_descent_condition(&epoch.run.trajectory, 0.5).map_err(|e| e.to_string())?;
        condition_met |= audit.condition_failures.is_empty();
    }
    if !condition_met {
        for (k, w) in lb.windows(2).enumerate() {
            let (now, next) = (f_star - w[0], f_star - w[1]);
            ensure(next <= now / 2.0 + 1e-9, || {
                format!("epoch {k}: gap {next:e} > {now:e}/2")
            })?;
        }
    }
    Ok(format!(
        "K = {epochs}, f(x) - f* = {gap:e} <= 2R = {:e}, {} steps",
        2.0 * r,
        result.steps_taken
    ))
}

#[test]
fn criterion_07_adaptive_end_to_end() {
    report(7, "adaptive restarts", timed(Duration::from_secs(5), criterion_7));
}

fn criterion_8() -> Outcome {
    let (singular, _) = singular_setup();
    let objectives = [
        ("scaled-euclidean-norm", norm_objective()),
        ("singular-quadratic", singular),
        ("quadratic", quadratic_20(0.0)),
        ("strongly-convex-plus-l1", l1_objective()),
    ];
    let mut families = std::collections::BTreeSet::new();
    for (seed, (name, objective)) in objectives.iter().enumerate() {
        let samples = ball_samples(100 + seed as u64, objective.x_star(), 2.0, 1000);
        let audit = check_elementary_properties(objective, &samples).map_err(|e| e.to_string())?;
        ensure(audit.samples == 1000, || format!("{name}: {} samples", audit.samples))?;
        ensure(audit.violations.is_empty(), || {
            format!("{name}: {:?}", audit.violations[0])
        })?;
        families.extend(audit.checked.iter().map(|f| format!("{f:?}")));
    }
    ensure(families.len() == 6, || format!("families exercised: {families:?}"))?;
    Ok(format!(
        "4 objectives x 1000 points, {} families, 0 violations",
        families.len()
    ))
}

#[test]
fn criterion_08_elementary_properties() {
    report(8, "elementary properties", criterion_8());
}

fn criterion_9() -> Outcome {
    let half_square = make_objective(ObjectiveKind::Quadratic { eigenvalues: vec![1.0] }, 1, vec![0.0], 0.0).unwrap();
    let config = RunConfig::new(3, exact(&half_square), vec![2.0]).with_points();
    let run = run_gd(&half_square, &config).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = run.points.unwrap().iter().map(|p| p[0]).collect();
    let expected = [2.0, 1.0, 0.5, 0.25];
    ensure(xs.len() == expected.len(), || format!("iterates {xs:?}"))?;
    for (x, e) in xs.iter().zip(expected) {
        ensure((x - e).abs() <= 1e-15, || format!("halving iterates {xs:?}"))?;
    }

    let abs = make_objective(ObjectiveKind::ScaledEuclideanNorm { scale: 1.0 }, 1, vec![0.0], 0.0).unwrap();
    let config = RunConfig::new(1, exact(&abs), vec![3.0]).with_points();
    let run = run_gd(&abs, &config).map_err(|e| e.to_string())?;
    let last = run.points.unwrap()[1][0];
    ensure(last.abs() <= 1e-15, || format!("|x| step landed at {last}"))?;
    Ok(format!("halving {xs:?}; |x| from 3 to {last}"))
}

#[test]
fn criterion_09_exact_step_oracles() {
    report(9, "exact-step oracles", criterion_9());
}

fn iterates(objective: &ObjectiveSpec, x0: Vec<f64>, horizon: usize) -> Result<Vec<Vec<f64>>, String> {
    let config = RunConfig::new(horizon, exact(objective), x0).with_points();
    let run = run_gd(objective, &config).map_err(|e| e.to_string())?;
    Ok(run.points.expect("points requested"))
}

fn max_coordinate_gap(a: &[Vec<f64>], b: &[Vec<f64>], shift: &[f64]) -> Result<f64, String> {
    ensure(a.len() == b.len(), || format!("lengths {} vs {}", a.len(), b.len()))?;
    Ok(a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q).zip(shift).map(|((x, y), s)| (x + s - y).abs()))
        .fold(0.0, f64::max))
}

fn criterion_10() -> Outcome {
    let objectives = [quadratic_20(0.0), l1_objective()];
    let mut worst: f64 = 0.0;
    for objective in &objectives {
        let dim = objective.dimension();
        let x0 = start_at_distance(objective.x_star(), 1.0, 10);
        let base = iterates(objective, x0.clone(), 50)?;
        for c in [0.5, 3.0, 100.0] {
            let scaled = iterates(&objective.scaled(c).map_err(|e| e.to_string())?, x0.clone(), 50)?;
            let gap = max_coordinate_gap(&base, &scaled, &vec![0.0; dim])?;
            ensure(gap <= 1e-12, || {
                format!("{}: scale {c} moved iterates by {gap:e}", objective.kind().name())
            })?;
            worst = worst.max(gap);
        }
        let shift: Vec<f64> = (0..dim).map(|i| 0.25 * i as f64 - 1.0).collect();
        let moved = objective.translated(&shift).map_err(|e| e.to_string())?;
        let x0_moved: Vec<f64> = x0.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let translated = iterates(&moved, x0_moved, 50)?;
        let gap = max_coordinate_gap(&base, &translated, &shift)?;
        ensure(gap <= 1e-12, || {
            format!("{}: translation moved iterates by {gap:e}", objective.kind().name())
        })?;
        worst = worst.max(gap);
    }

    let config = parse_config(
        r#"
seed = 42
T = 300
[objective]
kind = "strongly-convex-plus-l1"
dimension = 8
quadratic = 2.0
l1_weight = 0.3
x_star_radius = 1.0
[start]
radius = 3.0
[schedule]
name = "polyak"
"#,
    )
    .map_err(|e| e.to_string())?;
    let first = trajectory_csv(&run_experiment(&config).map_err(|e| e.to_string())?.run.trajectory);
    let second = trajectory_csv(&run_experiment(&config).map_err(|e| e.to_string())?.run.trajectory);
    ensure(first.as_bytes() == second.as_bytes(), || {
        "CSV differs between runs".to_owned()
    })?;
    Ok(format!(
        "max coordinate gap {worst:e}; CSV identical ({} bytes)",
        first.len()
    ))
}

#[test]
fn criterion_10_invariances_and_determinism() {
    report(10, "invariances and determinism", criterion_10());
}
