use polyak_core::bounds::{check_descent_condition, check_elementary_properties, check_lemma1};
use polyak_core::sampling::{ball_samples, on_sphere, seeded_rng};
use polyak_core::{
    adaptive_polyak, b_t, make_objective, r_t_gamma, run_gd, BoundCase, BoundParams, ObjectiveKind, ObjectiveSpec,
    RunConfig, ScheduleRule,
};
use proptest::prelude::*;

fn objective_strategy() -> impl Strategy<Value = ObjectiveSpec> {
    let dim = 1usize..6;
    dim.prop_flat_map(|d| {
        prop_oneof![
            prop::collection::vec(0.1f64..20.0, d).prop_map(move |e| {
                make_objective(ObjectiveKind::Quadratic { eigenvalues: e }, d, vec![0.0; d], 0.0).unwrap()
            }),
            (0.1f64..10.0).prop_map(move |s| {
                make_objective(ObjectiveKind::ScaledEuclideanNorm { scale: s }, d, vec![0.0; d], 0.0).unwrap()
            }),
            (0.1f64..5.0, 0.0f64..2.0).prop_map(move |(q, w)| {
                make_objective(
                    ObjectiveKind::StronglyConvexPlusL1 {
                        quadratic: q,
                        l1_weight: w,
                    },
                    d,
                    vec![0.0; d],
                    0.0,
                )
                .unwrap()
            }),
        ]
    })
}

fn exact(objective: &ObjectiveSpec) -> ScheduleRule {
    ScheduleRule::PolyakExact {
        f_star: objective.f_star(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_polyak_never_increases_distance(objective in objective_strategy(), seed in any::<u64>(), r in 0.1f64..5.0) {
        let x0 = on_sphere(&mut seeded_rng(seed), objective.x_star(), r);
        let run = run_gd(&objective, &RunConfig::new(60, exact(&objective), x0)).unwrap();
        prop_assert!(check_lemma1(&run.trajectory).unwrap().is_empty());
        for w in run.trajectory.windows(2) {
            let (d, d_next) = (w[0].d.unwrap(), w[1].d.unwrap());
            prop_assert!(d_next <= d * (1.0 + 1e-9) + 1e-12);
        }
        let audit = check_descent_condition(&run.trajectory, 1.0).unwrap();
        prop_assert!(audit.violations.is_empty());
    }

    #[test]
    fn exact_polyak_meets_its_bound(objective in objective_strategy(), seed in any::<u64>(), horizon in 1usize..200) {
        let x0 = on_sphere(&mut seeded_rng(seed), objective.x_star(), 1.0);
        let run = run_gd(&objective, &RunConfig::new(horizon, exact(&objective), x0)).unwrap();
        let g = objective.lipschitz_g().unwrap_or_else(|| objective.gradient_bound_on_ball(1.0));
        let params = BoundParams::for_objective(&objective, g, 1.0, horizon);
        let bound = r_t_gamma(&params).unwrap().bound_value;
        let h = run.min_suboptimality().unwrap();
        prop_assert!(h <= bound * (1.0 + 1e-9) + 1e-12, "h = {h}, bound = {bound}");
    }

    #[test]
    fn lower_bound_below_optimum_halves_rate(seed in any::<u64>(), slack in 0.0f64..3.0) {
        let objective = make_objective(
            ObjectiveKind::Quadratic { eigenvalues: vec![1.0, 2.0, 4.0] }, 3, vec![0.5, 0.0, -0.5], 1.0,
        ).unwrap();
        let x0 = on_sphere(&mut seeded_rng(seed), objective.x_star(), 1.0);
        let rule = ScheduleRule::PolyakLowerBound { f_tilde: objective.f_star() - slack };
        let run = run_gd(&objective, &RunConfig::new(100, rule, x0)).unwrap();
        prop_assert!(check_lemma1(&run.trajectory).unwrap().is_empty());
        let audit = check_descent_condition(&run.trajectory, 0.5).unwrap();
        prop_assert!(audit.violations.is_empty());
    }

    #[test]
    fn adaptive_lower_bounds_never_decrease(seed in any::<u64>(), f_tilde in -20.0f64..0.0, epochs in 1usize..8) {
        let objective = make_objective(
            ObjectiveKind::Quadratic { eigenvalues: vec![1.0, 3.0] }, 2, vec![0.0, 0.0], 0.0,
        ).unwrap();
        let x0 = on_sphere(&mut seeded_rng(seed), objective.x_star(), 1.0);
        let result = adaptive_polyak(&objective, &x0, 30, epochs, f_tilde).unwrap();
        prop_assert!(result.steps_taken <= epochs * 30);
        prop_assert!(result.lower_bounds.windows(2).all(|w| w[1] >= w[0]));
        let best_epoch_value = result.epochs[result.best_epoch].run.best_value;
        prop_assert_eq!(result.best_value, best_epoch_value);
        prop_assert!(result.epochs.iter().all(|e| e.run.best_value >= result.best_value));
    }

    #[test]
    fn elementary_properties_hold_everywhere(objective in objective_strategy(), seed in any::<u64>()) {
        let samples = ball_samples(seed, objective.x_star(), 3.0, 50);
        let audit = check_elementary_properties(&objective, &samples).unwrap();
        prop_assert!(audit.violations.is_empty(), "{:?}", audit.violations.first());
    }

    #[test]
    fn bounds_shrink_with_horizon(g in 0.1f64..10.0, d0 in 0.1f64..10.0, alpha in 0.01f64..1.0, ratio in 1.0f64..50.0, t in 1usize..5000) {
        let params = BoundParams::new(g, d0, alpha, Some(alpha * ratio), t);
        let later = BoundParams::new(g, d0, alpha, Some(alpha * ratio), t + 1);
        for case in BoundCase::ALL {
            let (now, next) = (b_t(&params).unwrap().term(case).unwrap(), b_t(&later).unwrap().term(case).unwrap());
            prop_assert!(next <= now);
        }
        let half = r_t_gamma(&params.with_gamma(0.5)).unwrap();
        let one = r_t_gamma(&params).unwrap();
        prop_assert!(one.bound_value <= half.bound_value);
    }
}
