use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use polyak_core::bounds::{check_elementary_properties, check_lemma1};
use polyak_core::objectives::linear_spectrum;
use polyak_core::sampling::{ball_samples, on_sphere, seeded_rng};
use polyak_core::{
    adaptive_polyak, b_t, make_objective, r_t_gamma, run_gd, BoundParams, ObjectiveKind, ObjectiveSpec, RunConfig,
    ScheduleRule,
};

fn quadratic(dim: usize, offset: f64) -> ObjectiveSpec {
    make_objective(
        ObjectiveKind::Quadratic {
            eigenvalues: linear_spectrum(1.0, 10.0, dim),
        },
        dim,
        vec![0.0; dim],
        offset,
    )
    .unwrap()
}

fn l1(dim: usize) -> ObjectiveSpec {
    let center = on_sphere(&mut seeded_rng(4), &vec![0.0; dim], 1.0);
    make_objective(
        ObjectiveKind::StronglyConvexPlusL1 {
            quadratic: 1.0,
            l1_weight: 0.5,
        },
        dim,
        center,
        0.0,
    )
    .unwrap()
}

fn gradient_descent(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_gd");
    for dim in [20, 200] {
        let objective = l1(dim);
        let x0 = on_sphere(&mut seeded_rng(1), objective.x_star(), 1.0);
        let exact = RunConfig::new(
            1000,
            ScheduleRule::PolyakExact {
                f_star: objective.f_star(),
            },
            x0.clone(),
        );
        group.bench_with_input(BenchmarkId::new("polyak-l1", dim), &exact, |b, cfg| {
            b.iter(|| run_gd(&objective, black_box(cfg)).unwrap())
        });
        let baseline = RunConfig::new(1000, ScheduleRule::InverseSqrtT { scale: 0.05 }, x0);
        group.bench_with_input(BenchmarkId::new("inv-sqrt-t-l1", dim), &baseline, |b, cfg| {
            b.iter(|| run_gd(&objective, black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn adaptive(c: &mut Criterion) {
    let objective = quadratic(20, 5.0);
    let x0 = on_sphere(&mut seeded_rng(3), objective.x_star(), 1.0);
    c.bench_function("adaptive_polyak/K=37,T=500", |b| {
        b.iter(|| adaptive_polyak(&objective, black_box(&x0), 500, 37, 0.0).unwrap())
    });
}

fn audits(c: &mut Criterion) {
    let objective = quadratic(20, 0.0);
    let samples = ball_samples(7, objective.x_star(), 1.0, 1000);
    c.bench_function("elementary_properties/1000", |b| {
        b.iter(|| check_elementary_properties(&objective, black_box(&samples)).unwrap())
    });

    let norm = l1(50);
    let x0 = on_sphere(&mut seeded_rng(2), norm.x_star(), 1.0);
    let run = run_gd(
        &norm,
        &RunConfig::new(1000, ScheduleRule::InverseSqrtT { scale: 0.05 }, x0),
    )
    .unwrap();
    c.bench_function("lemma1/1000", |b| {
        b.iter(|| check_lemma1(black_box(&run.trajectory)).unwrap())
    });

    let params = BoundParams::new(10.0, 1.0, 1.0, Some(10.0), 1000);
    c.bench_function("bounds", |b| {
        b.iter(|| {
            let p = black_box(params);
            (b_t(&p).unwrap(), r_t_gamma(&p.with_gamma(0.5)).unwrap())
        })
    });
}

criterion_group!(benches, gradient_descent, adaptive, audits);
criterion_main!(benches);
