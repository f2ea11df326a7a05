//! Numerical side: integrating a bounded cubic orbit, evaluating the
//! Weierstrass p-function, and certifying a stored trajectory.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use syzygy_core::{
    fit_shift, integrate, real_period, wp_eval, HamiltonianSpec, IntegratorConfig, PhaseState,
};

fn worked_example_config() -> IntegratorConfig {
    IntegratorConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        t_end: 1.2,
        sample_interval: 0.01,
        ..IntegratorConfig::default()
    }
}

fn flow(c: &mut Criterion) {
    let h = HamiltonianSpec::cubic(1, 0, 0, 1);
    let s0 = PhaseState::new(0.0, 1.0, 0.0);
    let cfg = worked_example_config();
    c.bench_function("integrate_bounded_cubic", |b| {
        b.iter(|| integrate(black_box(&h), s0, &cfg).unwrap())
    });
}

fn weierstrass(c: &mut Criterion) {
    c.bench_function("wp_eval_general", |b| {
        b.iter(|| wp_eval(black_box(3.0), black_box(2.0), black_box(0.7)).unwrap())
    });
    c.bench_function("real_period_general", |b| {
        b.iter(|| real_period(black_box(3.0), black_box(2.0)).unwrap())
    });

    let h = HamiltonianSpec::cubic(1, 0, 0, 1);
    let traj = integrate(&h, PhaseState::new(0.0, 1.0, 0.0), &worked_example_config()).unwrap();
    c.bench_function("fit_shift_bounded_cubic", |b| {
        b.iter(|| fit_shift(black_box(&traj)).unwrap())
    });
}

criterion_group!(benches, flow, weierstrass);
criterion_main!(benches);
