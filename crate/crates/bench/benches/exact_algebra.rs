//! Exact rational covariant algebra: the cost of proving the polynomial
//! identities that `syzygy verify` checks in bulk.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use syzygy_core::{CubicCoeffs, HamiltonianSpec, QuarticCoeffs};

fn covariants(c: &mut Criterion) {
    let cubic = CubicCoeffs::from_i64(7, -3, 2, 11);
    let quartic = QuarticCoeffs::from_i64(3, -2, 1, 4, -5);

    c.bench_function("cubic_syzygy_residual", |b| {
        b.iter(|| black_box(&cubic).syzygy_residual())
    });
    c.bench_function("quartic_syzygy_residual", |b| {
        b.iter(|| black_box(&quartic).syzygy_residual())
    });
    c.bench_function("quartic_invariants", |b| {
        b.iter(|| {
            let q = black_box(&quartic);
            (q.invariant_s(), q.invariant_t())
        })
    });

    let h = HamiltonianSpec::quartic(3, -2, 1, 4, -5);
    c.bench_function("quartic_ode_residuals", |b| {
        b.iter(|| black_box(&h).vector_ode_residuals())
    });
}

criterion_group!(benches, covariants);
criterion_main!(benches);
