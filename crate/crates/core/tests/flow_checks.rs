//! Behavioral checks of the adaptive integrator: tolerance scaling, dense
//! output consistency, failure modes and reversibility.

use syzygy_core::dynamics::HamiltonianSpec;
use syzygy_core::flow::{
    drift_report, integrate, integrate_batch, integrate_form, IntegratorConfig, PhaseState,
    Trajectory, TrajectoryStatus,
};
use syzygy_core::forms::{rat, BinaryForm};
use syzygy_core::invariants::CubicCoeffs;

fn worked_cfg(rel_tol: f64, sample_interval: f64) -> IntegratorConfig {
    IntegratorConfig {
        rel_tol,
        abs_tol: rel_tol * 1e-2,
        t_end: 1.2,
        sample_interval,
        ..IntegratorConfig::default()
    }
}

fn worked_run(rel_tol: f64, sample_interval: f64) -> Trajectory {
    let h = HamiltonianSpec::cubic(1, 0, 0, 1);
    integrate(
        &h,
        PhaseState::new(0.0, 1.0, 0.0),
        &worked_cfg(rel_tol, sample_interval),
    )
    .unwrap()
}

#[test]
fn drift_scales_with_the_tolerance() {
    let h = HamiltonianSpec::cubic(1, 0, 0, 1);
    let drifts: Vec<f64> = [1e-6, 1e-8, 1e-10]
        .iter()
        .map(|&rel| {
            let traj = worked_run(rel, 0.01);
            drift_report(&traj, &h).unwrap().max_rel_drift_psi
        })
        .collect();
    assert!(drifts[0] < 1e-4, "drift at 1e-6: {}", drifts[0]);
    assert!(drifts[1] < drifts[0] / 10.0, "1e-8 vs 1e-6: {drifts:?}");
    assert!(drifts[2] < drifts[1] / 10.0, "1e-10 vs 1e-8: {drifts:?}");
    assert!(drifts[2] < 1e-9, "drift at 1e-10: {}", drifts[2]);
}

#[test]
fn dense_output_differentiates_cleanly() {
    // Central differences of the sampled F channel must reproduce the Fdot
    // channel to second order in the grid spacing: halving the spacing has
    // to shrink the defect by roughly four.
    let defect = |traj: &Trajectory| {
        let s = &traj.samples;
        let mut worst = 0.0_f64;
        for w in s.windows(3) {
            let dt = w[2].t - w[0].t;
            let diff = (w[2].f - w[0].f) / dt;
            worst = worst.max((diff - w[1].fdot).abs());
        }
        worst
    };
    let coarse = defect(&worked_run(1e-10, 0.02));
    let fine = defect(&worked_run(1e-10, 0.01));
    assert!(coarse < 1e-2, "coarse defect {coarse}");
    assert!(
        fine < coarse / 2.5,
        "no second-order decay: coarse {coarse}, fine {fine}"
    );
}

#[test]
fn interior_samples_sit_on_the_true_orbit() {
    // Harmonic oscillator: psi = (p^2 + q^2)/2 rotates (1, 0) to
    // (cos t, sin t); every dense-output sample must track it.
    let circle = BinaryForm::from_i64(&[1, 0, 1]).unwrap().scale(&rat(1, 2));
    let cfg = IntegratorConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        t_end: 7.0,
        sample_interval: 0.05,
        ..IntegratorConfig::default()
    };
    let traj = integrate_form(&circle, PhaseState::new(0.0, 1.0, 0.0), &cfg).unwrap();
    assert_eq!(traj.status, TrajectoryStatus::Completed);
    assert!(traj.params.is_none());
    for s in &traj.samples {
        assert!((s.p - s.t.cos()).abs() < 1e-9, "p at t = {}", s.t);
        assert!((s.q - s.t.sin()).abs() < 1e-9, "q at t = {}", s.t);
        assert_eq!(s.f, 0.0);
        assert_eq!(s.fdot, 0.0);
    }
}

#[test]
fn unreachable_threshold_becomes_step_failure() {
    // Against a blow-up at t = 1 the step size underflows before |p| can
    // ever reach 1e300; that must be reported as a step failure, with the
    // samples collected so far preserved.
    let h = HamiltonianSpec::cubic(1, 0, 0, 1);
    let cfg = IntegratorConfig {
        rel_tol: 1e-10,
        abs_tol: 1e-12,
        t_end: 2.0,
        sample_interval: 0.01,
        blow_up_threshold: 1e300,
        ..IntegratorConfig::default()
    };
    let traj = integrate(&h, PhaseState::new(0.0, -1.0, 1.0), &cfg).unwrap();
    assert_eq!(traj.status, TrajectoryStatus::StepFailure);
    assert!(traj.blow_up.is_none());
    assert!(!traj.samples.is_empty());
    let last = traj.samples.last().unwrap();
    assert!(last.t < 1.0, "samples past the pole: t = {}", last.t);
    // The last grid point before the pole at t = 1 is 0.99, where
    // F = 1/(1-t)^2 = 1e4.
    assert!(last.t > 0.985, "gave up early: t = {}", last.t);
    assert!(last.f > 9e3, "expected to have tracked toward the pole");
}

#[test]
fn negating_the_hamiltonian_reverses_the_flow() {
    let h = HamiltonianSpec::cubic(2, -1, 0, 3);
    let cfg = IntegratorConfig {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        t_end: 0.4,
        sample_interval: 0.1,
        ..IntegratorConfig::default()
    };
    let fwd = integrate(&h, PhaseState::new(0.0, 0.3, -0.7), &cfg).unwrap();
    let end = fwd.last_state().unwrap();
    let neg = HamiltonianSpec::Cubic(CubicCoeffs::from_i64(-2, 1, 0, -3));
    let back = integrate(&neg, PhaseState::new(0.0, end.p, end.q), &cfg).unwrap();
    let rec = back.last_state().unwrap();
    assert!((rec.p - 0.3).abs() < 1e-9, "p recovered as {}", rec.p);
    assert!((rec.q + 0.7).abs() < 1e-9, "q recovered as {}", rec.q);
}

#[test]
fn batch_results_match_individual_runs_in_order() {
    let h = HamiltonianSpec::quartic(1, 0, -2, 0, 1);
    let cfg = IntegratorConfig {
        t_end: 0.8,
        sample_interval: 0.05,
        ..IntegratorConfig::default()
    };
    let starts: Vec<PhaseState> = [(0.4, 0.1), (-1.0, 0.5), (0.0, 2.0), (1.5, -1.5)]
        .iter()
        .map(|&(p, q)| PhaseState::new(0.0, p, q))
        .collect();
    let batch = integrate_batch(&h, &starts, &cfg);
    assert_eq!(batch.len(), starts.len());
    for (i, s0) in starts.iter().enumerate() {
        let single = integrate(&h, *s0, &cfg).unwrap();
        let b = batch[i].as_ref().unwrap();
        assert_eq!(b.status, single.status);
        assert_eq!(b.samples.len(), single.samples.len());
        for (x, y) in b.samples.iter().zip(&single.samples) {
            assert_eq!(x.p, y.p);
            assert_eq!(x.q, y.q);
        }
    }
}

#[test]
fn config_rejects_nonsense() {
    let bad = IntegratorConfig {
        rel_tol: -1.0,
        ..IntegratorConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = IntegratorConfig {
        t_end: 0.0,
        ..IntegratorConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = IntegratorConfig {
        sample_interval: f64::NAN,
        ..IntegratorConfig::default()
    };
    assert!(bad.validate().is_err());
}
