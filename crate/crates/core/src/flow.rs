//! Adaptive integration of the Hamilton equations -p' = psi_q, q' = psi_p.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with FSAL and the
//! standard quartic dense-output polynomial. Trajectories sample a uniform
//! time grid through the dense output; the psi, F and F' channels are
//! evaluated from the exact covariant polynomials at each sample, never by
//! differencing, so conservation drift and Weierstrass-ODE residuals
//! measure pure integration error.
//!
//! Finite-time blow-up (F is elliptic with double poles, so trajectories
//! routinely escape) is a reported outcome, not a crash: the trajectory is
//! truncated and tagged `BlewUp` with the offending state.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{EllipticParams, HamiltonianSpec};
use crate::forms::BinaryForm;

#[derive(Debug, Error, PartialEq)]
pub enum FlowError {
    #[error("invalid integrator config: {0}")]
    InvalidConfig(String),
    #[error("initial state is not finite")]
    NonFiniteState,
    #[error("psi must have degree >= 1 to generate a flow")]
    ConstantHamiltonian,
    #[error("trajectory is empty")]
    EmptyTrajectory,
}

/// A point on a solution curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub t: f64,
    pub p: f64,
    pub q: f64,
}

impl PhaseState {
    pub fn new(t: f64, p: f64, q: f64) -> Self {
        Self { t, p, q }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.p.is_finite() && self.q.is_finite()
    }
}

/// One exported sample: state plus the derived channels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub psi: f64,
    pub f: f64,
    pub fdot: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    BlewUp,
    StepFailure,
}

/// State at the step on which max(|p|, |q|) first exceeded the threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUpEvent {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub max_abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// First trial step; 0 selects one automatically.
    pub initial_step: f64,
    /// Step-size cap; 0 means uncapped.
    pub max_step: f64,
    /// Blow-up is declared when max(|p|, |q|) exceeds this.
    pub blow_up_threshold: f64,
    pub t_end: f64,
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: 0.0,
            max_step: 0.0,
            blow_up_threshold: 1e8,
            t_end: 1.0,
            sample_interval: 0.01,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), FlowError> {
        let reject = |what: &str| Err(FlowError::InvalidConfig(what.to_string()));
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return reject("rel_tol must be positive and finite");
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return reject("abs_tol must be positive and finite");
        }
        if !(self.initial_step >= 0.0 && self.initial_step.is_finite()) {
            return reject("initial_step must be >= 0 (0 = automatic)");
        }
        if !(self.max_step >= 0.0 && self.max_step.is_finite()) {
            return reject("max_step must be >= 0 (0 = uncapped)");
        }
        if self.blow_up_threshold <= 0.0 || self.blow_up_threshold.is_nan() {
            return reject("blow_up_threshold must be positive");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return reject("t_end must be positive and finite");
        }
        if !(self.sample_interval > 0.0 && self.sample_interval.is_finite()) {
            return reject("sample_interval must be positive and finite");
        }
        Ok(())
    }
}

/// Maximum drift of the conserved quantities along a trajectory, plus the
/// worst pointwise residual of F'^2 = 4F^3 - g2 F - g3.
///
/// Drifts are relative to the initial sample (absolute when the initial
/// value is zero); the Weierstrass residual is scaled by max(1, |F|^3)
/// pointwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub max_rel_drift_psi: f64,
    pub max_rel_drift_g2: f64,
    pub max_rel_drift_g3: f64,
    pub max_abs_residual_weierstrass_ode: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    /// Weierstrass constants fixed by the initial energy; present only for
    /// cubic/quartic Hamiltonians.
    pub params: Option<EllipticParams<f64>>,
    pub status: TrajectoryStatus,
    pub blow_up: Option<BlowUpEvent>,
}

impl Trajectory {
    pub fn last_state(&self) -> Option<PhaseState> {
        self.samples.last().map(|s| PhaseState::new(s.t, s.p, s.q))
    }
}

/// Right-hand side of the Hamilton equations: (p', q') = (-psi_q, psi_p),
/// evaluated in floating point from the exact partials.
pub fn hamilton_rhs(h: &HamiltonianSpec, s: &PhaseState) -> (f64, f64) {
    let psi = h.psi();
    let dp = psi.partial_p().expect("degree >= 1");
    let dq = psi.partial_q().expect("degree >= 1");
    (-dq.eval_f64(s.p, s.q), dp.eval_f64(s.p, s.q))
}

/// Integrate a cubic/quartic Hamiltonian from (p0, q0) at t = 0, with the
/// F and F' channels filled from the exact covariants and the Weierstrass
/// constants attached from the initial energy.
pub fn integrate(
    h: &HamiltonianSpec,
    s0: PhaseState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    let psi = h.psi();
    let f = h.covariant_f();
    let fdot = h.fdot();
    let psi0 = psi.eval_f64(s0.p, s0.q);
    let params = h.g_constants_f64(psi0);
    let mut traj = integrate_channels(&psi, Some(&f), Some(&fdot), s0, cfg)?;
    traj.params = Some(params);
    Ok(traj)
}

/// Integrate the flow of an arbitrary homogeneous psi (degree >= 1). The
/// F and F' channels are written as zero and no Weierstrass constants are
/// attached; this is the entry point for degree-2 oracle Hamiltonians.
pub fn integrate_form(
    psi: &BinaryForm,
    s0: PhaseState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    integrate_channels(psi, None, None, s0, cfg)
}

/// Data-parallel sweep over initial states.
pub fn integrate_batch(
    h: &HamiltonianSpec,
    states: &[PhaseState],
    cfg: &IntegratorConfig,
) -> Vec<Result<Trajectory, FlowError>> {
    states.par_iter().map(|&s0| integrate(h, s0, cfg)).collect()
}

/// Conservation report for a cubic/quartic trajectory.
pub fn drift_report(traj: &Trajectory, h: &HamiltonianSpec) -> Result<DriftReport, FlowError> {
    let first = traj.samples.first().ok_or(FlowError::EmptyTrajectory)?;
    let psi0 = first.psi;
    let params0 = h.g_constants_f64(psi0);
    let rel = |x: f64, x0: f64| {
        let denom = if x0 == 0.0 { 1.0 } else { x0.abs() };
        (x - x0).abs() / denom
    };
    let mut report = DriftReport {
        max_rel_drift_psi: 0.0,
        max_rel_drift_g2: 0.0,
        max_rel_drift_g3: 0.0,
        max_abs_residual_weierstrass_ode: 0.0,
    };
    for s in &traj.samples {
        let here = h.g_constants_f64(s.psi);
        report.max_rel_drift_psi = report.max_rel_drift_psi.max(rel(s.psi, psi0));
        report.max_rel_drift_g2 = report.max_rel_drift_g2.max(rel(here.g2, params0.g2));
        report.max_rel_drift_g3 = report.max_rel_drift_g3.max(rel(here.g3, params0.g3));
        let residual = s.fdot * s.fdot - (4.0 * s.f * s.f * s.f - params0.g2 * s.f - params0.g3);
        let scale = s.f.abs().powi(3).max(1.0);
        report.max_abs_residual_weierstrass_ode = report
            .max_abs_residual_weierstrass_ode
            .max(residual.abs() / scale);
    }
    Ok(report)
}

/// Homogeneous polynomial with f64 coefficients, `c[k]` on p^(n-k) q^k.
#[derive(Clone, Debug)]
struct PolyF64 {
    c: Vec<f64>,
}

impl PolyF64 {
    fn from_form(f: &BinaryForm) -> Self {
        Self { c: f.coeffs_f64() }
    }

    fn eval(&self, p: f64, q: f64) -> f64 {
        let mut acc = self.c[0];
        let mut qpow = 1.0;
        for &c in &self.c[1..] {
            qpow *= q;
            acc = acc * p + c * qpow;
        }
        acc
    }
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights for the quartic interpolant.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS: u64 = 20_000_000;

type Vec2 = [f64; 2];

struct Dense {
    t: f64,
    h: f64,
    cont: [Vec2; 5],
}

impl Dense {
    fn eval(&self, t: f64) -> Vec2 {
        let theta = (t - self.t) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.cont[0][i]
                + theta
                    * (self.cont[1][i]
                        + theta1
                            * (self.cont[2][i]
                                + theta * (self.cont[3][i] + theta1 * self.cont[4][i])));
        }
        out
    }
}

fn integrate_channels(
    psi: &BinaryForm,
    f: Option<&BinaryForm>,
    fdot: Option<&BinaryForm>,
    s0: PhaseState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    cfg.validate()?;
    if !s0.is_finite() {
        return Err(FlowError::NonFiniteState);
    }
    if psi.degree() == 0 {
        return Err(FlowError::ConstantHamiltonian);
    }
    let dpsi_dp = PolyF64::from_form(&psi.partial_p().expect("degree >= 1"));
    let dpsi_dq = PolyF64::from_form(&psi.partial_q().expect("degree >= 1"));
    let rhs = |y: Vec2| -> Vec2 { [-dpsi_dq.eval(y[0], y[1]), dpsi_dp.eval(y[0], y[1])] };

    let psi_poly = PolyF64::from_form(psi);
    let f_poly = f.map(PolyF64::from_form);
    let fdot_poly = fdot.map(PolyF64::from_form);
    let make_sample = |t: f64, y: Vec2| Sample {
        t,
        p: y[0],
        q: y[1],
        psi: psi_poly.eval(y[0], y[1]),
        f: f_poly.as_ref().map_or(0.0, |f| f.eval(y[0], y[1])),
        fdot: fdot_poly.as_ref().map_or(0.0, |f| f.eval(y[0], y[1])),
    };

    let t_end = cfg.t_end;
    let hmax = if cfg.max_step > 0.0 {
        cfg.max_step.min(t_end)
    } else {
        t_end
    };
    let delta = cfg.sample_interval;
    let end_eps = 1e-12 * t_end.max(1.0);

    let mut t = 0.0;
    let mut y = [s0.p, s0.q];
    let mut k1 = rhs(y);
    let mut h = if cfg.initial_step > 0.0 {
        cfg.initial_step.min(hmax)
    } else {
        initial_step_guess(&rhs, y, k1, cfg, hmax)
    };

    let mut samples = vec![make_sample(0.0, y)];
    let mut next_grid = 1u64;
    let mut status = TrajectoryStatus::Completed;
    let mut blow_up = None;
    let mut rejected = false;
    let mut nsteps = 0u64;

    while t < t_end - end_eps {
        h = h.min(t_end - t);
        if h < 1e-14 * t.abs().max(1.0) {
            status = TrajectoryStatus::StepFailure;
            break;
        }
        nsteps += 1;
        if nsteps > MAX_STEPS {
            status = TrajectoryStatus::StepFailure;
            break;
        }

        let mut ys = [0.0; 2];
        for i in 0..2 {
            ys[i] = y[i] + h * A21 * k1[i];
        }
        let k2 = rhs(ys);
        for i in 0..2 {
            ys[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        let k3 = rhs(ys);
        for i in 0..2 {
            ys[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        let k4 = rhs(ys);
        for i in 0..2 {
            ys[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        let k5 = rhs(ys);
        for i in 0..2 {
            ys[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let k6 = rhs(ys);
        let mut ynew = [0.0; 2];
        for i in 0..2 {
            ynew[i] =
                y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        let k7 = rhs(ynew);

        let mut err_sq = 0.0;
        for i in 0..2 {
            let e =
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(ynew[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / 2.0).sqrt();

        if !err.is_finite() {
            h *= 0.5;
            rejected = true;
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected = true;
            continue;
        }

        // Accepted. Check blow-up before emitting anything from this step.
        let max_abs = ynew[0].abs().max(ynew[1].abs());
        if !max_abs.is_finite() || max_abs > cfg.blow_up_threshold {
            status = TrajectoryStatus::BlewUp;
            blow_up = Some(BlowUpEvent {
                t: t + h,
                p: ynew[0],
                q: ynew[1],
                max_abs,
            });
            break;
        }

        let mut cont = [[0.0; 2]; 5];
        for i in 0..2 {
            let dy = ynew[i] - y[i];
            let bspl = h * k1[i] - dy;
            cont[0][i] = y[i];
            cont[1][i] = dy;
            cont[2][i] = bspl;
            cont[3][i] = dy - h * k7[i] - bspl;
            cont[4][i] =
                h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = Dense { t, h, cont };
        let t_new = t + h;
        loop {
            let tg = next_grid as f64 * delta;
            if tg > t_new + end_eps || tg > t_end + end_eps {
                break;
            }
            let yg = dense.eval(tg);
            samples.push(make_sample(tg, yg));
            next_grid += 1;
        }

        t = t_new;
        y = ynew;
        k1 = k7;

        let mut fac = 0.9 * err.powf(-0.2);
        if !fac.is_finite() {
            fac = 10.0;
        }
        fac = fac.clamp(0.2, 10.0);
        if rejected {
            fac = fac.min(1.0);
        }
        rejected = false;
        h = (h * fac).min(hmax);
    }

    if status == TrajectoryStatus::Completed {
        // Ensure the final state is exported even off the sample grid.
        let need_end = samples
            .last()
            .is_none_or(|s| (s.t - t_end).abs() > end_eps && s.t < t_end);
        if need_end {
            samples.push(make_sample(t_end, y));
        }
    }

    Ok(Trajectory {
        samples,
        params: None,
        status,
        blow_up,
    })
}

fn initial_step_guess(
    rhs: &dyn Fn(Vec2) -> Vec2,
    y0: Vec2,
    k1: Vec2,
    cfg: &IntegratorConfig,
    hmax: f64,
) -> f64 {
    let sc = |i: usize| cfg.abs_tol + cfg.rel_tol * y0[i].abs();
    let norm = |v: Vec2| (((v[0] / sc(0)).powi(2) + (v[1] / sc(1)).powi(2)) / 2.0).sqrt();
    let d0 = norm(y0);
    let d1 = norm(k1);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(hmax);
    let y1 = [y0[0] + h0 * k1[0], y0[1] + h0 * k1[1]];
    let k2 = rhs(y1);
    let d2 = norm([k2[0] - k1[0], k2[1] - k1[1]]) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(hmax)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::rat;

    #[test]
    fn rhs_examples() {
        let h = HamiltonianSpec::cubic(1, 0, 0, 1);
        let (dp, dq) = hamilton_rhs(&h, &PhaseState::new(0.0, 1.0, 0.0));
        assert_eq!((dp, dq), (0.0, 1.0));
        let h = HamiltonianSpec::quartic(1, 0, 0, 0, 1);
        let (dp, dq) = hamilton_rhs(&h, &PhaseState::new(0.0, 1.0, 1.0));
        assert_eq!((dp, dq), (-1.0, 1.0));
        // Origin is a critical point of any homogeneous psi.
        let (dp, dq) = hamilton_rhs(&h, &PhaseState::new(0.0, 0.0, 0.0));
        assert_eq!((dp, dq), (0.0, 0.0));
    }

    #[test]
    fn config_validation() {
        let mut cfg = IntegratorConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.rel_tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg = IntegratorConfig {
            t_end: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg = IntegratorConfig {
            sample_interval: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn harmonic_oscillator_closes_its_orbit() {
        // psi = (p^2 + q^2)/2: exact solution (cos t, sin t) from (1, 0).
        let psi = BinaryForm::from_i64(&[1, 0, 1]).unwrap().scale(&rat(1, 2));
        let cfg = IntegratorConfig {
            t_end: 2.0 * std::f64::consts::PI,
            sample_interval: 0.5,
            ..Default::default()
        };
        let traj = integrate_form(&psi, PhaseState::new(0.0, 1.0, 0.0), &cfg).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Completed);
        let last = traj.last_state().unwrap();
        assert!((last.p - 1.0).abs() < 1e-8, "p = {}", last.p);
        assert!(last.q.abs() < 1e-8, "q = {}", last.q);
        // Interior samples track the circle too.
        for s in &traj.samples {
            assert!((s.p - s.t.cos()).abs() < 1e-8);
            assert!((s.q - s.t.sin()).abs() < 1e-8);
        }
    }

    #[test]
    fn psi_channel_is_conserved() {
        let h = HamiltonianSpec::cubic(1, 0, 0, 1);
        let cfg = IntegratorConfig {
            t_end: 1.2,
            ..Default::default()
        };
        let traj = integrate(&h, PhaseState::new(0.0, 1.0, 0.0), &cfg).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::Completed);
        let report = drift_report(&traj, &h).unwrap();
        assert!(report.max_rel_drift_psi < 1e-9, "{report:?}");
    }

    #[test]
    fn blow_up_is_reported_not_thrown() {
        let h = HamiltonianSpec::cubic(1, 0, 0, 1);
        let cfg = IntegratorConfig {
            t_end: 2.0,
            sample_interval: 0.001,
            ..Default::default()
        };
        let traj = integrate(&h, PhaseState::new(0.0, -1.0, 1.0), &cfg).unwrap();
        assert_eq!(traj.status, TrajectoryStatus::BlewUp);
        let event = traj.blow_up.unwrap();
        assert!(event.t < 1.0, "blow-up at t = {}", event.t);
        assert!(event.max_abs > cfg.blow_up_threshold);
    }

    #[test]
    fn single_sample_trajectory_reports_zero_drift() {
        let h = HamiltonianSpec::cubic(1, 0, 0, 1);
        let traj = Trajectory {
            samples: vec![Sample {
                t: 0.0,
                p: 1.0,
                q: 0.0,
                psi: 1.0 / 3.0,
                f: 0.0,
                fdot: -1.0,
            }],
            params: None,
            status: TrajectoryStatus::Completed,
            blow_up: None,
        };
        let report = drift_report(&traj, &h).unwrap();
        assert_eq!(report.max_rel_drift_psi, 0.0);
        assert_eq!(report.max_rel_drift_g2, 0.0);
        assert_eq!(report.max_rel_drift_g3, 0.0);
    }

    #[test]
    fn batch_runs_match_single_runs() {
        let h = HamiltonianSpec::cubic(1, 0, 0, 1);
        let cfg = IntegratorConfig {
            t_end: 0.5,
            ..Default::default()
        };
        let states = [
            PhaseState::new(0.0, 1.0, 0.0),
            PhaseState::new(0.0, 1.0, 0.5),
        ];
        let batch = integrate_batch(&h, &states, &cfg);
        for (s0, result) in states.iter().zip(batch) {
            let single = integrate(&h, *s0, &cfg).unwrap();
            let batch_traj = result.unwrap();
            assert_eq!(single.samples.len(), batch_traj.samples.len());
            assert_eq!(single.last_state(), batch_traj.last_state());
        }
    }
}
