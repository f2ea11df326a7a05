//! Exact covariant algebra of binary cubic and quartic forms, the Hamilton
//! flows they generate on the (p, q) plane, and the Weierstrass machinery
//! that certifies the covariant F(t) along a flow as a shifted p-function.
//!
//! The crate is split along trust boundaries:
//!
//! - [`forms`]: dense binary forms over exact rationals with the Poisson
//!   bracket as the only product beyond ring arithmetic;
//! - [`invariants`]: cubic and quartic covariants (Hessian, Jacobian) and
//!   invariants (discriminant, S, T) plus their syzygies as computable
//!   residual polynomials that must be identically zero;
//! - [`dynamics`]: Hamiltonians built from a form, the covariant F feeding
//!   the p-function ODE, and the lattice invariants (g2, g3) as exact
//!   rationals;
//! - [`flow`]: adaptive embedded Runge-Kutta integration of the Hamilton
//!   equations with dense output, uniform sampling, blow-up detection and
//!   conservation drift reporting;
//! - [`weierstrass`]: evaluation of (p, p'), real half-periods, lattice
//!   classification and time-shift fitting, all in f64 with residual gates;
//! - [`io`]: the trajectory CSV format and the JSON sidecar.

pub mod dynamics;
pub mod flow;
pub mod forms;
pub mod invariants;
pub mod io;
pub mod weierstrass;

pub use dynamics::{EllipticParams, HamiltonianSpec, LatticeClass, WrongDegree};
pub use flow::{
    drift_report, hamilton_rhs, integrate, integrate_batch, integrate_form, BlowUpEvent,
    DriftReport, FlowError, IntegratorConfig, PhaseState, Sample, Trajectory, TrajectoryStatus,
};
pub use forms::{rat, rint, BinaryForm, FormError, Rat};
pub use invariants::{jacobian_determinant, CubicCoeffs, InvariantSet, QuarticCoeffs};
pub use weierstrass::{
    check_disc_relation_numeric, classify_lattice, fit_shift, real_period, wp_eval, PeriodData,
    ShiftFit, WpError, WpValue, MIN_FIT_SAMPLES,
};
