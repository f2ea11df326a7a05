//! `syzygy`: exact invariants and covariants of binary cubics/quartics,
//! randomized identity verification, Hamilton flow simulation with CSV/JSON
//! artifacts, and Weierstrass certification of stored runs.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::json;
use syzygy_core::dynamics::HamiltonianSpec;
use syzygy_core::flow::{
    drift_report, integrate, integrate_form, IntegratorConfig, PhaseState, Trajectory,
    TrajectoryStatus,
};
use syzygy_core::forms::{rat, rint, BinaryForm, Rat};
use syzygy_core::invariants::{CubicCoeffs, InvariantSet, QuarticCoeffs};
use syzygy_core::io::{
    read_samples_csv, read_sidecar, write_samples_csv, write_sidecar, EllipticParamsJson,
    HamiltonianJson, InitialStateJson, Sidecar,
};
use syzygy_core::weierstrass::{classify_lattice, fit_shift, wp_eval};

#[derive(Parser)]
#[command(
    name = "syzygy",
    version,
    about = "Covariants of binary cubics/quartics, their Hamilton flows, and Weierstrass certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print invariants and covariants of one binary form
    Invariants(InvariantsArgs),
    /// Check the covariant identities on seeded random integer forms
    Verify(VerifyArgs),
    /// Integrate a Hamilton flow and write trajectory artifacts
    Simulate(SimulateArgs),
    /// Certify a stored trajectory's F channel as a shifted Weierstrass p
    Fit(FitArgs),
    /// Classify a lattice from numeric (g2, g3)
    Classify(ClassifyArgs),
    /// Evaluate the Weierstrass p-function at one point
    WpEval(WpEvalArgs),
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    s.parse::<Rat>()
        .map_err(|e| format!("{s:?} is not a rational number (like 2, -5 or 3/4): {e}"))
}

#[derive(Args)]
struct InvariantsArgs {
    /// Cubic a b c d standing for a p^3 + 3b p^2q + 3c pq^2 + d q^3
    #[arg(
        long,
        num_args = 4,
        value_names = ["A", "B", "C", "D"],
        value_parser = parse_rat,
        allow_hyphen_values = true,
        required_unless_present = "quartic",
        conflicts_with = "quartic"
    )]
    cubic: Option<Vec<Rat>>,
    /// Quartic a b c d e standing for a p^4 + 4b p^3q + 6c p^2q^2 + 4d pq^3 + e q^4
    #[arg(
        long,
        num_args = 5,
        value_names = ["A", "B", "C", "D", "E"],
        value_parser = parse_rat,
        allow_hyphen_values = true
    )]
    quartic: Option<Vec<Rat>>,
    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Form degree: 3 or 4
    #[arg(long)]
    degree: u32,
    /// Number of random forms
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// RNG seed; identical seeds reproduce identical trials
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Coefficients are drawn uniformly from [-max-coeff, max-coeff]
    #[arg(long, default_value_t = 20)]
    max_coeff: i64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration JSON
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output file stem (overrides the config)
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    sample_interval: Option<f64>,
    #[arg(long)]
    initial_step: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    blow_up_threshold: Option<f64>,
}

#[derive(Args)]
struct FitArgs {
    /// Trajectory CSV written by `simulate`
    #[arg(long)]
    csv: PathBuf,
    /// Sidecar JSON; defaults to the CSV path with extension `json`
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Certification threshold on the max relative residual
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,
    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    g2: f64,
    #[arg(long, allow_negative_numbers = true)]
    g3: f64,
    /// Relative tolerance for treating invariants as zero
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Args)]
struct WpEvalArgs {
    #[arg(long, allow_negative_numbers = true)]
    g2: f64,
    #[arg(long, allow_negative_numbers = true)]
    g3: f64,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    /// Emit JSON instead of text
    #[arg(long)]
    json: bool,
}

fn main() {
    // Dying quietly on a closed pipe (e.g. `syzygy ... | head`) beats the
    // default panic from println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Invariants(args) => run_invariants(args),
        Command::Verify(args) => run_verify(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Fit(args) => run_fit(args),
        Command::Classify(args) => run_classify(args),
        Command::WpEval(args) => run_wp_eval(args),
    }
}

fn coeff_strings(form: &BinaryForm) -> Vec<String> {
    form.coeffs().iter().map(|c| c.to_string()).collect()
}

fn run_invariants(args: InvariantsArgs) -> anyhow::Result<i32> {
    let h = if let Some(c) = args.cubic {
        HamiltonianSpec::Cubic(CubicCoeffs::new(
            c[0].clone(),
            c[1].clone(),
            c[2].clone(),
            c[3].clone(),
        ))
    } else {
        let c = args.quartic.expect("clap enforces one of the two");
        HamiltonianSpec::Quartic(QuarticCoeffs::new(
            c[0].clone(),
            c[1].clone(),
            c[2].clone(),
            c[3].clone(),
            c[4].clone(),
        ))
    };
    let u = h.form_u();
    let hess = h.hessian();
    let jac = h.jacobian();
    let f = h.covariant_f();
    if args.json {
        let invariants = match h.invariants() {
            InvariantSet::Cubic { d } => json!({ "d": d.to_string() }),
            InvariantSet::Quartic { s, t, disc } => json!({
                "s": s.to_string(),
                "t": t.to_string(),
                "disc": disc.to_string(),
            }),
        };
        let doc = json!({
            "degree": h.degree(),
            "u": coeff_strings(&u),
            "hessian": coeff_strings(&hess),
            "jacobian": coeff_strings(&jac),
            "covariant_f": coeff_strings(&f),
            "invariants": invariants,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("degree {}", h.degree());
        println!("U = {u}");
        println!("H = {hess}");
        println!("J = {jac}");
        println!("F = {f}");
        match h.invariants() {
            InvariantSet::Cubic { d } => println!("D = {d}"),
            InvariantSet::Quartic { s, t, disc } => {
                println!("S = {s}");
                println!("T = {t}");
                println!("disc = S^3 - 27 T^2 = {disc}");
            }
        }
    }
    Ok(0)
}

struct IdentityTally {
    name: &'static str,
    passed: usize,
    first_failure: Option<usize>,
}

impl IdentityTally {
    fn new(name: &'static str) -> Self {
        IdentityTally {
            name,
            passed: 0,
            first_failure: None,
        }
    }
    fn record(&mut self, idx: usize, ok: bool) {
        if ok {
            self.passed += 1;
        } else if self.first_failure.is_none() {
            self.first_failure = Some(idx);
        }
    }
}

fn run_verify(args: VerifyArgs) -> anyhow::Result<i32> {
    if args.degree != 3 && args.degree != 4 {
        bail!("--degree must be 3 or 4, got {}", args.degree);
    }
    if args.max_coeff <= 0 {
        bail!("--max-coeff must be positive");
    }
    let width = args.degree as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let tuples: Vec<Vec<i64>> = (0..args.trials)
        .map(|_| {
            (0..width)
                .map(|_| rng.random_range(-args.max_coeff..=args.max_coeff))
                .collect()
        })
        .collect();

    // Five booleans per trial: syzygy, vector ODE, scalar ODEs, Fdot vs J,
    // and (quartics only) the discriminant relation.
    let outcomes: Vec<[bool; 5]> = tuples
        .par_iter()
        .map(|c| {
            let h = if args.degree == 3 {
                HamiltonianSpec::cubic(c[0], c[1], c[2], c[3])
            } else {
                HamiltonianSpec::quartic(c[0], c[1], c[2], c[3], c[4])
            };
            let syzygy = match &h {
                HamiltonianSpec::Cubic(f) => f.syzygy_residual().is_zero(),
                HamiltonianSpec::Quartic(f) => f.syzygy_residual().is_zero(),
            };
            [
                syzygy,
                h.vector_ode_residuals().iter().all(|r| r.is_zero()),
                h.scalar_ode_residuals().iter().all(|r| r.is_zero()),
                h.fdot_jacobian_residual().is_zero(),
                h.quartic_disc_relation()
                    .map(|r| r.is_zero())
                    .unwrap_or(true),
            ]
        })
        .collect();

    let mut tallies = vec![
        IdentityTally::new("syzygy"),
        IdentityTally::new("vector ODE"),
        IdentityTally::new("scalar ODEs"),
        IdentityTally::new("Fdot vs Jacobian"),
    ];
    if args.degree == 4 {
        tallies.push(IdentityTally::new("disc relation"));
    }
    for (idx, ok) in outcomes.iter().enumerate() {
        for (k, tally) in tallies.iter_mut().enumerate() {
            tally.record(idx, ok[k]);
        }
    }

    println!(
        "degree {}, {} trials, seed {}, coefficients in [-{}, {}]",
        args.degree, args.trials, args.seed, args.max_coeff, args.max_coeff
    );
    let mut all_ok = true;
    for tally in &tallies {
        println!("  {:<18} {}/{}", tally.name, tally.passed, args.trials);
        if tally.passed != args.trials {
            all_ok = false;
            let idx = tally.first_failure.unwrap();
            println!(
                "    first failure: trial {idx} with coefficients {:?}",
                tuples[idx]
            );
        }
    }
    if all_ok {
        println!("all identities verified");
        Ok(0)
    } else {
        println!("verification FAILED");
        Ok(1)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    hamiltonian: HamiltonianJson,
    initial_state: InitialStateConfig,
    #[serde(default)]
    integrator: IntegratorConfig,
    #[serde(default)]
    output: OutputConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialStateConfig {
    p: String,
    q: String,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct OutputConfig {
    directory: Option<PathBuf>,
    name: Option<String>,
    /// Subset of {"csv", "json"}; both by default.
    formats: Option<Vec<String>>,
}

fn run_simulate(args: SimulateArgs) -> anyhow::Result<i32> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let config: RunConfig = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", args.config.display()))?;

    let mut integ = config.integrator.clone();
    if let Some(v) = args.rel_tol {
        integ.rel_tol = v;
    }
    if let Some(v) = args.abs_tol {
        integ.abs_tol = v;
    }
    if let Some(v) = args.t_end {
        integ.t_end = v;
    }
    if let Some(v) = args.sample_interval {
        integ.sample_interval = v;
    }
    if let Some(v) = args.initial_step {
        integ.initial_step = v;
    }
    if let Some(v) = args.max_step {
        integ.max_step = v;
    }
    if let Some(v) = args.blow_up_threshold {
        integ.blow_up_threshold = v;
    }

    let p_exact =
        parse_rat(&config.initial_state.p).map_err(|e| anyhow::anyhow!("initial p: {e}"))?;
    let q_exact =
        parse_rat(&config.initial_state.q).map_err(|e| anyhow::anyhow!("initial q: {e}"))?;
    let s0 = PhaseState::new(
        0.0,
        rat_to_f64(&p_exact).context("initial p does not fit in an f64")?,
        rat_to_f64(&q_exact).context("initial q does not fit in an f64")?,
    );

    let (traj, elliptic, drift) = match config.hamiltonian.degree {
        2 => {
            let traj = simulate_degree2(&config.hamiltonian, s0, &integ)?;
            (traj, None, None)
        }
        3 | 4 => {
            let h = config.hamiltonian.to_spec()?;
            let traj = integrate(&h, s0, &integ)?;
            let psi0 = h.psi().eval(&p_exact, &q_exact);
            let exact = h.g_constants(&psi0);
            let drift = drift_report(&traj, &h).ok();
            (traj, Some(EllipticParamsJson::from_exact(&exact)), drift)
        }
        d => bail!("degree {d} is not supported (use 2, 3 or 4)"),
    };

    let dir = args
        .out
        .or(config.output.directory)
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = args
        .name
        .or(config.output.name)
        .unwrap_or_else(|| "run".to_string());
    let formats = config
        .output
        .formats
        .unwrap_or_else(|| vec!["csv".into(), "json".into()]);
    for f in &formats {
        if f != "csv" && f != "json" {
            bail!("unknown output format {f:?} (expected csv or json)");
        }
    }

    let sidecar = Sidecar {
        hamiltonian: config.hamiltonian,
        initial_state: InitialStateJson {
            t: 0.0,
            p: p_exact.to_string(),
            q: q_exact.to_string(),
        },
        integrator: integ,
        elliptic_params: elliptic,
        drift_report: drift,
        status: traj.status,
        blow_up: traj.blow_up,
    };

    let mut written = Vec::new();
    if formats.iter().any(|f| f == "csv") {
        let path = dir.join(format!("{name}.csv"));
        write_samples_csv(&path, &traj.samples)?;
        written.push(path);
    }
    if formats.iter().any(|f| f == "json") {
        let path = dir.join(format!("{name}.json"));
        write_sidecar(&path, &sidecar)?;
        written.push(path);
    }

    println!(
        "status: {}",
        match traj.status {
            TrajectoryStatus::Completed => "completed",
            TrajectoryStatus::BlewUp => "blew_up",
            TrajectoryStatus::StepFailure => "step_failure",
        }
    );
    println!("samples: {}", traj.samples.len());
    if let Some(event) = &traj.blow_up {
        println!(
            "blow-up at t = {:.9} with max(|p|, |q|) = {:.3e}",
            event.t, event.max_abs
        );
    }
    if let Some(dr) = &sidecar.drift_report {
        println!(
            "max relative psi drift: {:.3e}; Weierstrass ODE residual: {:.3e}",
            dr.max_rel_drift_psi, dr.max_abs_residual_weierstrass_ode
        );
    }
    if let Some(ep) = &sidecar.elliptic_params {
        println!(
            "g2 = {}, g3 = {}, lattice: {}",
            ep.g2_exact.as_deref().unwrap_or("?"),
            ep.g3_exact.as_deref().unwrap_or("?"),
            ep.lattice_class
        );
    }
    for path in &written {
        println!("wrote {}", path.display());
    }

    Ok(match traj.status {
        TrajectoryStatus::Completed => 0,
        TrajectoryStatus::BlewUp => 2,
        TrajectoryStatus::StepFailure => 3,
    })
}

/// Test-only quadratic Hamiltonians: coefficients [a, b, c] stand for
/// U = a p^2 + 2b pq + c q^2 with psi = U/2; no covariant channels.
fn simulate_degree2(
    h: &HamiltonianJson,
    s0: PhaseState,
    integ: &IntegratorConfig,
) -> anyhow::Result<Trajectory> {
    if h.coefficients.len() != 3 {
        bail!(
            "degree 2 takes exactly 3 coefficients, got {}",
            h.coefficients.len()
        );
    }
    let c: Vec<Rat> = h
        .coefficients
        .iter()
        .map(|s| parse_rat(s).map_err(|e| anyhow::anyhow!("coefficient: {e}")))
        .collect::<Result<_, _>>()?;
    let u = BinaryForm::new(vec![c[0].clone(), &c[1] * &rint(2), c[2].clone()])
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    let psi = u.scale(&rat(1, 2));
    Ok(integrate_form(&psi, s0, integ)?)
}

fn rat_to_f64(r: &Rat) -> Option<f64> {
    use num_traits::ToPrimitive;
    r.to_f64().filter(|v| v.is_finite())
}

fn run_fit(args: FitArgs) -> anyhow::Result<i32> {
    let sidecar_path = args
        .sidecar
        .clone()
        .unwrap_or_else(|| args.csv.with_extension("json"));
    let samples =
        read_samples_csv(&args.csv).with_context(|| format!("reading {}", args.csv.display()))?;
    let sidecar = read_sidecar(&sidecar_path)
        .with_context(|| format!("reading {}", sidecar_path.display()))?;
    let traj = sidecar.to_trajectory(samples);
    let params = traj
        .params
        .clone()
        .ok_or_else(|| anyhow::anyhow!("sidecar carries no elliptic parameters to fit against"))?;

    let fit = fit_shift(&traj).context("shift fit failed")?;
    let certified = fit.max_residual <= args.threshold;
    if args.json {
        let doc = json!({
            "t0": fit.t0,
            "max_residual": fit.max_residual,
            "threshold": args.threshold,
            "certified": certified,
            "g2": params.g2,
            "g3": params.g3,
            "lattice_class": params.lattice_class,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!(
            "lattice: {} (g2 = {}, g3 = {})",
            params.lattice_class, params.g2, params.g3
        );
        println!("t0 = {:.14e}", fit.t0);
        println!("max relative residual = {:.3e}", fit.max_residual);
        if certified {
            println!("certified: F(t) = p(t - t0) within {:.1e}", args.threshold);
        } else {
            println!("NOT certified at threshold {:.1e}", args.threshold);
        }
    }
    Ok(if certified { 0 } else { 1 })
}

fn run_classify(args: ClassifyArgs) -> anyhow::Result<i32> {
    if args.tol <= 0.0 || args.tol.is_nan() {
        bail!("--tol must be positive");
    }
    let class = classify_lattice(args.g2, args.g3, args.tol);
    let disc = args.g2.powi(3) - 27.0 * args.g3 * args.g3;
    println!("{class} (disc = {disc:.6e})");
    Ok(0)
}

fn run_wp_eval(args: WpEvalArgs) -> anyhow::Result<i32> {
    let w = wp_eval(args.g2, args.g3, args.t)?;
    let residual = w.ode_residual(args.g2, args.g3);
    if args.json {
        let doc = json!({
            "wp": w.wp,
            "wp_prime": w.wp_prime,
            "ode_residual": residual,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("p  = {:.14e}", w.wp);
        println!("p' = {:.14e}", w.wp_prime);
        println!("ODE residual = {residual:.3e}");
    }
    Ok(0)
}
