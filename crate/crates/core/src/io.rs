//! On-disk formats: the 6-column trajectory CSV and the JSON sidecar that
//! carries everything needed to re-derive or certify a run (exact
//! Hamiltonian coefficients, initial state, integrator settings, elliptic
//! parameters, drift report, termination status).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{EllipticParams, HamiltonianSpec, LatticeClass};
use crate::flow::{
    BlowUpEvent, DriftReport, IntegratorConfig, Sample, Trajectory, TrajectoryStatus,
};
use crate::forms::Rat;
use crate::invariants::{CubicCoeffs, QuarticCoeffs};

pub const CSV_HEADER: &str = "t,p,q,psi,F,Fdot";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("invalid sidecar: {0}")]
    Invalid(String),
}

/// Write samples as CSV with 15 significant digits per field.
pub fn write_samples_csv(path: &Path, samples: &[Sample]) -> Result<(), IoError> {
    let mut out = String::with_capacity(64 * (samples.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{:.14e},{:.14e},{:.14e},{:.14e},{:.14e},{:.14e}",
            s.t, s.p, s.q, s.psi, s.f, s.fdot
        );
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a trajectory CSV produced by [`write_samples_csv`].
pub fn read_samples_csv(path: &Path) -> Result<Vec<Sample>, IoError> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == CSV_HEADER => {}
        Some((_, header)) => {
            return Err(IoError::Csv {
                line: 1,
                msg: format!("expected header {CSV_HEADER:?}, found {header:?}"),
            })
        }
        None => {
            return Err(IoError::Csv {
                line: 1,
                msg: "empty file".into(),
            })
        }
    }
    let mut samples = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim_end();
        if row.is_empty() {
            continue;
        }
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != 6 {
            return Err(IoError::Csv {
                line,
                msg: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let mut v = [0.0_f64; 6];
        for (k, field) in fields.iter().enumerate() {
            v[k] = f64::from_str(field.trim()).map_err(|e| IoError::Csv {
                line,
                msg: format!("field {}: cannot parse {field:?}: {e}", k + 1),
            })?;
        }
        samples.push(Sample {
            t: v[0],
            p: v[1],
            q: v[2],
            psi: v[3],
            f: v[4],
            fdot: v[5],
        });
    }
    Ok(samples)
}

/// Hamiltonian as stored on disk: degree plus exact coefficient strings
/// (the defining tuple, not the raw binomial-weighted expansion).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianJson {
    pub degree: u32,
    pub coefficients: Vec<String>,
}

impl HamiltonianJson {
    pub fn from_spec(h: &HamiltonianSpec) -> Self {
        let coefficients = match h {
            HamiltonianSpec::Cubic(c) => {
                vec![
                    c.a.to_string(),
                    c.b.to_string(),
                    c.c.to_string(),
                    c.d.to_string(),
                ]
            }
            HamiltonianSpec::Quartic(c) => vec![
                c.a.to_string(),
                c.b.to_string(),
                c.c.to_string(),
                c.d.to_string(),
                c.e.to_string(),
            ],
        };
        HamiltonianJson {
            degree: h.degree(),
            coefficients,
        }
    }

    pub fn to_spec(&self) -> Result<HamiltonianSpec, IoError> {
        let parse = |s: &String| {
            Rat::from_str(s).map_err(|e| IoError::Invalid(format!("coefficient {s:?}: {e}")))
        };
        let c: Vec<Rat> = self
            .coefficients
            .iter()
            .map(parse)
            .collect::<Result<_, _>>()?;
        match (self.degree, c.len()) {
            (3, 4) => Ok(HamiltonianSpec::Cubic(CubicCoeffs::new(
                c[0].clone(),
                c[1].clone(),
                c[2].clone(),
                c[3].clone(),
            ))),
            (4, 5) => Ok(HamiltonianSpec::Quartic(QuarticCoeffs::new(
                c[0].clone(),
                c[1].clone(),
                c[2].clone(),
                c[3].clone(),
                c[4].clone(),
            ))),
            (d, n) => Err(IoError::Invalid(format!(
                "degree {d} with {n} coefficients is not a supported Hamiltonian"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialStateJson {
    pub t: f64,
    pub p: String,
    pub q: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticParamsJson {
    pub g2: f64,
    pub g3: f64,
    pub weierstrass_disc: f64,
    pub lattice_class: LatticeClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g2_exact: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g3_exact: Option<String>,
}

impl EllipticParamsJson {
    pub fn from_exact(exact: &EllipticParams<Rat>) -> Self {
        let f = exact.to_f64();
        EllipticParamsJson {
            g2: f.g2,
            g3: f.g3,
            weierstrass_disc: f.weierstrass_disc,
            lattice_class: f.lattice_class,
            g2_exact: Some(exact.g2.to_string()),
            g3_exact: Some(exact.g3.to_string()),
        }
    }

    pub fn from_f64(p: &EllipticParams<f64>) -> Self {
        EllipticParamsJson {
            g2: p.g2,
            g3: p.g3,
            weierstrass_disc: p.weierstrass_disc,
            lattice_class: p.lattice_class,
            g2_exact: None,
            g3_exact: None,
        }
    }

    pub fn params_f64(&self) -> EllipticParams<f64> {
        EllipticParams {
            g2: self.g2,
            g3: self.g3,
            weierstrass_disc: self.weierstrass_disc,
            lattice_class: self.lattice_class,
        }
    }
}

/// Everything about a run except the samples themselves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub hamiltonian: HamiltonianJson,
    pub initial_state: InitialStateJson,
    pub integrator: IntegratorConfig,
    pub elliptic_params: Option<EllipticParamsJson>,
    pub drift_report: Option<DriftReport>,
    pub status: TrajectoryStatus,
    pub blow_up: Option<BlowUpEvent>,
}

impl Sidecar {
    /// Reattach parameters and status to samples read back from CSV.
    pub fn to_trajectory(&self, samples: Vec<Sample>) -> Trajectory {
        Trajectory {
            samples,
            params: self.elliptic_params.as_ref().map(|p| p.params_f64()),
            status: self.status,
            blow_up: self.blow_up,
        }
    }
}

pub fn write_sidecar(path: &Path, sidecar: &Sidecar) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(sidecar)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar, IoError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::rat;

    fn sample_row(t: f64) -> Sample {
        Sample {
            t,
            p: -1.0 / 3.0,
            q: 2.0_f64.sqrt(),
            psi: 0.123456789012345e-7,
            f: -9.87e4,
            fdot: 0.0,
        }
    }

    #[test]
    fn csv_round_trip_preserves_printed_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        let samples: Vec<Sample> = (0..5).map(|i| sample_row(i as f64 * 0.1)).collect();
        write_samples_csv(&path, &samples).unwrap();
        let back = read_samples_csv(&path).unwrap();
        assert_eq!(back.len(), samples.len());
        for (a, b) in samples.iter().zip(&back) {
            // Parsing the printed value and printing again is a fixed point.
            assert_eq!(format!("{:.14e}", a.q), format!("{:.14e}", b.q));
            assert!((a.q - b.q).abs() <= 1e-14 * a.q.abs());
        }
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,p,q,psi,F,Fdot\n"));
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "time,p,q\n").unwrap();
        let err = read_samples_csv(&path).unwrap_err();
        assert!(matches!(err, IoError::Csv { line: 1, .. }), "{err}");

        fs::write(&path, format!("{CSV_HEADER}\n1.0,2.0,3.0\n")).unwrap();
        let err = read_samples_csv(&path).unwrap_err();
        assert!(matches!(err, IoError::Csv { line: 2, .. }), "{err}");

        fs::write(
            &path,
            format!("{CSV_HEADER}\n0,0,0,0,0,0\n1.0,x,3.0,0,0,0\n"),
        )
        .unwrap();
        let err = read_samples_csv(&path).unwrap_err();
        assert!(matches!(err, IoError::Csv { line: 3, .. }), "{err}");
    }

    #[test]
    fn hamiltonian_json_round_trip() {
        let h = HamiltonianSpec::Cubic(CubicCoeffs::new(
            rat(1, 1),
            rat(-3, 4),
            rat(0, 1),
            rat(7, 2),
        ));
        let j = HamiltonianJson::from_spec(&h);
        assert_eq!(j.degree, 3);
        assert_eq!(j.coefficients, vec!["1", "-3/4", "0", "7/2"]);
        assert_eq!(j.to_spec().unwrap(), h);

        let q = HamiltonianSpec::quartic(1, 0, 0, 0, 1);
        assert_eq!(HamiltonianJson::from_spec(&q).to_spec().unwrap(), q);

        let bad = HamiltonianJson {
            degree: 5,
            coefficients: vec!["1".into(); 6],
        };
        assert!(matches!(bad.to_spec(), Err(IoError::Invalid(_))));
    }

    #[test]
    fn sidecar_round_trip() {
        let h = HamiltonianSpec::cubic(1, 0, 0, 1);
        let exact = h.g_constants(&rat(1, 3));
        let sidecar = Sidecar {
            hamiltonian: HamiltonianJson::from_spec(&h),
            initial_state: InitialStateJson {
                t: 0.0,
                p: "1".into(),
                q: "0".into(),
            },
            integrator: IntegratorConfig::default(),
            elliptic_params: Some(EllipticParamsJson::from_exact(&exact)),
            drift_report: None,
            status: TrajectoryStatus::Completed,
            blow_up: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        write_sidecar(&path, &sidecar).unwrap();
        let back = read_sidecar(&path).unwrap();
        assert_eq!(back, sidecar);
        let p = back.elliptic_params.unwrap();
        assert_eq!(p.g3_exact.as_deref(), Some("-1"));
        assert_eq!(p.lattice_class, LatticeClass::Equianharmonic);
    }
}
