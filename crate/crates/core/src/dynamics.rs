//! The scalar covariant F of a cubic/quartic Hamiltonian and the exact
//! dynamical identities it satisfies.
//!
//! For a cubic Hamiltonian psi = U/3 the flow of -p' = psi_q, q' = psi_p
//! obeys z'' = 2Fz with F = -H, and F itself solves F'' = 6F^2 and
//! F'^2 = 4F^3 - g3 with g3 = -D (3 psi)^2. For a quartic psi = U/4 the
//! analogues are z'' = (3/4)Fz with F = -4H, F'' = 6F^2 - g2/2, and
//! F'^2 = 4F^3 - g2 F - g3 with g2 = S (16 psi)^2, g3 = T (16 psi)^3.
//! All of these are polynomial identities; the residual operations here
//! return them as forms that callers assert to be identically zero.

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{rat, rint, BinaryForm, Rat};
use crate::invariants::{CubicCoeffs, InvariantSet, QuarticCoeffs};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("operation requires a quartic Hamiltonian, got degree {0}")]
pub struct WrongDegree(pub u32);

/// Lattice type of (g2, g3), named by the shape of the period lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeClass {
    General,
    Equianharmonic,
    Lemniscatic,
    Degenerate,
}

impl std::fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LatticeClass::General => "general",
            LatticeClass::Equianharmonic => "equianharmonic",
            LatticeClass::Lemniscatic => "lemniscatic",
            LatticeClass::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

/// Weierstrass data of one energy level: g2, g3, the discriminant
/// g2^3 - 27 g3^2, and the lattice class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticParams<T = f64> {
    pub g2: T,
    pub g3: T,
    pub weierstrass_disc: T,
    pub lattice_class: LatticeClass,
}

impl EllipticParams<Rat> {
    pub fn to_f64(&self) -> EllipticParams<f64> {
        EllipticParams {
            g2: self.g2.to_f64().unwrap_or(f64::NAN),
            g3: self.g3.to_f64().unwrap_or(f64::NAN),
            weierstrass_disc: self.weierstrass_disc.to_f64().unwrap_or(f64::NAN),
            lattice_class: self.lattice_class,
        }
    }
}

fn classify_exact(g2: &Rat, g3: &Rat) -> LatticeClass {
    if g2.is_zero() && !g3.is_zero() {
        LatticeClass::Equianharmonic
    } else if g3.is_zero() && !g2.is_zero() {
        LatticeClass::Lemniscatic
    } else if (g2 * g2 * g2 - rint(27) * g3 * g3).is_zero() {
        LatticeClass::Degenerate
    } else {
        LatticeClass::General
    }
}

/// A homogeneous cubic or quartic Hamiltonian, stored through the
/// binomial coefficients of U = 3 psi (cubic) or U = 4 psi (quartic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HamiltonianSpec {
    Cubic(CubicCoeffs),
    Quartic(QuarticCoeffs),
}

impl HamiltonianSpec {
    pub fn cubic(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::Cubic(CubicCoeffs::from_i64(a, b, c, d))
    }

    pub fn quartic(a: i64, b: i64, c: i64, d: i64, e: i64) -> Self {
        Self::Quartic(QuarticCoeffs::from_i64(a, b, c, d, e))
    }

    pub fn degree(&self) -> u32 {
        match self {
            Self::Cubic(_) => 3,
            Self::Quartic(_) => 4,
        }
    }

    /// The binomially weighted form U = degree * psi.
    pub fn form_u(&self) -> BinaryForm {
        match self {
            Self::Cubic(c) => c.form(),
            Self::Quartic(c) => c.form(),
        }
    }

    /// The Hamiltonian psi = U/degree.
    pub fn psi(&self) -> BinaryForm {
        self.form_u().scale(&rat(1, i64::from(self.degree())))
    }

    pub fn invariants(&self) -> InvariantSet {
        match self {
            Self::Cubic(c) => c.invariants(),
            Self::Quartic(c) => c.invariants(),
        }
    }

    pub fn hessian(&self) -> BinaryForm {
        match self {
            Self::Cubic(c) => c.hessian(),
            Self::Quartic(c) => c.hessian(),
        }
    }

    pub fn jacobian(&self) -> BinaryForm {
        match self {
            Self::Cubic(c) => c.jacobian(),
            Self::Quartic(c) => c.jacobian(),
        }
    }

    /// Scalar covariant F driving z'' = lame_factor * F * z.
    ///
    /// Cubic: F = (b^2 - ac) p^2 + (bc - ad) pq + (c^2 - bd) q^2 = -H.
    /// Quartic: F = 4G where G = (b^2 - ac) p^4 + 2(bc - ad) p^3 q
    /// + (3c^2 - ae - 2bd) p^2 q^2 + 2(cd - be) p q^3 + (d^2 - ce) q^4 = -H.
    pub fn covariant_f(&self) -> BinaryForm {
        match self {
            Self::Cubic(CubicCoeffs { a, b, c, d }) => {
                BinaryForm::new(vec![b * b - a * c, b * c - a * d, c * c - b * d])
                    .expect("three coefficients")
            }
            Self::Quartic(QuarticCoeffs { a, b, c, d, e }) => BinaryForm::new(vec![
                b * b - a * c,
                rint(2) * (b * c - a * d),
                rint(3) * c * c - a * e - rint(2) * b * d,
                rint(2) * (c * d - b * e),
                d * d - c * e,
            ])
            .expect("five coefficients")
            .scale(&rint(4)),
        }
    }

    /// Coupling constant lambda in z'' = lambda F z: 2 for cubics, 3/4
    /// for quartics.
    pub fn lame_factor(&self) -> Rat {
        match self {
            Self::Cubic(_) => rint(2),
            Self::Quartic(_) => rat(3, 4),
        }
    }

    /// F' = X_psi(F) as an exact form.
    pub fn fdot(&self) -> BinaryForm {
        self.psi()
            .poisson_bracket(&self.covariant_f())
            .expect("degrees >= 1")
    }

    /// g2 as a polynomial in (p, q): the zero form for cubics,
    /// S (16 psi)^2 = 16 S U^2 for quartics.
    pub fn g2_poly(&self) -> BinaryForm {
        match self {
            Self::Cubic(_) => BinaryForm::zero(4),
            Self::Quartic(c) => {
                let s = c.invariant_s();
                self.form_u().pow(2).scale(&(rint(16) * s))
            }
        }
    }

    /// g3 as a polynomial in (p, q): -D (3 psi)^2 = -D U^2 for cubics,
    /// T (16 psi)^3 = 64 T U^3 for quartics.
    pub fn g3_poly(&self) -> BinaryForm {
        match self {
            Self::Cubic(c) => {
                let d = c.discriminant();
                self.form_u().pow(2).scale(&(-d))
            }
            Self::Quartic(c) => {
                let t = c.invariant_t();
                self.form_u().pow(3).scale(&(rint(64) * t))
            }
        }
    }

    /// Exact Weierstrass constants on the energy level psi = psi0.
    pub fn g_constants(&self, psi0: &Rat) -> EllipticParams<Rat> {
        let (g2, g3) = match self {
            Self::Cubic(c) => {
                let three_psi = rint(3) * psi0;
                (Rat::zero(), -c.discriminant() * &three_psi * &three_psi)
            }
            Self::Quartic(c) => {
                let sixteen_psi = rint(16) * psi0;
                let sq = &sixteen_psi * &sixteen_psi;
                (c.invariant_s() * &sq, c.invariant_t() * sq * sixteen_psi)
            }
        };
        let weierstrass_disc = &g2 * &g2 * &g2 - rint(27) * &g3 * &g3;
        let lattice_class = classify_exact(&g2, &g3);
        EllipticParams {
            g2,
            g3,
            weierstrass_disc,
            lattice_class,
        }
    }

    /// Floating-point Weierstrass constants. The lattice class is still
    /// decided from the exact invariants (plus an exact zero test on
    /// psi0), so it never suffers rounding.
    pub fn g_constants_f64(&self, psi0: f64) -> EllipticParams<f64> {
        let (g2, g3, lattice_class) = match self {
            Self::Cubic(c) => {
                let d = c.discriminant();
                let three_psi = 3.0 * psi0;
                let g3 = -d.to_f64().unwrap_or(f64::NAN) * three_psi * three_psi;
                let class = if psi0 == 0.0 || d.is_zero() {
                    LatticeClass::Degenerate
                } else {
                    LatticeClass::Equianharmonic
                };
                (0.0, g3, class)
            }
            Self::Quartic(c) => {
                let s = c.invariant_s();
                let t = c.invariant_t();
                let sixteen_psi = 16.0 * psi0;
                let g2 = s.to_f64().unwrap_or(f64::NAN) * sixteen_psi * sixteen_psi;
                let g3 = t.to_f64().unwrap_or(f64::NAN) * sixteen_psi * sixteen_psi * sixteen_psi;
                let disc_inv = &s * &s * &s - rint(27) * &t * &t;
                let class = if psi0 == 0.0 || disc_inv.is_zero() {
                    LatticeClass::Degenerate
                } else if s.is_zero() {
                    LatticeClass::Equianharmonic
                } else if t.is_zero() {
                    LatticeClass::Lemniscatic
                } else {
                    LatticeClass::General
                };
                (g2, g3, class)
            }
        };
        EllipticParams {
            g2,
            g3,
            weierstrass_disc: g2 * g2 * g2 - 27.0 * g3 * g3,
            lattice_class,
        }
    }

    /// Residuals of the vector ODE z'' = lambda F z, component by
    /// component: [X_psi^2(p) - lambda F p, X_psi^2(q) - lambda F q].
    pub fn vector_ode_residuals(&self) -> [BinaryForm; 2] {
        let psi = self.psi();
        let f = self.covariant_f();
        let lambda = self.lame_factor();
        let mut out = Vec::with_capacity(2);
        for z in [BinaryForm::var_p(), BinaryForm::var_q()] {
            let zdot = psi.poisson_bracket(&z).expect("degrees >= 1");
            let zddot = psi.poisson_bracket(&zdot).expect("degrees >= 1");
            let rhs = f.mul(&z).scale(&lambda);
            out.push(zddot.sub(&rhs).expect("matching degrees"));
        }
        [out.remove(0), out.remove(0)]
    }

    /// Residuals of the scalar ODEs for F:
    /// [F'' - 6F^2 + g2(p,q)/2, F'^2 - 4F^3 + g2(p,q) F + g3(p,q)].
    pub fn scalar_ode_residuals(&self) -> [BinaryForm; 2] {
        let psi = self.psi();
        let f = self.covariant_f();
        let fdot = psi.poisson_bracket(&f).expect("degrees >= 1");
        let fddot = psi.poisson_bracket(&fdot).expect("degrees >= 1");
        let g2 = self.g2_poly();
        let g3 = self.g3_poly();
        let r1 = fddot
            .sub(&f.pow(2).scale(&rint(6)))
            .expect("matching degrees")
            .add(&g2.scale(&rat(1, 2)))
            .expect("matching degrees");
        let r2 = fdot
            .pow(2)
            .sub(&f.pow(3).scale(&rint(4)))
            .expect("matching degrees")
            .add(&g2.mul(&f))
            .expect("matching degrees")
            .add(&g3)
            .expect("matching degrees");
        [r1, r2]
    }

    /// Residual of F' = -J (cubic) resp. F' = -8J (quartic):
    /// X_psi(F) + J or X_psi(F) + 8J.
    pub fn fdot_jacobian_residual(&self) -> BinaryForm {
        let fdot = self.fdot();
        let j = self.jacobian();
        let scaled = match self {
            Self::Cubic(_) => j,
            Self::Quartic(_) => j.scale(&rint(8)),
        };
        fdot.add(&scaled).expect("matching degrees")
    }

    /// Residual of g2^3 - 27 g3^2 = (S^3 - 27 T^2)(16 psi)^6 with g2, g3
    /// as polynomials; quartic only.
    pub fn quartic_disc_relation(&self) -> Result<BinaryForm, WrongDegree> {
        let c = match self {
            Self::Quartic(c) => c,
            Self::Cubic(_) => return Err(WrongDegree(3)),
        };
        let InvariantSet::Quartic { disc, .. } = c.invariants() else {
            unreachable!()
        };
        let g2 = self.g2_poly();
        let g3 = self.g3_poly();
        let lhs = g2
            .pow(3)
            .sub(&g3.pow(2).scale(&rint(27)))
            .expect("degree 24");
        // (16 psi)^6 = (4U)^6 = 4096 U^6.
        let rhs = self.form_u().pow(6).scale(&(disc * rint(4096)));
        Ok(lhs.sub(&rhs).expect("degree 24"))
    }
}
