//! Exact homogeneous polynomials in the symplectic coordinates (p, q).
//!
//! Everything here is arbitrary-precision rational arithmetic; no floating
//! point enters until a caller explicitly asks for an `f64` evaluation.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational scalar used for every exact computation.
pub type Rat = BigRational;

/// Small rational constant, e.g. `rat(-3, 2)` for -3/2.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(numer.into(), denom.into())
}

/// Integer as an exact rational.
pub fn rint(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("a binary form needs at least one coefficient")]
    Empty,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("degree-0 form has no partial derivatives")]
    DegreeZero,
}

/// Homogeneous polynomial in (p, q) with exact rational coefficients.
///
/// A degree-n form stores n + 1 coefficients in the RAW monomial basis:
/// `coeffs[k]` multiplies p^(n-k) q^k. Binomially weighted conventions
/// (the cubic a p^3 + 3b p^2 q + 3c p q^2 + d q^3) are applied by the
/// constructors in `invariants`, never here.
///
/// The zero form keeps its nominal degree: `BinaryForm::zero(3)` has four
/// zero coefficients and reports degree 3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryForm {
    coeffs: Vec<Rat>,
}

impl BinaryForm {
    /// Form with the given raw coefficients, `coeffs[k]` on p^(n-k) q^k.
    pub fn new(coeffs: Vec<Rat>) -> Result<Self, FormError> {
        if coeffs.is_empty() {
            return Err(FormError::Empty);
        }
        Ok(Self { coeffs })
    }

    /// Raw integer coefficients, highest power of p first.
    pub fn from_i64(coeffs: &[i64]) -> Result<Self, FormError> {
        Self::new(coeffs.iter().map(|&n| rint(n)).collect())
    }

    /// Zero form of the given nominal degree.
    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![Rat::zero(); degree + 1],
        }
    }

    /// Degree-0 form holding a constant.
    pub fn constant(value: Rat) -> Self {
        Self {
            coeffs: vec![value],
        }
    }

    /// The coordinate p as a degree-1 form.
    pub fn var_p() -> Self {
        Self {
            coeffs: vec![Rat::one(), Rat::zero()],
        }
    }

    /// The coordinate q as a degree-1 form.
    pub fn var_q() -> Self {
        Self {
            coeffs: vec![Rat::zero(), Rat::one()],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of p^(n-k) q^k.
    pub fn coeff(&self, k: usize) -> &Rat {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rat::is_zero)
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        if self.degree() != other.degree() {
            return Err(FormError::DegreeMismatch(self.degree(), other.degree()));
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { coeffs })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: &Rat) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.degree() + other.degree();
        let mut coeffs = vec![Rat::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Self { coeffs }
    }

    /// n-th power; `pow(0)` is the constant 1 of degree 0.
    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(Rat::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn partial_p(&self) -> Result<Self, FormError> {
        let n = self.degree();
        if n == 0 {
            return Err(FormError::DegreeZero);
        }
        let coeffs = (0..n)
            .map(|k| &self.coeffs[k] * rint((n - k) as i64))
            .collect();
        Ok(Self { coeffs })
    }

    pub fn partial_q(&self) -> Result<Self, FormError> {
        let n = self.degree();
        if n == 0 {
            return Err(FormError::DegreeZero);
        }
        let coeffs = (0..n)
            .map(|k| &self.coeffs[k + 1] * rint((k + 1) as i64))
            .collect();
        Ok(Self { coeffs })
    }

    /// Hamiltonian vector field action X_f(g) = f_p g_q - f_q g_p.
    ///
    /// With f = psi this is d/dt along the flow of the Hamilton equations
    /// -p' = psi_q, q' = psi_p; in particular X_p(q) = 1.
    pub fn poisson_bracket(&self, other: &Self) -> Result<Self, FormError> {
        let fp = self.partial_p()?;
        let fq = self.partial_q()?;
        let gp = other.partial_p()?;
        let gq = other.partial_q()?;
        fp.mul(&gq).sub(&fq.mul(&gp))
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, p: &Rat, q: &Rat) -> Rat {
        let mut acc = self.coeffs[0].clone();
        let mut qpow = Rat::one();
        for c in &self.coeffs[1..] {
            qpow *= q;
            acc = acc * p + c * &qpow;
        }
        acc
    }

    /// Floating-point evaluation (coefficients rounded once).
    pub fn eval_f64(&self, p: f64, q: f64) -> f64 {
        let mut acc = 0.0;
        let mut qpow = 1.0;
        let mut first = true;
        for c in &self.coeffs {
            let cf = c.to_f64().unwrap_or(f64::NAN);
            if first {
                acc = cf;
                first = false;
            } else {
                qpow *= q;
                acc = acc * p + cf * qpow;
            }
        }
        acc
    }

    /// Raw coefficients rounded to f64, for repeated numeric evaluation.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }

    /// Substitute p -> pp*p + pq*q, q -> qp*p + qq*q.
    pub fn compose_linear(&self, pp: &Rat, pq: &Rat, qp: &Rat, qq: &Rat) -> Self {
        let n = self.degree();
        let lin_p = Self {
            coeffs: vec![pp.clone(), pq.clone()],
        };
        let lin_q = Self {
            coeffs: vec![qp.clone(), qq.clone()],
        };
        let mut acc = Self::zero(n);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = lin_p.pow((n - k) as u32).mul(&lin_q.pow(k as u32));
            acc = acc
                .add(&term.scale(c))
                .expect("degrees match by construction");
        }
        acc
    }
}

impl fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let n = self.degree();
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let ip = n - k;
            let iq = k;
            let mut wrote = false;
            if !mag.is_one() || (ip == 0 && iq == 0) {
                write!(f, "{}", mag)?;
                wrote = true;
            }
            for (sym, exp) in [("p", ip), ("q", iq)] {
                if exp == 0 {
                    continue;
                }
                if wrote {
                    write!(f, " ")?;
                }
                if exp == 1 {
                    write!(f, "{sym}")?;
                } else {
                    write!(f, "{sym}^{exp}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}
