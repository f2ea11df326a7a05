//! Classical invariants and covariants of binary cubics and quartics.
//!
//! Coefficients follow Salmon's binomial convention: the cubic is
//! U = a p^3 + 3b p^2 q + 3c p q^2 + d q^3 and the quartic is
//! U = a p^4 + 4b p^3 q + 6c p^2 q^2 + 4d p q^3 + e q^4. The covariants
//! satisfy exact syzygies (Cayley's J^2 = -4H^3 + D U^2 for cubics,
//! J^2 = -4H^3 + S U^2 H - T U^3 for quartics) which `syzygy_residual`
//! exposes as a polynomial that must be the zero form.

use num_traits::Zero;

use crate::forms::{rat, rint, BinaryForm, Rat};

/// Binomial coefficients of a cubic: U = a p^3 + 3b p^2 q + 3c p q^2 + d q^3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubicCoeffs {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
}

impl CubicCoeffs {
    pub fn new(a: Rat, b: Rat, c: Rat, d: Rat) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new(rint(a), rint(b), rint(c), rint(d))
    }

    /// The form U with raw coefficients (a, 3b, 3c, d).
    pub fn form(&self) -> BinaryForm {
        BinaryForm::new(vec![
            self.a.clone(),
            &self.b * rint(3),
            &self.c * rint(3),
            self.d.clone(),
        ])
        .expect("four coefficients")
    }

    /// Recover binomial coefficients from a raw degree-3 form.
    pub fn from_form(u: &BinaryForm) -> Option<Self> {
        if u.degree() != 3 {
            return None;
        }
        Some(Self::new(
            u.coeff(0).clone(),
            u.coeff(1) * rat(1, 3),
            u.coeff(2) * rat(1, 3),
            u.coeff(3).clone(),
        ))
    }

    /// All coefficients multiplied by mu.
    pub fn scale(&self, mu: &Rat) -> Self {
        Self::new(&self.a * mu, &self.b * mu, &self.c * mu, &self.d * mu)
    }

    /// Discriminant D = a^2 d^2 - 3 b^2 c^2 + 4 a c^3 + 4 b^3 d - 6 a b c d.
    pub fn discriminant(&self) -> Rat {
        let Self { a, b, c, d } = self;
        a * a * d * d - rint(3) * b * b * c * c + rint(4) * a * c * c * c + rint(4) * b * b * b * d
            - rint(6) * a * b * c * d
    }

    /// Hessian covariant H = (ac - b^2) p^2 + (ad - bc) pq + (bd - c^2) q^2.
    pub fn hessian(&self) -> BinaryForm {
        let Self { a, b, c, d } = self;
        BinaryForm::new(vec![a * c - b * b, a * d - b * c, b * d - c * c])
            .expect("three coefficients")
    }

    /// Jacobian covariant of (U, H):
    /// J = (2b^3 + a^2 d - 3abc) p^3 + 3(abd + b^2 c - 2ac^2) p^2 q +
    /// 3(2b^2 d - bc^2 - acd) p q^2 + (3bcd - ad^2 - 2c^3) q^3,
    /// which equals (U_p H_q - U_q H_p)/3 identically.
    pub fn jacobian(&self) -> BinaryForm {
        let Self { a, b, c, d } = self;
        BinaryForm::new(vec![
            rint(2) * b * b * b + a * a * d - rint(3) * a * b * c,
            rint(3) * (a * b * d + b * b * c - rint(2) * a * c * c),
            rint(3) * (rint(2) * b * b * d - b * c * c - a * c * d),
            rint(3) * b * c * d - a * d * d - rint(2) * c * c * c,
        ])
        .expect("four coefficients")
    }

    /// Residual of Cayley's identity: J^2 + 4H^3 - D U^2.
    ///
    /// The zero form exactly when the syzygy holds.
    pub fn syzygy_residual(&self) -> BinaryForm {
        let u = self.form();
        let h = self.hessian();
        let j = self.jacobian();
        let lhs = j.pow(2).add(&h.pow(3).scale(&rint(4))).expect("degree 6");
        lhs.sub(&u.pow(2).scale(&self.discriminant()))
            .expect("degree 6")
    }

    pub fn invariants(&self) -> InvariantSet {
        InvariantSet::Cubic {
            d: self.discriminant(),
        }
    }
}

/// Binomial coefficients of a quartic:
/// U = a p^4 + 4b p^3 q + 6c p^2 q^2 + 4d p q^3 + e q^4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuarticCoeffs {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
    pub e: Rat,
}

impl QuarticCoeffs {
    pub fn new(a: Rat, b: Rat, c: Rat, d: Rat, e: Rat) -> Self {
        Self { a, b, c, d, e }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64, e: i64) -> Self {
        Self::new(rint(a), rint(b), rint(c), rint(d), rint(e))
    }

    /// The form U with raw coefficients (a, 4b, 6c, 4d, e).
    pub fn form(&self) -> BinaryForm {
        BinaryForm::new(vec![
            self.a.clone(),
            &self.b * rint(4),
            &self.c * rint(6),
            &self.d * rint(4),
            self.e.clone(),
        ])
        .expect("five coefficients")
    }

    /// Recover binomial coefficients from a raw degree-4 form.
    pub fn from_form(u: &BinaryForm) -> Option<Self> {
        if u.degree() != 4 {
            return None;
        }
        Some(Self::new(
            u.coeff(0).clone(),
            u.coeff(1) * rat(1, 4),
            u.coeff(2) * rat(1, 6),
            u.coeff(3) * rat(1, 4),
            u.coeff(4).clone(),
        ))
    }

    /// All coefficients multiplied by mu.
    pub fn scale(&self, mu: &Rat) -> Self {
        Self::new(
            &self.a * mu,
            &self.b * mu,
            &self.c * mu,
            &self.d * mu,
            &self.e * mu,
        )
    }

    /// Cayley's invariant S = ae - 4bd + 3c^2.
    pub fn invariant_s(&self) -> Rat {
        let Self { a, b, c, d, e } = self;
        a * e - rint(4) * b * d + rint(3) * c * c
    }

    /// Boole's invariant T = ace + 2bcd - ad^2 - b^2 e - c^3.
    pub fn invariant_t(&self) -> Rat {
        let Self { a, b, c, d, e } = self;
        a * c * e + rint(2) * b * c * d - a * d * d - b * b * e - c * c * c
    }

    /// Hessian covariant
    /// H = (ac - b^2) p^4 + 2(ad - bc) p^3 q + (ae + 2bd - 3c^2) p^2 q^2
    ///   + 2(be - cd) p q^3 + (ce - d^2) q^4.
    pub fn hessian(&self) -> BinaryForm {
        let Self { a, b, c, d, e } = self;
        BinaryForm::new(vec![
            a * c - b * b,
            rint(2) * (a * d - b * c),
            a * e + rint(2) * b * d - rint(3) * c * c,
            rint(2) * (b * e - c * d),
            c * e - d * d,
        ])
        .expect("five coefficients")
    }

    /// Sextic Jacobian covariant J = (U_p H_q - U_q H_p)/8.
    ///
    /// The divisor 8 is the unique normalization under which the quartic
    /// syzygy J^2 = -4H^3 + S U^2 H - T U^3 holds exactly.
    pub fn jacobian(&self) -> BinaryForm {
        jacobian_determinant(&self.form(), &self.hessian()).scale(&rat(1, 8))
    }

    /// Residual of the quartic syzygy: J^2 + 4H^3 - S U^2 H + T U^3.
    pub fn syzygy_residual(&self) -> BinaryForm {
        let u = self.form();
        let h = self.hessian();
        let j = self.jacobian();
        let u2h = u.pow(2).mul(&h);
        let lhs = j.pow(2).add(&h.pow(3).scale(&rint(4))).expect("degree 12");
        lhs.sub(&u2h.scale(&self.invariant_s()))
            .expect("degree 12")
            .add(&u.pow(3).scale(&self.invariant_t()))
            .expect("degree 12")
    }

    pub fn invariants(&self) -> InvariantSet {
        let s = self.invariant_s();
        let t = self.invariant_t();
        let disc = &s * &s * &s - rint(27) * &t * &t;
        InvariantSet::Quartic { s, t, disc }
    }
}

/// Unnormalized Jacobian determinant U_p H_q - U_q H_p of two forms.
pub fn jacobian_determinant(u: &BinaryForm, h: &BinaryForm) -> BinaryForm {
    u.poisson_bracket(h)
        .expect("jacobian determinant needs degrees >= 1")
}

/// The scalar invariants of a form: D for cubics, (S, T, S^3 - 27T^2)
/// for quartics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantSet {
    Cubic { d: Rat },
    Quartic { s: Rat, t: Rat, disc: Rat },
}

impl InvariantSet {
    pub fn degree(&self) -> u32 {
        match self {
            InvariantSet::Cubic { .. } => 3,
            InvariantSet::Quartic { .. } => 4,
        }
    }

    /// True when the underlying form has a repeated root.
    pub fn is_degenerate_form(&self) -> bool {
        match self {
            InvariantSet::Cubic { d } => d.is_zero(),
            InvariantSet::Quartic { disc, .. } => disc.is_zero(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(coeffs: &[i64]) -> BinaryForm {
        BinaryForm::from_i64(coeffs).unwrap()
    }

    #[test]
    fn cubic_constructor_applies_binomial_weights() {
        assert_eq!(
            CubicCoeffs::from_i64(1, 0, 0, 1).form(),
            form(&[1, 0, 0, 1])
        );
        // (1,1,1,1) is (p+q)^3.
        assert_eq!(
            CubicCoeffs::from_i64(1, 1, 1, 1).form(),
            form(&[1, 3, 3, 1])
        );
        assert!(CubicCoeffs::from_i64(0, 0, 0, 0).form().is_zero());
    }

    #[test]
    fn quartic_constructor_applies_binomial_weights() {
        assert_eq!(
            QuarticCoeffs::from_i64(1, 0, 0, 0, 1).form(),
            form(&[1, 0, 0, 0, 1])
        );
        assert_eq!(
            QuarticCoeffs::from_i64(1, 0, 1, 0, 1).form(),
            form(&[1, 0, 6, 0, 1])
        );
        // (1,1,1,1,1) is (p+q)^4.
        assert_eq!(
            QuarticCoeffs::from_i64(1, 1, 1, 1, 1).form(),
            form(&[1, 4, 6, 4, 1])
        );
    }

    #[test]
    fn cubic_discriminant_values() {
        assert_eq!(CubicCoeffs::from_i64(1, 0, 0, 1).discriminant(), rint(1));
        // Perfect cube has a repeated root.
        assert_eq!(CubicCoeffs::from_i64(1, 1, 1, 1).discriminant(), rint(0));
        assert_eq!(CubicCoeffs::from_i64(1, 0, 1, 0).discriminant(), rint(4));
    }

    #[test]
    fn cubic_hessian_values() {
        assert_eq!(
            CubicCoeffs::from_i64(1, 0, 0, 1).hessian(),
            form(&[0, 1, 0])
        );
        assert!(CubicCoeffs::from_i64(1, 1, 1, 1).hessian().is_zero());
        assert_eq!(
            CubicCoeffs::from_i64(1, 0, 1, 0).hessian(),
            form(&[1, 0, -1])
        );
    }

    #[test]
    fn cubic_jacobian_values() {
        assert_eq!(
            CubicCoeffs::from_i64(1, 0, 0, 1).jacobian(),
            form(&[1, 0, 0, -1])
        );
        assert!(CubicCoeffs::from_i64(1, 0, 0, 0).jacobian().is_zero());
        assert_eq!(
            CubicCoeffs::from_i64(1, 0, 1, 0).jacobian(),
            form(&[0, -6, 0, -2])
        );
    }

    #[test]
    fn cubic_jacobian_is_normalized_determinant() {
        for coeffs in [(1, 0, 0, 1), (1, 0, 1, 0), (2, -3, 5, 7)] {
            let c = CubicCoeffs::from_i64(coeffs.0, coeffs.1, coeffs.2, coeffs.3);
            let det = jacobian_determinant(&c.form(), &c.hessian());
            assert_eq!(det.scale(&rat(1, 3)), c.jacobian());
        }
    }

    #[test]
    fn quartic_invariant_values() {
        let q = QuarticCoeffs::from_i64(1, 0, 0, 0, 1);
        assert_eq!(q.invariant_s(), rint(1));
        assert_eq!(q.invariant_t(), rint(0));
        let q = QuarticCoeffs::from_i64(1, 0, 1, 0, 1);
        assert_eq!(q.invariant_s(), rint(4));
        assert_eq!(q.invariant_t(), rint(0));
        let q = QuarticCoeffs::from_i64(0, 0, 0, 0, 0);
        assert_eq!(q.invariant_s(), rint(0));
        assert_eq!(q.invariant_t(), rint(0));
    }

    #[test]
    fn quartic_hessian_values() {
        assert_eq!(
            QuarticCoeffs::from_i64(1, 0, 0, 0, 1).hessian(),
            form(&[0, 0, 1, 0, 0])
        );
        assert!(QuarticCoeffs::from_i64(1, 1, 1, 1, 1).hessian().is_zero());
        assert!(QuarticCoeffs::from_i64(0, 0, 0, 0, 0).hessian().is_zero());
    }

    #[test]
    fn quartic_jacobian_values() {
        // U = p^4 + q^4, H = p^2 q^2: J = pq(p^4 - q^4).
        assert_eq!(
            QuarticCoeffs::from_i64(1, 0, 0, 0, 1).jacobian(),
            form(&[0, 1, 0, 0, 0, -1, 0])
        );
        assert!(QuarticCoeffs::from_i64(0, 0, 0, 0, 0).jacobian().is_zero());
        assert!(QuarticCoeffs::from_i64(1, 1, 1, 1, 1).jacobian().is_zero());
    }

    #[test]
    fn syzygy_residuals_vanish_on_examples() {
        for coeffs in [(1, 0, 0, 1), (1, 0, 1, 0), (0, 0, 0, 0), (3, -2, 7, 5)] {
            let c = CubicCoeffs::from_i64(coeffs.0, coeffs.1, coeffs.2, coeffs.3);
            assert!(c.syzygy_residual().is_zero(), "cubic {coeffs:?}");
        }
        for coeffs in [
            (1, 0, 0, 0, 1),
            (1, 1, 1, 1, 1),
            (0, 0, 0, 0, 0),
            (2, -1, 3, 5, -4),
        ] {
            let q = QuarticCoeffs::from_i64(coeffs.0, coeffs.1, coeffs.2, coeffs.3, coeffs.4);
            assert!(q.syzygy_residual().is_zero(), "quartic {coeffs:?}");
        }
    }

    #[test]
    fn invariant_set_reports_degeneracy() {
        assert!(CubicCoeffs::from_i64(1, 1, 1, 1)
            .invariants()
            .is_degenerate_form());
        assert!(!CubicCoeffs::from_i64(1, 0, 0, 1)
            .invariants()
            .is_degenerate_form());
        match QuarticCoeffs::from_i64(1, 0, 1, 0, 1).invariants() {
            InvariantSet::Quartic { s, t, disc } => {
                assert_eq!(s, rint(4));
                assert_eq!(t, rint(0));
                assert_eq!(disc, rint(64));
            }
            _ => unreachable!(),
        }
    }
}
