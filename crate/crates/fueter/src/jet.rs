//! Jet scalar backend: polynomials truncated at a fixed total degree.
//!
//! A jet of order m carries exactly the Taylor data of a function to degree m
//! at the origin. Multiplication truncates to the smaller order of the two
//! factors, derivation lowers the order by one, and a jet with invertible
//! constant term has an exact multiplicative inverse via the finite geometric
//! series. Constants and exact polynomials are represented with order
//! `EXACT_ORDER` and never lose precision.

use rand::Rng;

use crate::error::Error;
use crate::field::FieldElement;
use crate::poly::PolynomialFn;
use crate::scalar::Scalar;

/// Sentinel order for exact (untruncated) values.
pub const EXACT_ORDER: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetFn {
    poly: PolynomialFn,
    order: u32,
}

impl JetFn {
    /// Truncate a polynomial to a jet of the given order.
    pub fn from_poly(poly: &PolynomialFn, order: u32) -> Self {
        JetFn { poly: poly.truncated(order), order }
    }

    pub fn exact(poly: &PolynomialFn) -> Self {
        JetFn { poly: poly.clone(), order: EXACT_ORDER }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn poly(&self) -> &PolynomialFn {
        &self.poly
    }

    pub fn constant_term(&self) -> FieldElement {
        self.poly.terms.get(&Vec::new()).cloned().unwrap_or_else(FieldElement::zero)
    }

    pub fn eval(&self, point: &[FieldElement]) -> FieldElement {
        self.poly.eval(point)
    }

    /// Value at the origin; identical to the constant term.
    pub fn at_origin(&self) -> FieldElement {
        self.constant_term()
    }

    /// Multiplicative inverse. With f = c(1 + v), v of positive valuation,
    /// f⁻¹ = c⁻¹ Σ_{j≤order} (−v)^j. Requires a nonzero constant term and a
    /// finite order.
    pub fn try_inv(&self) -> Result<Self, Error> {
        let c = self.constant_term();
        if c.is_zero() {
            return Err(Error::NonUnitJet);
        }
        if self.order == EXACT_ORDER {
            // An exact polynomial is invertible as a jet only once truncated.
            return Err(Error::NonUnitJet);
        }
        let c_inv = c.inv().expect("constant term checked nonzero");
        let v = self
            .poly
            .scale(&c_inv)
            .sub(&PolynomialFn::one())
            .truncated(self.order);
        let mut acc = PolynomialFn::one();
        let mut pow = PolynomialFn::one();
        let neg_v = v.neg();
        for _ in 0..self.order {
            pow = pow.mul(&neg_v).truncated(self.order);
            if pow.is_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(JetFn { poly: acc.scale(&c_inv).truncated(self.order), order: self.order })
    }

    /// Random jet with nonzero constant term, suitable as a conformal factor
    /// or gauge weight.
    pub fn random_unit<R: Rng + ?Sized>(
        rng: &mut R,
        num_coords: usize,
        order: u32,
        n_terms: usize,
        bound: i64,
    ) -> Self {
        loop {
            let mut c = FieldElement::random_gaussian(rng, bound);
            if c.is_zero() {
                c = FieldElement::one();
            }
            let p = PolynomialFn::constant(&c)
                .add(&PolynomialFn::random(rng, num_coords, order, n_terms, bound));
            let jet = JetFn::from_poly(&p, order);
            if !jet.constant_term().is_zero() {
                return jet;
            }
        }
    }
}

impl Scalar for JetFn {
    fn zero() -> Self {
        JetFn { poly: PolynomialFn::zero(), order: EXACT_ORDER }
    }

    fn one() -> Self {
        JetFn { poly: PolynomialFn::one(), order: EXACT_ORDER }
    }

    fn from_field(c: &FieldElement) -> Self {
        JetFn { poly: PolynomialFn::constant(c), order: EXACT_ORDER }
    }

    fn add(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        JetFn { poly: self.poly.add(&rhs.poly).truncated(order), order }
    }

    fn sub(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        JetFn { poly: self.poly.sub(&rhs.poly).truncated(order), order }
    }

    fn neg(&self) -> Self {
        JetFn { poly: self.poly.neg(), order: self.order }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let poly = self.poly.mul(&rhs.poly);
        let poly = if order == EXACT_ORDER { poly } else { poly.truncated(order) };
        JetFn { poly, order }
    }

    fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    fn derive(&self, coord: usize) -> Self {
        let order = if self.order == EXACT_ORDER {
            EXACT_ORDER
        } else {
            // A derivative of order-m data is determined only to order m−1.
            // Callers check orders up front; hitting 0 here is a logic error.
            assert!(self.order > 0, "derivative of an order-0 jet is undetermined");
            self.order - 1
        };
        JetFn { poly: self.poly.derive(coord), order }
    }

    fn conj(&self) -> Self {
        JetFn { poly: self.poly.conj(), order: self.order }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn x(i: usize) -> PolynomialFn {
        PolynomialFn::var(i)
    }

    #[test]
    fn geometric_series_inverse() {
        // (1 + x0)⁻¹ at order 2 is 1 − x0 + x0²
        let f = JetFn::from_poly(&PolynomialFn::one().add(&x(0)), 2);
        let inv = f.try_inv().unwrap();
        let expected = PolynomialFn::one().sub(&x(0)).add(&x(0).mul(&x(0)));
        assert_eq!(inv.poly(), &expected);
        assert_eq!(f.mul(&inv), JetFn::from_poly(&PolynomialFn::one(), 2));
    }

    #[test]
    fn inverse_requires_unit_constant_term() {
        let f = JetFn::from_poly(&x(0), 3);
        assert!(matches!(f.try_inv(), Err(Error::NonUnitJet)));
    }

    #[test]
    fn multiplication_truncates_to_smaller_order() {
        let f = JetFn::from_poly(&x(0), 2);
        let g = JetFn::from_poly(&x(0), 5);
        let h = f.mul(&g);
        assert_eq!(h.order(), 2);
        assert_eq!(h.poly(), &x(0).mul(&x(0)));
        // degree-3 part is cut
        let cube = f.mul(&g).mul(&g);
        assert!(cube.is_zero());
    }

    #[test]
    fn derivative_lowers_order() {
        let f = JetFn::from_poly(&x(0).mul(&x(0)), 3);
        let df = f.derive(0);
        assert_eq!(df.order(), 2);
        assert_eq!(df.poly(), &x(0).scale(&FieldElement::from_int(2)));
    }

    #[test]
    fn constants_stay_exact() {
        let c = JetFn::from_field(&FieldElement::i());
        assert_eq!(c.order(), EXACT_ORDER);
        assert_eq!(c.derive(3).order(), EXACT_ORDER);
        assert!(c.derive(3).is_zero());
    }

    #[test]
    fn random_unit_inverse_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..10 {
            let f = JetFn::random_unit(&mut rng, 8, 3, 4, 3);
            let inv = f.try_inv().unwrap();
            assert_eq!(f.mul(&inv), JetFn::from_poly(&PolynomialFn::one(), 3));
        }
    }
}
