//! The exact ground field ℚ(i,√2).
//!
//! A [`FieldElement`] is a + b√2 + (c + d√2)i with exact rational a, b, c, d.
//! The √2 enters the theory through frame normalizations; keeping it in the
//! scalars turns every verification in the crate into an exact equality test.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::Error;

/// Element of ℚ(√2), stored as a + b√2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Q2 {
    pub a: BigRational,
    pub b: BigRational,
}

impl Q2 {
    pub fn zero() -> Self {
        Q2 { a: BigRational::zero(), b: BigRational::zero() }
    }

    pub fn one() -> Self {
        Q2 { a: BigRational::one(), b: BigRational::zero() }
    }

    pub fn from_rational(a: BigRational) -> Self {
        Q2 { a, b: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        Q2 { a: &self.a + &rhs.a, b: &self.b + &rhs.b }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Q2 { a: &self.a - &rhs.a, b: &self.b - &rhs.b }
    }

    fn neg(&self) -> Self {
        Q2 { a: -self.a.clone(), b: -self.b.clone() }
    }

    fn mul(&self, rhs: &Self) -> Self {
        // Values without a √2 part dominate in practice; skip the cross terms.
        if self.b.is_zero() && rhs.b.is_zero() {
            return Q2 { a: &self.a * &rhs.a, b: BigRational::zero() };
        }
        let ab = &self.b * &rhs.b;
        Q2 {
            a: &self.a * &rhs.a + (&ab + &ab),
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }

    /// (a + b√2)⁻¹ = (a − b√2)/(a² − 2b²); the norm vanishes only at 0
    /// because √2 is irrational.
    fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let bb = &self.b * &self.b;
        let norm = &self.a * &self.a - (&bb + &bb);
        debug_assert!(!norm.is_zero());
        Ok(Q2 { a: &self.a / &norm, b: -(&self.b / &norm) })
    }

    /// Sign of the real number a + b√2: -1, 0, or 1, decided exactly by
    /// comparing a² against 2b² when a and b disagree in sign.
    pub fn sign(&self) -> i8 {
        let sa = rational_sign(&self.a);
        let sb = rational_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let bb = &self.b * &self.b;
        let cmp = &self.a * &self.a - (&bb + &bb);
        match rational_sign(&cmp) {
            0 => 0, // impossible for nonzero input, kept for totality
            s if s > 0 => sa,
            _ => sb,
        }
    }
}

fn rational_sign(x: &BigRational) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Element of ℚ(i,√2). Complex conjugation fixes √2 and negates i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    pub re: Q2,
    pub im: Q2,
}

impl FieldElement {
    pub fn zero() -> Self {
        FieldElement { re: Q2::zero(), im: Q2::zero() }
    }

    pub fn one() -> Self {
        FieldElement { re: Q2::one(), im: Q2::zero() }
    }

    /// The imaginary unit i.
    pub fn i() -> Self {
        FieldElement { re: Q2::zero(), im: Q2::one() }
    }

    /// √2.
    pub fn sqrt2() -> Self {
        FieldElement {
            re: Q2 { a: BigRational::zero(), b: BigRational::one() },
            im: Q2::zero(),
        }
    }

    /// 1/√2 = √2/2, the frame normalization constant.
    pub fn inv_sqrt2() -> Self {
        FieldElement {
            re: Q2 { a: BigRational::zero(), b: BigRational::new(BigInt::one(), BigInt::from(2)) },
            im: Q2::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        FieldElement { re: Q2::from_rational(BigRational::from(BigInt::from(n))), im: Q2::zero() }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        FieldElement {
            re: Q2::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den))),
            im: Q2::zero(),
        }
    }

    /// a + b√2 + (c + d√2)i from four integers.
    pub fn from_parts(a: i64, b: i64, c: i64, d: i64) -> Self {
        let r = |n: i64| BigRational::from(BigInt::from(n));
        FieldElement { re: Q2 { a: r(a), b: r(b) }, im: Q2 { a: r(c), b: r(d) } }
    }

    /// Gaussian integer a + ci with a, c drawn uniformly from [-bound, bound].
    pub fn random_gaussian<R: Rng + ?Sized>(rng: &mut R, bound: i64) -> Self {
        let a = rng.gen_range(-bound..=bound);
        let c = rng.gen_range(-bound..=bound);
        FieldElement::from_parts(a, 0, c, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        FieldElement { re: self.re.add(&rhs.re), im: self.im.add(&rhs.im) }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        FieldElement { re: self.re.sub(&rhs.re), im: self.im.sub(&rhs.im) }
    }

    pub fn neg(&self) -> Self {
        FieldElement { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        // Purely real factors are the common case in elimination loops.
        if self.im.is_zero() && rhs.im.is_zero() {
            return FieldElement { re: self.re.mul(&rhs.re), im: Q2::zero() };
        }
        FieldElement {
            re: self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im)),
            im: self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re)),
        }
    }

    pub fn inv(&self) -> Result<Self, Error> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // 1/(x + yi) = (x − yi)/(x² + y²), then invert the real norm in ℚ(√2).
        let norm = self.re.mul(&self.re).add(&self.im.mul(&self.im));
        let ninv = norm.inv()?;
        Ok(FieldElement { re: self.re.mul(&ninv), im: self.im.mul(&ninv).neg() })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self, Error> {
        Ok(self.mul(&rhs.inv()?))
    }

    /// Complex conjugation: fixes √2, negates i.
    pub fn conj(&self) -> Self {
        FieldElement { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// True for real elements that are strictly positive.
    pub fn is_positive_real(&self) -> bool {
        self.im.is_zero() && self.re.sign() > 0
    }

    /// Canonical serialization "a/b + c/d*s2 + (e/f + g/h*s2)*i" with reduced
    /// fractions and explicit denominators.
    pub fn canonical_string(&self) -> String {
        fn rat(x: &BigRational) -> String {
            format!("{}/{}", x.numer(), x.denom())
        }
        format!(
            "{} + {}*s2 + ({} + {}*s2)*i",
            rat(&self.re.a),
            rat(&self.re.b),
            rat(&self.im.a),
            rat(&self.im.b)
        )
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_string())
    }
}

/// Failure to parse the canonical field-element format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseFieldElementError(String);

impl fmt::Display for ParseFieldElementError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid field element: {}", self.0)
    }
}

impl std::error::Error for ParseFieldElementError {}

impl FromStr for FieldElement {
    type Err = ParseFieldElementError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseFieldElementError(s.to_string());
        let s = s.trim();
        let (real_part, imag_part) = s.split_once(" + (").ok_or_else(bad)?;
        let imag_part = imag_part.strip_suffix(")*i").ok_or_else(bad)?;
        let parse_q2 = |part: &str| -> Result<Q2, ParseFieldElementError> {
            let (a, b) = part.split_once(" + ").ok_or_else(bad)?;
            let b = b.strip_suffix("*s2").ok_or_else(bad)?;
            let a = BigRational::from_str(a.trim()).map_err(|_| bad())?;
            let b = BigRational::from_str(b.trim()).map_err(|_| bad())?;
            Ok(Q2 { a, b })
        };
        Ok(FieldElement { re: parse_q2(real_part)?, im: parse_q2(imag_part)? })
    }
}

impl serde::Serialize for FieldElement {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical_string())
    }
}

impl<'de> serde::Deserialize<'de> for FieldElement {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fe(a: i64, b: i64, c: i64, d: i64) -> FieldElement {
        FieldElement::from_parts(a, b, c, d)
    }

    #[test]
    fn difference_of_squares() {
        // (1 + √2)(−1 + √2) = 1
        let x = fe(1, 1, 0, 0);
        let y = fe(-1, 1, 0, 0);
        assert_eq!(x.mul(&y), FieldElement::one());
    }

    #[test]
    fn conjugation_fixes_sqrt2_negates_i() {
        // conj(i√2) = −i√2
        let x = fe(0, 0, 0, 1);
        assert_eq!(x.conj(), fe(0, 0, 0, -1));
        assert_eq!(x.conj().conj(), x);
        // conj(√2) = √2
        assert_eq!(FieldElement::sqrt2().conj(), FieldElement::sqrt2());
    }

    #[test]
    fn inverse_of_one_plus_i() {
        // (1 + i)⁻¹ = (1 − i)/2
        let x = fe(1, 0, 1, 0);
        let inv = x.inv().unwrap();
        let expected = FieldElement {
            re: Q2::from_rational(BigRational::new(BigInt::from(1), BigInt::from(2))),
            im: Q2::from_rational(BigRational::new(BigInt::from(-1), BigInt::from(2))),
        };
        assert_eq!(inv, expected);
        assert_eq!(x.mul(&inv), FieldElement::one());
    }

    #[test]
    fn inverse_of_zero_fails() {
        assert_eq!(FieldElement::zero().inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn sqrt2_squares_to_two() {
        assert_eq!(FieldElement::sqrt2().mul(&FieldElement::sqrt2()), FieldElement::from_int(2));
        assert_eq!(
            FieldElement::sqrt2().mul(&FieldElement::inv_sqrt2()),
            FieldElement::one()
        );
    }

    #[test]
    fn sign_of_real_values() {
        assert_eq!(fe(-1, 1, 0, 0).re.sign(), 1); // −1 + √2 > 0
        assert_eq!(fe(1, -1, 0, 0).re.sign(), -1); // 1 − √2 < 0
        assert_eq!(fe(3, -2, 0, 0).re.sign(), 1); // 3 − 2√2 > 0
        assert_eq!(fe(-3, 2, 0, 0).re.sign(), -1);
        assert_eq!(fe(0, 0, 0, 0).re.sign(), 0);
        assert!(fe(-1, 1, 0, 0).is_positive_real());
        assert!(!fe(0, 0, 1, 0).is_positive_real());
    }

    #[test]
    fn canonical_string_round_trip() {
        let x = FieldElement {
            re: Q2 {
                a: BigRational::new(BigInt::from(-3), BigInt::from(2)),
                b: BigRational::zero(),
            },
            im: Q2 {
                a: BigRational::zero(),
                b: BigRational::new(BigInt::from(5), BigInt::from(7)),
            },
        };
        let s = x.canonical_string();
        assert_eq!(s, "-3/2 + 0/1*s2 + (0/1 + 5/7*s2)*i");
        assert_eq!(s.parse::<FieldElement>().unwrap(), x);
    }

    fn arb_field() -> impl Strategy<Value = FieldElement> {
        (-9i64..=9, -9i64..=9, -9i64..=9, -9i64..=9)
            .prop_map(|(a, b, c, d)| FieldElement::from_parts(a, b, c, d))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn field_axioms(x in arb_field(), y in arb_field(), z in arb_field()) {
            // associativity and commutativity
            prop_assert_eq!(x.add(&y).add(&z), x.add(&y.add(&z)));
            prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
            prop_assert_eq!(x.add(&y), y.add(&x));
            prop_assert_eq!(x.mul(&y), y.mul(&x));
            // distributivity
            prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
            // units and inverses
            prop_assert_eq!(x.add(&x.neg()), FieldElement::zero());
            if !x.is_zero() {
                prop_assert_eq!(x.mul(&x.inv().unwrap()), FieldElement::one());
            }
            // conjugation is a field automorphism
            prop_assert_eq!(x.mul(&y).conj(), x.conj().mul(&y.conj()));
            prop_assert_eq!(x.add(&y).conj(), x.conj().add(&y.conj()));
        }

        #[test]
        fn display_parse_round_trip(x in arb_field()) {
            let back: FieldElement = x.canonical_string().parse().unwrap();
            prop_assert_eq!(back, x);
        }

        #[test]
        fn norm_positive(x in arb_field()) {
            let n = x.mul(&x.conj());
            prop_assert!(n.is_real());
            if x.is_zero() {
                prop_assert!(n.is_zero());
            } else {
                prop_assert!(n.is_positive_real());
            }
        }
    }
}
