//! Scalar backends: the coefficient rings that spinor fields take values in.
//!
//! Everything downstream (tensors, operators, verification passes) is generic
//! over [`Scalar`]. Constants use [`FieldElement`] itself; function backends
//! (polynomials, truncated jets, trigonometric polynomials) live in their own
//! modules and share this interface.

use crate::field::FieldElement;

/// A commutative ring of exact "functions" with coordinate derivations and a
/// conjugation. Coordinates are indexed 0..4n.
pub trait Scalar: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;

    /// Embed a constant.
    fn from_field(c: &FieldElement) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn is_zero(&self) -> bool;

    /// Partial derivative along real coordinate `coord`.
    fn derive(&self, coord: usize) -> Self;

    /// Pointwise complex conjugation (fixes √2, negates i, conjugates the
    /// function, not just its coefficients).
    fn conj(&self) -> Self;

    /// Multiply by a constant.
    fn scale(&self, c: &FieldElement) -> Self {
        self.mul(&Self::from_field(c))
    }

    /// Exact L² pairing ∫ self·conj(rhs) over the unit-volume flat torus, for
    /// backends whose elements span finitely many Fourier modes. None for
    /// backends without a torus inner product (polynomials, jets).
    fn torus_pairing(&self, rhs: &Self) -> Option<FieldElement> {
        let _ = rhs;
        None
    }
}

/// Constants: derivations vanish.
impl Scalar for FieldElement {
    fn zero() -> Self {
        FieldElement::zero()
    }

    fn one() -> Self {
        FieldElement::one()
    }

    fn from_field(c: &FieldElement) -> Self {
        c.clone()
    }

    fn add(&self, rhs: &Self) -> Self {
        FieldElement::add(self, rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        FieldElement::sub(self, rhs)
    }

    fn neg(&self) -> Self {
        FieldElement::neg(self)
    }

    fn mul(&self, rhs: &Self) -> Self {
        FieldElement::mul(self, rhs)
    }

    fn is_zero(&self) -> bool {
        FieldElement::is_zero(self)
    }

    fn derive(&self, _coord: usize) -> Self {
        FieldElement::zero()
    }

    fn conj(&self) -> Self {
        FieldElement::conj(self)
    }

    // constants are the 0-mode trig polynomials
    fn torus_pairing(&self, rhs: &Self) -> Option<FieldElement> {
        Some(self.mul(&rhs.conj()))
    }
}
