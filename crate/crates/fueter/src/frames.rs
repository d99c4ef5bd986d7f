//! The flat two-spinor frame and covector symbols.
//!
//! On ℝ^{4n} with coordinates x₀…x_{4n−1} grouped in quaternionic blocks of
//! four, the complex frame Z_{AA'} pairs an unprimed index A ∈ 0..2n with a
//! primed index A' ∈ {0', 1'}. Replacing ∂_c by the covector component ξ_c
//! in the same combinations yields the ξ-matrix ξ_{AA'}, which equals the
//! complex realization τ(ζ) of ξ read as a quaternionic column ζ. The 1/√2
//! normalization on Z makes the frame orthonormal for the standard metric.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::Error;
use crate::field::FieldElement;
use crate::linalg::Matrix;
use crate::quat::{covector_to_quaternions, tau_embed};
use crate::scalar::Scalar;

/// The two (coordinate, coefficient) pairs of the A A' frame combination,
/// without the 1/√2 normalization. Block l = A/2:
/// (2l,0') ↦ ∂_{4l} + i∂_{4l+1},   (2l,1') ↦ −∂_{4l+2} − i∂_{4l+3},
/// (2l+1,0') ↦ ∂_{4l+2} − i∂_{4l+3}, (2l+1,1') ↦ ∂_{4l} − i∂_{4l+1}.
pub fn frame_terms(a: usize, ap: usize) -> [(usize, FieldElement); 2] {
    let l = a / 2;
    let i = FieldElement::i();
    let one = FieldElement::one();
    match (a % 2, ap) {
        (0, 0) => [(4 * l, one), (4 * l + 1, i)],
        (0, 1) => [(4 * l + 2, one.neg()), (4 * l + 3, i.neg())],
        (1, 0) => [(4 * l + 2, one), (4 * l + 3, i.neg())],
        (1, 1) => [(4 * l, one), (4 * l + 1, i.neg())],
        _ => unreachable!("primed index out of range"),
    }
}

/// Apply the frame derivation Z_{AA'} = (1/√2)(combination of ∂) to a scalar.
pub fn z_apply<S: Scalar>(f: &S, a: usize, ap: usize) -> S {
    let mut acc = S::zero();
    for (coord, coeff) in frame_terms(a, ap) {
        acc = acc.add(&f.derive(coord).scale(&coeff));
    }
    acc.scale(&FieldElement::inv_sqrt2())
}

/// The symbol matrix of a covector: ξ_{AA'} (2n×2) and its raised companion
/// ξ_A^{A'} with column 0' = ξ_{A1'} and column 1' = −ξ_{A0'}.
#[derive(Debug, Clone, PartialEq)]
pub struct XiMatrix {
    n: usize,
    lower: Matrix,
    raised: Matrix,
}

impl XiMatrix {
    pub fn from_covector(xi: &[BigRational]) -> Result<Self, Error> {
        if xi.is_empty() || xi.len() % 4 != 0 {
            return Err(Error::BadIndex(format!(
                "covector length {} is not a positive multiple of 4",
                xi.len()
            )));
        }
        if xi.iter().all(|x| x.is_zero()) {
            return Err(Error::DegenerateCovector);
        }
        let n = xi.len() / 4;
        let lower = tau_embed(&covector_to_quaternions(xi));
        let mut raised = Matrix::zeros(2 * n, 2);
        for a in 0..2 * n {
            raised.set(a, 0, lower.get(a, 1).clone());
            raised.set(a, 1, lower.get(a, 0).neg());
        }
        Ok(XiMatrix { n, lower, raised })
    }

    pub fn from_ints(xi: &[i64]) -> Result<Self, Error> {
        let rats: Vec<BigRational> =
            xi.iter().map(|&x| BigRational::from(BigInt::from(x))).collect();
        XiMatrix::from_covector(&rats)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// ξ_{AA'}.
    pub fn lower(&self, a: usize, ap: usize) -> &FieldElement {
        self.lower.get(a, ap)
    }

    /// ξ_A^{A'}.
    pub fn raised(&self, a: usize, ap: usize) -> &FieldElement {
        self.raised.get(a, ap)
    }

    pub fn lower_matrix(&self) -> &Matrix {
        &self.lower
    }
}

/// Random nonzero integer covector in ℚ^{4n} with entries in [-bound, bound].
pub fn random_covector<R: rand::Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    bound: i64,
) -> Vec<BigRational> {
    loop {
        let xi: Vec<i64> = (0..4 * n).map(|_| rng.gen_range(-bound..=bound)).collect();
        if xi.iter().any(|&x| x != 0) {
            return xi.iter().map(|&x| BigRational::from(BigInt::from(x))).collect();
        }
    }
}
