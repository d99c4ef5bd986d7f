//! Curvature tensors of unimodular quaternionic connections.
//!
//! The curvature of such a connection splits into two families: one acting
//! on the rank-2n bundle E (components R_{A'B'ABC}{}^D, stored with slot
//! order A', B', A, B, C, D) and one acting on the rank-2 bundle H
//! (components R_{ABA'B'C'}{}^{D'}, stored A, B, A', B', C', D'). Both are
//! antisymmetric under the joint swap of the two tangent directions
//! a = (A, A'), b = (B, B') and trace-free in the last lower slot against
//! the upper slot.
//!
//! Such a pair decomposes into an antisymmetric scalar part Λ_{AB}, a trace
//! part Φ_{ABA'B'} symmetric in each pair, a totally symmetric trace-free
//! Weyl part Ψ_{ABC}{}^D, and (only in quaternionic dimension one) a second
//! Weyl part Ψ'_{A'B'C'}{}^{D'}. This module implements the decomposition,
//! its inverse, the trace and first-Bianchi reports, Ricci and scalar
//! curvature, and the Ricci-identity substitution for commutators of
//! covariant derivatives.

use rand::Rng;

use crate::error::Error;
use crate::field::FieldElement;
use crate::scalar::Scalar;
use crate::tensor::{Slot, SlotKind, SpinorTensor, SymmetryClass};

/// Slot layout of the E-family curvature: (A', B', A, B, C; D).
pub fn e_family_class(n: usize) -> SymmetryClass {
    SymmetryClass::free_tensor(
        n,
        &[
            Slot::PRIMED_LO,
            Slot::PRIMED_LO,
            Slot::UNPRIMED_LO,
            Slot::UNPRIMED_LO,
            Slot::UNPRIMED_LO,
            Slot::UNPRIMED_UP,
        ],
    )
}

/// Slot layout of the H-family curvature: (A, B, A', B', C'; D').
pub fn h_family_class(n: usize) -> SymmetryClass {
    SymmetryClass::free_tensor(
        n,
        &[
            Slot::UNPRIMED_LO,
            Slot::UNPRIMED_LO,
            Slot::PRIMED_LO,
            Slot::PRIMED_LO,
            Slot::PRIMED_LO,
            Slot::PRIMED_UP,
        ],
    )
}

/// Slot layout of the scalar part Λ_{AB}.
pub fn lambda_class(n: usize) -> SymmetryClass {
    SymmetryClass::free_tensor(n, &[Slot::UNPRIMED_LO, Slot::UNPRIMED_LO])
}

/// Slot layout of the trace part Φ_{ABA'B'}.
pub fn phi_class(n: usize) -> SymmetryClass {
    SymmetryClass::free_tensor(
        n,
        &[Slot::UNPRIMED_LO, Slot::UNPRIMED_LO, Slot::PRIMED_LO, Slot::PRIMED_LO],
    )
}

/// Slot layout of the Weyl part Ψ_{ABC}{}^D.
pub fn psi_class(n: usize) -> SymmetryClass {
    SymmetryClass::free_tensor(
        n,
        &[Slot::UNPRIMED_LO, Slot::UNPRIMED_LO, Slot::UNPRIMED_LO, Slot::UNPRIMED_UP],
    )
}

/// Slot layout of the dimension-one Weyl part Ψ'_{A'B'C'}{}^{D'}.
pub fn psi_prime_class() -> SymmetryClass {
    SymmetryClass::free_tensor(
        1,
        &[Slot::PRIMED_LO, Slot::PRIMED_LO, Slot::PRIMED_LO, Slot::PRIMED_UP],
    )
}

/// ε_{A'B'} with ε_{0'1'} = 1, as a bare sign.
pub(crate) fn eps2(i: usize, j: usize) -> i64 {
    match (i, j) {
        (0, 1) => 1,
        (1, 0) => -1,
        _ => 0,
    }
}

/// ε^{A'B'} with ε^{0'1'} = −1, inverse in the sense ε_{A'B'}ε^{B'C'} = δ.
pub(crate) fn eps2_up(i: usize, j: usize) -> i64 {
    -eps2(i, j)
}

/// The unprimed symplectic form ϵ_{AB}: block diagonal [[0,1],[−1,0]].
pub(crate) fn eps_unprimed(a: usize, b: usize) -> i64 {
    if a / 2 == b / 2 {
        eps2(a % 2, b % 2)
    } else {
        0
    }
}

pub(crate) fn eps_unprimed_up(a: usize, b: usize) -> i64 {
    -eps_unprimed(a, b)
}

pub(crate) fn delta(i: usize, j: usize) -> bool {
    i == j
}

/// acc + k·v for a small integer weight.
pub(crate) fn add_scaled<S: Scalar>(acc: S, v: &S, k: i64) -> S {
    match k {
        0 => acc,
        1 => acc.add(v),
        -1 => acc.sub(v),
        _ => acc.add(&v.scale(&FieldElement::from_int(k))),
    }
}

/// Curvature of a unimodular quaternionic connection, as the pair of
/// bundle families described in the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData<S: Scalar> {
    n: usize,
    r_e: SpinorTensor<S>,
    r_h: SpinorTensor<S>,
}

impl<S: Scalar> CurvatureData<S> {
    /// Wraps the two families, checking slot layout, the joint-swap
    /// antisymmetry, and the vanishing of both upper traces.
    pub fn new(n: usize, r_e: SpinorTensor<S>, r_h: SpinorTensor<S>) -> Result<Self, Error> {
        if *r_e.class() != e_family_class(n) || *r_h.class() != h_family_class(n) {
            return Err(Error::BadClass("curvature family slot layout mismatch".into()));
        }
        let data = CurvatureData { n, r_e, r_h };
        data.validate()?;
        Ok(data)
    }

    pub fn zero(n: usize) -> Self {
        CurvatureData {
            n,
            r_e: SpinorTensor::zero(e_family_class(n)),
            r_h: SpinorTensor::zero(h_family_class(n)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn e_part(&self) -> &SpinorTensor<S> {
        &self.r_e
    }

    pub fn h_part(&self) -> &SpinorTensor<S> {
        &self.r_h
    }

    /// Component R_{A'B'ABC}{}^D.
    pub fn re(&self, ap: usize, bp: usize, a: usize, b: usize, c: usize, d: usize) -> &S {
        self.r_e.get(&[], 0, &[ap, bp, a, b, c, d]).expect("index in range")
    }

    /// Component R_{ABA'B'C'}{}^{D'}.
    pub fn rh(&self, a: usize, b: usize, ap: usize, bp: usize, cp: usize, dp: usize) -> &S {
        self.r_h.get(&[], 0, &[a, b, ap, bp, cp, dp]).expect("index in range")
    }

    /// Full curvature component R_{abc}{}^d on the complexified tangent
    /// bundle, assembled from the two families with full indices
    /// a = (A, A') and so on.
    pub fn full_component(
        &self,
        a: (usize, usize),
        b: (usize, usize),
        c: (usize, usize),
        d: (usize, usize),
    ) -> S {
        let mut acc = S::zero();
        if c.1 == d.1 {
            acc = acc.add(self.re(a.1, b.1, a.0, b.0, c.0, d.0));
        }
        if c.0 == d.0 {
            acc = acc.add(self.rh(a.0, b.0, a.1, b.1, c.1, d.1));
        }
        acc
    }

    /// Checks the joint-swap antisymmetry and both upper traces.
    pub fn validate(&self) -> Result<(), Error> {
        let m = 2 * self.n;
        for ap in 0..2 {
            for bp in 0..2 {
                for a in 0..m {
                    for b in 0..m {
                        for c in 0..m {
                            for d in 0..m {
                                let lhs = self.re(ap, bp, a, b, c, d);
                                let rhs = self.re(bp, ap, b, a, c, d);
                                if !lhs.add(rhs).is_zero() {
                                    return Err(Error::BadCurvature(
                                        "E family is not antisymmetric under the joint swap"
                                            .into(),
                                    ));
                                }
                            }
                        }
                        let mut tr = S::zero();
                        for c in 0..m {
                            tr = tr.add(self.re(ap, bp, a, b, c, c));
                        }
                        if !tr.is_zero() {
                            return Err(Error::BadCurvature(
                                "E family has a nonzero upper trace".into(),
                            ));
                        }
                    }
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for p1 in 0..2 {
                    for p2 in 0..2 {
                        for p3 in 0..2 {
                            for dp in 0..2 {
                                let lhs = self.rh(a, b, p1, p2, p3, dp);
                                let rhs = self.rh(b, a, p2, p1, p3, dp);
                                if !lhs.add(rhs).is_zero() {
                                    return Err(Error::BadCurvature(
                                        "H family is not antisymmetric under the joint swap"
                                            .into(),
                                    ));
                                }
                            }
                        }
                        let mut tr = S::zero();
                        for cp in 0..2 {
                            tr = tr.add(self.rh(a, b, p1, p2, cp, cp));
                        }
                        if !tr.is_zero() {
                            return Err(Error::BadCurvature(
                                "H family has a nonzero upper trace".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The irreducible parts (Λ, Φ, Ψ) of a curvature, plus Ψ' in quaternionic
/// dimension one.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureDecomposition<S: Scalar> {
    n: usize,
    lambda: SpinorTensor<S>,
    phi: SpinorTensor<S>,
    psi: SpinorTensor<S>,
    psi_prime: Option<SpinorTensor<S>>,
}

impl<S: Scalar> CurvatureDecomposition<S> {
    /// Wraps the parts, checking slot layouts and all symmetry and trace
    /// invariants. `psi_prime` must be present exactly when n = 1.
    pub fn new(
        n: usize,
        lambda: SpinorTensor<S>,
        phi: SpinorTensor<S>,
        psi: SpinorTensor<S>,
        psi_prime: Option<SpinorTensor<S>>,
    ) -> Result<Self, Error> {
        if *lambda.class() != lambda_class(n)
            || *phi.class() != phi_class(n)
            || *psi.class() != psi_class(n)
        {
            return Err(Error::BadClass("decomposition slot layout mismatch".into()));
        }
        match (&psi_prime, n) {
            (Some(p), 1) => {
                if *p.class() != psi_prime_class() {
                    return Err(Error::BadClass("decomposition slot layout mismatch".into()));
                }
            }
            (None, 1) => {
                return Err(Error::BadDecomposition(
                    "dimension one requires the second Weyl part".into(),
                ));
            }
            (Some(_), _) => {
                return Err(Error::BadDecomposition(
                    "the second Weyl part only exists in dimension one".into(),
                ));
            }
            (None, _) => {}
        }
        let d = CurvatureDecomposition { n, lambda, phi, psi, psi_prime };
        d.validate()?;
        Ok(d)
    }

    pub fn zero(n: usize) -> Self {
        CurvatureDecomposition {
            n,
            lambda: SpinorTensor::zero(lambda_class(n)),
            phi: SpinorTensor::zero(phi_class(n)),
            psi: SpinorTensor::zero(psi_class(n)),
            psi_prime: (n == 1).then(|| SpinorTensor::zero(psi_prime_class())),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &SpinorTensor<S> {
        &self.lambda
    }

    pub fn phi(&self) -> &SpinorTensor<S> {
        &self.phi
    }

    pub fn psi(&self) -> &SpinorTensor<S> {
        &self.psi
    }

    pub fn psi_prime(&self) -> Option<&SpinorTensor<S>> {
        self.psi_prime.as_ref()
    }

    fn lam(&self, a: usize, b: usize) -> &S {
        self.lambda.get(&[], 0, &[a, b]).expect("index in range")
    }

    fn ph(&self, a: usize, b: usize, ap: usize, bp: usize) -> &S {
        self.phi.get(&[], 0, &[a, b, ap, bp]).expect("index in range")
    }

    fn ps(&self, a: usize, b: usize, c: usize, d: usize) -> &S {
        self.psi.get(&[], 0, &[a, b, c, d]).expect("index in range")
    }

    /// Checks antisymmetry of Λ, pair symmetry of Φ, total symmetry and
    /// trace-freeness of Ψ (and Ψ' when present).
    pub fn validate(&self) -> Result<(), Error> {
        let m = 2 * self.n;
        for a in 0..m {
            for b in 0..m {
                if !self.lam(a, b).add(self.lam(b, a)).is_zero() {
                    return Err(Error::BadDecomposition(
                        "scalar part is not antisymmetric".into(),
                    ));
                }
                for ap in 0..2 {
                    for bp in 0..2 {
                        let v = self.ph(a, b, ap, bp);
                        if !v.sub(self.ph(b, a, ap, bp)).is_zero()
                            || !v.sub(self.ph(a, b, bp, ap)).is_zero()
                        {
                            return Err(Error::BadDecomposition(
                                "trace part is not symmetric in both pairs".into(),
                            ));
                        }
                    }
                }
            }
        }
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let v = self.ps(a, b, c, d);
                        if !v.sub(self.ps(b, a, c, d)).is_zero()
                            || !v.sub(self.ps(a, c, b, d)).is_zero()
                        {
                            return Err(Error::BadDecomposition(
                                "Weyl part is not totally symmetric".into(),
                            ));
                        }
                    }
                }
                let mut tr = S::zero();
                for c in 0..m {
                    tr = tr.add(self.ps(c, a, b, c));
                }
                if !tr.is_zero() {
                    return Err(Error::BadDecomposition("Weyl part has a nonzero trace".into()));
                }
            }
        }
        if let Some(pp) = &self.psi_prime {
            let at = |p1: usize, p2: usize, p3: usize, dp: usize| {
                pp.get(&[], 0, &[p1, p2, p3, dp]).expect("index in range")
            };
            for p1 in 0..2 {
                for p2 in 0..2 {
                    for p3 in 0..2 {
                        for dp in 0..2 {
                            let v = at(p1, p2, p3, dp);
                            if !v.sub(at(p2, p1, p3, dp)).is_zero()
                                || !v.sub(at(p1, p3, p2, dp)).is_zero()
                            {
                                return Err(Error::BadDecomposition(
                                    "second Weyl part is not totally symmetric".into(),
                                ));
                            }
                        }
                    }
                    let mut tr = S::zero();
                    for cp in 0..2 {
                        tr = tr.add(at(cp, p1, p2, cp));
                    }
                    if !tr.is_zero() {
                        return Err(Error::BadDecomposition(
                            "second Weyl part has a nonzero trace".into(),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Assembles the curvature families from their irreducible parts:
///
///   R_{A'B'ABC}{}^D   = ε_{A'B'}(Ψ_{ABC}{}^D + δ_A^D Λ_{BC} + δ_B^D Λ_{AC})
///                       + δ_A^D Φ_{BCA'B'} − δ_B^D Φ_{ACA'B'},
///   R_{ABA'B'C'}{}^{D'} = δ_{A'}^{D'} Φ_{ABB'C'} − δ_{B'}^{D'} Φ_{ABA'C'}
///                       + Λ_{AB}(δ_{A'}^{D'} ε_{B'C'} + δ_{B'}^{D'} ε_{A'C'})
///                       [+ ϵ_{AB} Ψ'_{A'B'C'}{}^{D'} when n = 1].
pub fn reconstruct_curvature<S: Scalar>(
    d: &CurvatureDecomposition<S>,
) -> Result<CurvatureData<S>, Error> {
    d.validate()?;
    let n = d.n;
    let r_e = SpinorTensor::from_fn(e_family_class(n), |_, _, idx| {
        let (ap, bp, a, b, c, dd) = (idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]);
        let mut skew = d.ps(a, b, c, dd).clone();
        if delta(a, dd) {
            skew = skew.add(d.lam(b, c));
        }
        if delta(b, dd) {
            skew = skew.add(d.lam(a, c));
        }
        let mut acc = add_scaled(S::zero(), &skew, eps2(ap, bp));
        if delta(a, dd) {
            acc = acc.add(d.ph(b, c, ap, bp));
        }
        if delta(b, dd) {
            acc = acc.sub(d.ph(a, c, ap, bp));
        }
        acc
    });
    let r_h = SpinorTensor::from_fn(h_family_class(n), |_, _, idx| {
        let (a, b, p1, p2, p3, dp) = (idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]);
        let mut acc = S::zero();
        if delta(p1, dp) {
            acc = acc.add(d.ph(a, b, p2, p3));
            acc = add_scaled(acc, d.lam(a, b), eps2(p2, p3));
        }
        if delta(p2, dp) {
            acc = acc.sub(d.ph(a, b, p1, p3));
            acc = add_scaled(acc, d.lam(a, b), eps2(p1, p3));
        }
        if let Some(pp) = &d.psi_prime {
            let v = pp.get(&[], 0, &[p1, p2, p3, dp]).expect("index in range");
            acc = add_scaled(acc, v, eps_unprimed(a, b));
        }
        acc
    });
    CurvatureData::new(n, r_e, r_h)
}

/// Contraction of the H family over its first lower primed slot against
/// the upper slot. On a genuine curvature this equals
/// Φ_{ABA'B'} + 3Λ_{AB}ε_{A'B'} and is the source of both the scalar and
/// trace parts.
fn h_contraction<S: Scalar>(r: &CurvatureData<S>) -> SpinorTensor<S> {
    SpinorTensor::from_fn(phi_class(r.n), |_, _, idx| {
        let (a, b, ap, bp) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = S::zero();
        for cp in 0..2 {
            acc = acc.add(r.rh(a, b, cp, ap, bp, cp));
        }
        acc
    })
}

fn lambda_of_contraction<S: Scalar>(n: usize, u: &SpinorTensor<S>) -> SpinorTensor<S> {
    let at = |a: usize, b: usize, ap: usize, bp: usize| {
        u.get(&[], 0, &[a, b, ap, bp]).expect("index in range")
    };
    let sixth = FieldElement::from_ratio(1, 6);
    SpinorTensor::from_fn(lambda_class(n), |_, _, idx| {
        let (a, b) = (idx[0], idx[1]);
        // Antisymmetrize over the primed pair (ε-coefficient) and over (A, B).
        at(a, b, 0, 1)
            .sub(at(a, b, 1, 0))
            .sub(at(b, a, 0, 1))
            .add(at(b, a, 1, 0))
            .scale(&sixth)
            .scale(&FieldElement::from_ratio(1, 2))
    })
}

fn phi_of_contraction<S: Scalar>(n: usize, u: &SpinorTensor<S>) -> SpinorTensor<S> {
    let at = |a: usize, b: usize, ap: usize, bp: usize| {
        u.get(&[], 0, &[a, b, ap, bp]).expect("index in range")
    };
    let quarter = FieldElement::from_ratio(1, 4);
    SpinorTensor::from_fn(phi_class(n), |_, _, idx| {
        let (a, b, ap, bp) = (idx[0], idx[1], idx[2], idx[3]);
        at(a, b, ap, bp)
            .add(at(b, a, ap, bp))
            .add(at(a, b, bp, ap))
            .add(at(b, a, bp, ap))
            .scale(&quarter)
    })
}

/// Splits a curvature into its irreducible parts. The scalar and trace
/// parts come from the primed contraction of the H family, the Weyl parts
/// from the ε-coefficients of the primed-antisymmetrized families with the
/// Λ terms removed. Fails with `BadCurvature` when the input violates the
/// curvature invariants, and with `BadDecomposition` when the input passes
/// them but is not assembled from any admissible set of parts.
pub fn decompose_curvature<S: Scalar>(
    r: &CurvatureData<S>,
) -> Result<CurvatureDecomposition<S>, Error> {
    r.validate()?;
    let n = r.n;
    let u = h_contraction(r);
    let lambda = lambda_of_contraction(n, &u);
    let phi = phi_of_contraction(n, &u);
    let half = FieldElement::from_ratio(1, 2);
    let lam = |a: usize, b: usize| lambda.get(&[], 0, &[a, b]).expect("index in range");
    let psi = SpinorTensor::from_fn(psi_class(n), |_, _, idx| {
        let (a, b, c, dd) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = r.re(0, 1, a, b, c, dd).sub(r.re(1, 0, a, b, c, dd)).scale(&half);
        if delta(a, dd) {
            acc = acc.sub(lam(b, c));
        }
        if delta(b, dd) {
            acc = acc.sub(lam(a, c));
        }
        acc
    });
    let psi_prime = (n == 1).then(|| {
        SpinorTensor::from_fn(psi_prime_class(), |_, _, idx| {
            let (p1, p2, p3, dp) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = r.rh(0, 1, p1, p2, p3, dp).sub(r.rh(1, 0, p1, p2, p3, dp)).scale(&half);
            if delta(p1, dp) {
                acc = add_scaled(acc, lam(0, 1), -eps2(p2, p3));
            }
            if delta(p2, dp) {
                acc = add_scaled(acc, lam(0, 1), -eps2(p1, p3));
            }
            acc
        })
    });
    CurvatureDecomposition::new(n, lambda, phi, psi, psi_prime)
}

/// Quaternionic Kähler curvature with scalar part λ·ϵ_{AB} and no trace
/// or Weyl parts.
pub fn qk_curvature<S: Scalar>(n: usize, lambda: &S) -> CurvatureData<S> {
    let lam = SpinorTensor::from_fn(lambda_class(n), |_, _, idx| {
        add_scaled(S::zero(), lambda, eps_unprimed(idx[0], idx[1]))
    });
    let d = CurvatureDecomposition {
        n,
        lambda: lam,
        phi: SpinorTensor::zero(phi_class(n)),
        psi: SpinorTensor::zero(psi_class(n)),
        psi_prime: (n == 1).then(|| SpinorTensor::zero(psi_prime_class())),
    };
    reconstruct_curvature(&d).expect("the parts satisfy the invariants")
}

/// Outcome of every trace and first-Bianchi identity on a curvature pair.
/// The six contraction identities hold for any curvature assembled from
/// admissible parts; the cyclic identity is reported but never assumed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceReport {
    /// Σ_C R_{A'B'ABC}{}^C = 0.
    pub e_upper_trace: bool,
    /// Σ_{C'} R_{ABA'B'C'}{}^{C'} = 0.
    pub h_upper_trace: bool,
    /// The E-family contraction, primed pair antisymmetrized and unprimed
    /// pair symmetrized, vanishes.
    pub e_skew_primed_sym_unprimed: bool,
    /// The E-family contraction, primed pair symmetrized and unprimed pair
    /// antisymmetrized, vanishes.
    pub e_sym_primed_skew_unprimed: bool,
    /// The H-family contraction, unprimed pair antisymmetrized and primed
    /// pair symmetrized, vanishes.
    pub h_skew_unprimed_sym_primed: bool,
    /// The H-family contraction, unprimed pair symmetrized and primed pair
    /// antisymmetrized, vanishes.
    pub h_sym_unprimed_skew_primed: bool,
    /// Cyclic sum R_{abc}{}^d + R_{bca}{}^d + R_{cab}{}^d = 0 on the full
    /// tangent bundle.
    pub cyclic_first_bianchi: bool,
}

impl TraceReport {
    /// All six contraction identities (everything except the cyclic sum).
    pub fn contractions_pass(&self) -> bool {
        self.e_upper_trace
            && self.h_upper_trace
            && self.e_skew_primed_sym_unprimed
            && self.e_sym_primed_skew_unprimed
            && self.h_skew_unprimed_sym_primed
            && self.h_sym_unprimed_skew_primed
    }

    pub fn all_pass(&self) -> bool {
        self.contractions_pass() && self.cyclic_first_bianchi
    }

    /// Named outcomes, for report serialization.
    pub fn entries(&self) -> Vec<(&'static str, bool)> {
        vec![
            ("e_upper_trace", self.e_upper_trace),
            ("h_upper_trace", self.h_upper_trace),
            ("e_skew_primed_sym_unprimed", self.e_skew_primed_sym_unprimed),
            ("e_sym_primed_skew_unprimed", self.e_sym_primed_skew_unprimed),
            ("h_skew_unprimed_sym_primed", self.h_skew_unprimed_sym_primed),
            ("h_sym_unprimed_skew_primed", self.h_sym_unprimed_skew_primed),
            ("cyclic_first_bianchi", self.cyclic_first_bianchi),
        ]
    }
}

/// Evaluates every trace and first-Bianchi identity, reporting each
/// outcome separately.
pub fn check_traces<S: Scalar>(r: &CurvatureData<S>) -> TraceReport {
    let m = 2 * r.n;

    let mut e_upper_trace = true;
    for ap in 0..2 {
        for bp in 0..2 {
            for a in 0..m {
                for b in 0..m {
                    let mut tr = S::zero();
                    for c in 0..m {
                        tr = tr.add(r.re(ap, bp, a, b, c, c));
                    }
                    e_upper_trace &= tr.is_zero();
                }
            }
        }
    }
    let mut h_upper_trace = true;
    for a in 0..m {
        for b in 0..m {
            for p1 in 0..2 {
                for p2 in 0..2 {
                    let mut tr = S::zero();
                    for cp in 0..2 {
                        tr = tr.add(r.rh(a, b, p1, p2, cp, cp));
                    }
                    h_upper_trace &= tr.is_zero();
                }
            }
        }
    }

    // E-family first-Bianchi contraction: the first unprimed slot is
    // contracted against the upper slot.
    let t_e = |ap: usize, bp: usize, a: usize, b: usize| {
        let mut acc = S::zero();
        for c in 0..m {
            acc = acc.add(r.re(ap, bp, c, a, b, c));
        }
        acc
    };
    let mut e_skew_primed_sym_unprimed = true;
    let mut e_sym_primed_skew_unprimed = true;
    for a in 0..m {
        for b in 0..m {
            let skew_p = t_e(0, 1, a, b).sub(&t_e(1, 0, a, b));
            e_skew_primed_sym_unprimed &= skew_p.add(&t_e(0, 1, b, a).sub(&t_e(1, 0, b, a))).is_zero();
            for ap in 0..2 {
                for bp in 0..2 {
                    let sym_p = t_e(ap, bp, a, b).add(&t_e(bp, ap, a, b));
                    e_sym_primed_skew_unprimed &=
                        sym_p.sub(&t_e(ap, bp, b, a).add(&t_e(bp, ap, b, a))).is_zero();
                }
            }
        }
    }

    // H-family first-Bianchi contraction: the first lower primed slot is
    // contracted against the upper slot.
    let u = h_contraction(r);
    let at = |a: usize, b: usize, ap: usize, bp: usize| {
        u.get(&[], 0, &[a, b, ap, bp]).expect("index in range")
    };
    let mut h_skew_unprimed_sym_primed = true;
    let mut h_sym_unprimed_skew_primed = true;
    for a in 0..m {
        for b in 0..m {
            for ap in 0..2 {
                for bp in 0..2 {
                    let skew_u = at(a, b, ap, bp).sub(at(b, a, ap, bp));
                    h_skew_unprimed_sym_primed &=
                        skew_u.add(&at(a, b, bp, ap).sub(at(b, a, bp, ap))).is_zero();
                    let sym_u = at(a, b, ap, bp).add(at(b, a, ap, bp));
                    h_sym_unprimed_skew_primed &=
                        sym_u.sub(&at(a, b, bp, ap).add(at(b, a, bp, ap))).is_zero();
                }
            }
        }
    }

    let full = 4 * r.n;
    let split = |x: usize| (x / 2, x % 2);
    let mut cyclic_first_bianchi = true;
    'outer: for a in 0..full {
        for b in 0..full {
            for c in 0..full {
                for d in 0..full {
                    let (fa, fb, fc, fd) = (split(a), split(b), split(c), split(d));
                    let sum = r
                        .full_component(fa, fb, fc, fd)
                        .add(&r.full_component(fb, fc, fa, fd))
                        .add(&r.full_component(fc, fa, fb, fd));
                    if !sum.is_zero() {
                        cyclic_first_bianchi = false;
                        break 'outer;
                    }
                }
            }
        }
    }

    TraceReport {
        e_upper_trace,
        h_upper_trace,
        e_skew_primed_sym_unprimed,
        e_sym_primed_skew_unprimed,
        h_skew_unprimed_sym_primed,
        h_sym_unprimed_skew_primed,
        cyclic_first_bianchi,
    }
}

/// Ricci contraction of a curvature, its scalar, and the Einstein and
/// quaternionic Kähler verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct RicciReport<S: Scalar> {
    /// R_{ac} with slot order (A, A', C, C'), all lower.
    pub ricci: SpinorTensor<S>,
    /// Full metric contraction of the Ricci tensor.
    pub scalar: S,
    /// Whether R_{ac} = (s_g / 4n) g_{ac} exactly.
    pub einstein: bool,
    /// For quaternionic Kähler inputs: whether the Ricci tensor and scalar
    /// match their closed forms 2(n+2)Λ_{AC}ε_{A'C'} and 8n(n+2)λ.
    pub qk_identities: Option<bool>,
}

/// Contracts the curvature to its Ricci tensor R_{ac} = R_{abc}{}^b and
/// scalar s_g, and checks the Einstein property. With `qk` set, first
/// verifies that the trace part vanishes and the scalar part is
/// proportional to ϵ_{AB}, then confirms the closed forms.
pub fn ricci_scalar<S: Scalar>(
    r: &CurvatureData<S>,
    qk: bool,
) -> Result<RicciReport<S>, Error> {
    let n = r.n;
    let m = 2 * n;
    let class = SymmetryClass::free_tensor(
        n,
        &[Slot::UNPRIMED_LO, Slot::PRIMED_LO, Slot::UNPRIMED_LO, Slot::PRIMED_LO],
    );
    let ricci = SpinorTensor::from_fn(class, |_, _, idx| {
        let (a, ap, c, cp) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = S::zero();
        for b in 0..m {
            acc = acc.add(r.re(ap, cp, a, b, c, b));
        }
        for bp in 0..2 {
            acc = acc.add(r.rh(a, c, ap, bp, cp, bp));
        }
        acc
    });
    let ric = |a: usize, ap: usize, c: usize, cp: usize| {
        ricci.get(&[], 0, &[a, ap, c, cp]).expect("index in range")
    };
    let mut scalar = S::zero();
    for a in 0..m {
        for c in 0..m {
            let w = eps_unprimed_up(a, c);
            if w == 0 {
                continue;
            }
            for ap in 0..2 {
                for cp in 0..2 {
                    scalar = add_scaled(scalar, ric(a, ap, c, cp), w * eps2_up(ap, cp));
                }
            }
        }
    }
    // Einstein: R_{ac} = (s_g / 4n) ϵ_{AC} ε_{A'C'}.
    let quarter_n = FieldElement::from_ratio(1, 4 * n as i64);
    let mut einstein = true;
    for a in 0..m {
        for c in 0..m {
            for ap in 0..2 {
                for cp in 0..2 {
                    let expected = add_scaled(
                        S::zero(),
                        &scalar.scale(&quarter_n),
                        eps_unprimed(a, c) * eps2(ap, cp),
                    );
                    einstein &= ric(a, ap, c, cp).sub(&expected).is_zero();
                }
            }
        }
    }
    let qk_identities = if qk {
        let u = h_contraction(r);
        let phi = phi_of_contraction(n, &u);
        if !phi.is_zero() {
            return Err(Error::NotQuaternionicKahler(
                "the trace part of the curvature does not vanish".into(),
            ));
        }
        let lambda = lambda_of_contraction(n, &u);
        let lam = |a: usize, b: usize| lambda.get(&[], 0, &[a, b]).expect("index in range");
        let scale = lam(0, 1).clone();
        for a in 0..m {
            for b in 0..m {
                let expected = add_scaled(S::zero(), &scale, eps_unprimed(a, b));
                if !lam(a, b).sub(&expected).is_zero() {
                    return Err(Error::NotQuaternionicKahler(
                        "the scalar part is not proportional to the symplectic form".into(),
                    ));
                }
            }
        }
        let coeff = FieldElement::from_int(2 * (n as i64 + 2));
        let mut ok = true;
        for a in 0..m {
            for c in 0..m {
                for ap in 0..2 {
                    for cp in 0..2 {
                        let expected =
                            add_scaled(S::zero(), &lam(a, c).scale(&coeff), eps2(ap, cp));
                        ok &= ric(a, ap, c, cp).sub(&expected).is_zero();
                    }
                }
            }
        }
        let expected_scalar =
            scale.scale(&FieldElement::from_int(8 * n as i64 * (n as i64 + 2)));
        ok &= scalar.sub(&expected_scalar).is_zero();
        Some(ok)
    } else {
        None
    };
    Ok(RicciReport { ricci, scalar, einstein, qk_identities })
}

/// Representative explicit tuple for a symmetric primed block with the
/// given ones count: zeros first, then ones.
pub(crate) fn rep_primed(p: usize, ones: usize) -> Vec<usize> {
    let mut t = vec![0usize; p];
    for v in t.iter_mut().skip(p - ones) {
        *v = 1;
    }
    t
}

/// Curvature substitution for the commutator 2∇_{[a}∇_{b]} applied to a
/// section, with a = (A, A') and b = (B, B'). Every slot of the section
/// contributes one curvature contraction: upper slots with a positive
/// sign, lower slots with a negative one. Scalars are annihilated since
/// the connection is torsion-free. The symmetric primed block must be in
/// lower form; free slots may have any kind and variance.
pub fn apply_ricci_identity<S: Scalar>(
    r: &CurvatureData<S>,
    f: &SpinorTensor<S>,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<SpinorTensor<S>, Error> {
    let n = r.n;
    let m = 2 * n;
    let class = f.class().clone();
    if class.n != n {
        return Err(Error::BadClass("section and curvature dimensions differ".into()));
    }
    if a.0 >= m || b.0 >= m || a.1 >= 2 || b.1 >= 2 {
        return Err(Error::BadIndex(format!("direction pair {:?}, {:?}", a, b)));
    }
    if class.primed_up && class.p_sym > 0 {
        return Err(Error::BadSlots(
            "the substitution requires the symmetric block in lower form".into(),
        ));
    }
    let p = class.p_sym;
    let out = SpinorTensor::from_fn(class.clone(), |anti, ones, free| {
        let mut acc = S::zero();
        // Antisymmetric block: lower unprimed slots.
        let mut x = anti.to_vec();
        for i in 0..anti.len() {
            let orig = x[i];
            for dd in 0..m {
                let coeff = r.re(a.1, b.1, a.0, b.0, orig, dd);
                if coeff.is_zero() {
                    continue;
                }
                x[i] = dd;
                let v = f
                    .read_full(&x, &rep_primed(p, ones), free)
                    .expect("index in range");
                acc = acc.sub(&v.mul(coeff));
            }
            x[i] = orig;
        }
        // Symmetric block: lower primed slots.
        let mut t = rep_primed(p, ones);
        for j in 0..p {
            let orig = t[j];
            for dp in 0..2 {
                let coeff = r.rh(a.0, b.0, a.1, b.1, orig, dp);
                if coeff.is_zero() {
                    continue;
                }
                t[j] = dp;
                let v = f.read_full(anti, &t, free).expect("index in range");
                acc = acc.sub(&v.mul(coeff));
            }
            t[j] = orig;
        }
        // Free slots, by kind and variance.
        let mut fr = free.to_vec();
        for (j, slot) in class.free.iter().enumerate() {
            let orig = fr[j];
            for dd in 0..slot.range(n) {
                let coeff = match (slot.kind, slot.up) {
                    (SlotKind::Unprimed, false) => r.re(a.1, b.1, a.0, b.0, orig, dd),
                    (SlotKind::Unprimed, true) => r.re(a.1, b.1, a.0, b.0, dd, orig),
                    (SlotKind::Primed, false) => r.rh(a.0, b.0, a.1, b.1, orig, dd),
                    (SlotKind::Primed, true) => r.rh(a.0, b.0, a.1, b.1, dd, orig),
                };
                if coeff.is_zero() {
                    continue;
                }
                fr[j] = dd;
                let v = f.get(anti, ones, &fr).expect("index in range").clone();
                acc = if slot.up { acc.add(&v.mul(coeff)) } else { acc.sub(&v.mul(coeff)) };
            }
            fr[j] = orig;
        }
        acc
    });
    Ok(out)
}

/// The raised commutator ∇_{[A₁}^{(A'₁}∇_{A₂]}^{A'₂)} as a curvature
/// substitution: primed directions are raised with ε, the unprimed pair
/// antisymmetrized and the primed pair symmetrized.
pub fn raised_commutator_sym<S: Scalar>(
    r: &CurvatureData<S>,
    f: &SpinorTensor<S>,
    a1: usize,
    a2: usize,
    ap1: usize,
    ap2: usize,
) -> Result<SpinorTensor<S>, Error> {
    let mut acc = SpinorTensor::zero(f.class().clone());
    for (x, y) in [(ap1, ap2), (ap2, ap1)] {
        for ta in 0..2 {
            let wa = eps2_up(ta, x);
            if wa == 0 {
                continue;
            }
            for tb in 0..2 {
                let w = wa * eps2_up(tb, y);
                if w == 0 {
                    continue;
                }
                let term = apply_ricci_identity(r, f, (a1, ta), (a2, tb))?;
                let term = match w {
                    1 => term,
                    -1 => term.neg(),
                    k => term.scale(&FieldElement::from_int(k)),
                };
                acc = acc.add(&term)?;
            }
        }
    }
    Ok(acc.scale(&FieldElement::from_ratio(1, 4)))
}

/// H-family component with the first two primed slots raised and the
/// unprimed pair antisymmetrized: R_{[A₁A₂]}^{A'B'}{}_{C'}{}^{D'}.
pub fn h_raised_skew<S: Scalar>(
    r: &CurvatureData<S>,
    a1: usize,
    a2: usize,
    ap: usize,
    bp: usize,
    cp: usize,
    dp: usize,
) -> S {
    let mut acc = S::zero();
    for ta in 0..2 {
        let wa = eps2_up(ta, ap);
        if wa == 0 {
            continue;
        }
        for tb in 0..2 {
            let w = wa * eps2_up(tb, bp);
            if w == 0 {
                continue;
            }
            acc = add_scaled(acc, r.rh(a1, a2, ta, tb, cp, dp), w);
            acc = add_scaled(acc, r.rh(a2, a1, ta, tb, cp, dp), -w);
        }
    }
    acc.scale(&FieldElement::from_ratio(1, 2))
}

/// E-family component with the primed pair raised and symmetrized:
/// R_{ABC}^{(A'B')D}.
pub fn e_raised_sym<S: Scalar>(
    r: &CurvatureData<S>,
    a: usize,
    b: usize,
    c: usize,
    ap: usize,
    bp: usize,
    d: usize,
) -> S {
    let mut acc = S::zero();
    for (x, y) in [(ap, bp), (bp, ap)] {
        for ta in 0..2 {
            let wa = eps2_up(ta, x);
            if wa == 0 {
                continue;
            }
            for tb in 0..2 {
                let w = wa * eps2_up(tb, y);
                if w == 0 {
                    continue;
                }
                acc = add_scaled(acc, r.re(ta, tb, a, b, c, d), w);
            }
        }
    }
    acc.scale(&FieldElement::from_ratio(1, 2))
}

/// Totally symmetrizes the first three slots of a four-slot tensor and
/// removes the traces against the upper slot, leaving an admissible Weyl
/// part. `range` is the index range of the symmetrized slots and
/// `divisor` the trace-removal denominator range + 2.
fn weyl_project(
    raw: &SpinorTensor<FieldElement>,
    range: usize,
    divisor: i64,
) -> SpinorTensor<FieldElement> {
    let at = |a: usize, b: usize, c: usize, d: usize| {
        raw.get(&[], 0, &[a, b, c, d]).expect("index in range")
    };
    let sixth = FieldElement::from_ratio(1, 6);
    let sym = SpinorTensor::from_fn(raw.class().clone(), |_, _, idx| {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        at(a, b, c, d)
            .add(at(a, c, b, d))
            .add(at(b, a, c, d))
            .add(at(b, c, a, d))
            .add(at(c, a, b, d))
            .add(at(c, b, a, d))
            .scale(&sixth)
    });
    let sat = |a: usize, b: usize, c: usize, d: usize| {
        sym.get(&[], 0, &[a, b, c, d]).expect("index in range")
    };
    // Single independent trace by total symmetry; remove it with the
    // normalized δ-multiple.
    let weight = FieldElement::from_ratio(1, divisor);
    let mut trace = vec![vec![FieldElement::zero(); range]; range];
    for (b, row) in trace.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let mut tr = FieldElement::zero();
            for a in 0..range {
                tr = tr.add(sat(a, b, c, a));
            }
            *v = tr.scale(&weight);
        }
    }
    SpinorTensor::from_fn(raw.class().clone(), |_, _, idx| {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = sat(a, b, c, d).clone();
        if delta(a, d) {
            acc = acc.sub(&trace[b][c]);
        }
        if delta(b, d) {
            acc = acc.sub(&trace[a][c]);
        }
        if delta(c, d) {
            acc = acc.sub(&trace[a][b]);
        }
        acc
    })
}

/// Uniformly random admissible decomposition with small integer seeds:
/// raw Gaussian-integer tensors pushed through the symmetry projectors and
/// trace removal.
pub fn random_decomposition<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    bound: i64,
) -> CurvatureDecomposition<FieldElement> {
    let m = 2 * n;
    let half = FieldElement::from_ratio(1, 2);
    let quarter = FieldElement::from_ratio(1, 4);

    let raw = SpinorTensor::<FieldElement>::random(lambda_class(n), rng, bound);
    let rat = |a: usize, b: usize| raw.get(&[], 0, &[a, b]).expect("index in range");
    let lambda = SpinorTensor::from_fn(lambda_class(n), |_, _, idx| {
        rat(idx[0], idx[1]).sub(rat(idx[1], idx[0])).scale(&half)
    });

    let raw = SpinorTensor::<FieldElement>::random(phi_class(n), rng, bound);
    let rat = |a: usize, b: usize, ap: usize, bp: usize| {
        raw.get(&[], 0, &[a, b, ap, bp]).expect("index in range")
    };
    let phi = SpinorTensor::from_fn(phi_class(n), |_, _, idx| {
        let (a, b, ap, bp) = (idx[0], idx[1], idx[2], idx[3]);
        rat(a, b, ap, bp)
            .add(rat(b, a, ap, bp))
            .add(rat(a, b, bp, ap))
            .add(rat(b, a, bp, ap))
            .scale(&quarter)
    });

    let raw = SpinorTensor::<FieldElement>::random(psi_class(n), rng, bound);
    let psi = weyl_project(&raw, m, 2 * n as i64 + 2);

    let psi_prime = (n == 1).then(|| {
        let raw = SpinorTensor::<FieldElement>::random(psi_prime_class(), rng, bound);
        weyl_project(&raw, 2, 4)
    });

    CurvatureDecomposition::new(n, lambda, phi, psi, psi_prime)
        .expect("projected parts satisfy the invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn fe(k: i64) -> FieldElement {
        FieldElement::from_int(k)
    }

    #[test]
    fn zero_curvature_round_trips() {
        for n in [1, 2, 3] {
            let r = CurvatureData::<FieldElement>::zero(n);
            let d = decompose_curvature(&r).unwrap();
            assert!(d.lambda().is_zero());
            assert!(d.phi().is_zero());
            assert!(d.psi().is_zero());
            assert_eq!(d.psi_prime().is_some(), n == 1);
            let back = reconstruct_curvature(&d).unwrap();
            assert_eq!(back, r);
            let rep = check_traces(&r);
            assert!(rep.all_pass());
        }
    }

    #[test]
    fn single_lambda_entry_round_trips() {
        let n = 2;
        let mut lambda = SpinorTensor::zero(lambda_class(n));
        lambda.set(&[], 0, &[0, 1], fe(1)).unwrap();
        lambda.set(&[], 0, &[1, 0], fe(-1)).unwrap();
        let d = CurvatureDecomposition::new(
            n,
            lambda.clone(),
            SpinorTensor::zero(phi_class(n)),
            SpinorTensor::zero(psi_class(n)),
            None,
        )
        .unwrap();
        let r = reconstruct_curvature(&d).unwrap();
        let back = decompose_curvature(&r).unwrap();
        assert_eq!(back.lambda(), &lambda);
        assert!(back.phi().is_zero());
        assert!(back.psi().is_zero());
    }

    #[test]
    fn random_round_trips_are_exact() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        for n in [1, 2, 3] {
            for _ in 0..4 {
                let d = random_decomposition(n, &mut rng, 4);
                let r = reconstruct_curvature(&d).unwrap();
                let back = decompose_curvature(&r).unwrap();
                assert_eq!(back, d);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn round_trip_is_identity(seed in any::<u64>()) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let d = random_decomposition(2, &mut rng, 5);
            let r = reconstruct_curvature(&d).unwrap();
            let back = decompose_curvature(&r).unwrap();
            prop_assert_eq!(back, d);
        }
    }

    #[test]
    fn reconstructed_curvature_passes_contraction_identities() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for n in [1, 2, 3] {
            let d = random_decomposition(n, &mut rng, 3);
            let r = reconstruct_curvature(&d).unwrap();
            let rep = check_traces(&r);
            assert!(rep.contractions_pass(), "n = {n}: {rep:?}");
        }
    }

    // The doubly antisymmetrized and doubly symmetrized E-family
    // contractions recover (2n+1)Λ and (2n−1)Φ.
    #[test]
    fn e_family_contraction_recovers_scaled_parts() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for n in [2usize, 3] {
            let m = 2 * n;
            let d = random_decomposition(n, &mut rng, 3);
            let r = reconstruct_curvature(&d).unwrap();
            let t_e = |ap: usize, bp: usize, a: usize, b: usize| {
                let mut acc = FieldElement::zero();
                for c in 0..m {
                    acc = acc.add(r.re(ap, bp, c, a, b, c));
                }
                acc
            };
            let quarter = FieldElement::from_ratio(1, 4);
            for a in 0..m {
                for b in 0..m {
                    let skew = t_e(0, 1, a, b)
                        .sub(&t_e(1, 0, a, b))
                        .sub(&t_e(0, 1, b, a))
                        .add(&t_e(1, 0, b, a))
                        .scale(&quarter);
                    let expected =
                        d.lambda().get(&[], 0, &[a, b]).unwrap().scale(&fe(2 * n as i64 + 1));
                    assert_eq!(skew, expected);
                    for ap in 0..2 {
                        for bp in 0..2 {
                            let sym = t_e(ap, bp, a, b)
                                .add(&t_e(bp, ap, a, b))
                                .add(&t_e(ap, bp, b, a))
                                .add(&t_e(bp, ap, b, a))
                                .scale(&quarter);
                            let expected = d
                                .phi()
                                .get(&[], 0, &[a, b, ap, bp])
                                .unwrap()
                                .scale(&fe(2 * n as i64 - 1));
                            assert_eq!(sym, expected);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn qk_curvature_matches_closed_forms() {
        let r = qk_curvature(2, &fe(1));
        let rep = ricci_scalar(&r, true).unwrap();
        assert_eq!(rep.scalar, fe(64));
        assert!(rep.einstein);
        assert_eq!(rep.qk_identities, Some(true));

        let r = qk_curvature(3, &fe(1));
        let rep = ricci_scalar(&r, true).unwrap();
        assert_eq!(rep.scalar, fe(120));
        assert!(rep.einstein);
        assert_eq!(rep.qk_identities, Some(true));

        let zero = CurvatureData::<FieldElement>::zero(2);
        let rep = ricci_scalar(&zero, false).unwrap();
        assert!(rep.ricci.is_zero());
        assert!(rep.scalar.is_zero());
        assert!(rep.einstein);
        assert_eq!(rep.qk_identities, None);
    }

    // With the scalar part λ·ϵ and no trace part, the raised skew
    // H family collapses to λ(δ_{C'}^{A'}ε^{B'D'} + δ_{C'}^{B'}ε^{A'D'}),
    // so its full primed symmetrization vanishes.
    #[test]
    fn qk_raised_skew_h_family_has_closed_form() {
        let mut rng = ChaCha20Rng::seed_from_u64(13);
        let n = 2;
        let lam = FieldElement::random_gaussian(&mut rng, 5);
        let mut d = CurvatureDecomposition::zero(n);
        d.lambda = SpinorTensor::from_fn(lambda_class(n), |_, _, idx| {
            add_scaled(FieldElement::zero(), &lam, eps_unprimed(idx[0], idx[1]))
        });
        d.psi = weyl_project(
            &SpinorTensor::random(psi_class(n), &mut rng, 3),
            2 * n,
            2 * n as i64 + 2,
        );
        let r = reconstruct_curvature(&d).unwrap();
        for a1 in 0..2 * n {
            for a2 in 0..2 * n {
                let lam12 = d.lambda.get(&[], 0, &[a1, a2]).unwrap();
                for ap in 0..2 {
                    for bp in 0..2 {
                        for cp in 0..2 {
                            for dp in 0..2 {
                                let got = h_raised_skew(&r, a1, a2, ap, bp, cp, dp);
                                let mut expected = FieldElement::zero();
                                if delta(cp, ap) {
                                    expected = add_scaled(expected, lam12, eps2_up(bp, dp));
                                }
                                if delta(cp, bp) {
                                    expected = add_scaled(expected, lam12, eps2_up(ap, dp));
                                }
                                assert_eq!(got, expected);
                            }
                        }
                    }
                }
            }
        }
    }

    // Full symmetrization over the three raised primed indices kills the
    // raised skew H family for any admissible curvature with no second
    // Weyl part.
    #[test]
    fn raised_skew_h_family_symmetrization_vanishes() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        for n in [2usize, 3] {
            let d = random_decomposition(n, &mut rng, 3);
            let r = reconstruct_curvature(&d).unwrap();
            for a1 in 0..2 * n {
                for a2 in 0..2 * n {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            for cp in 0..2 {
                                for dp in 0..2 {
                                    let sum = h_raised_skew(&r, a1, a2, ap, bp, cp, dp)
                                        .add(&h_raised_skew(&r, a1, a2, ap, dp, cp, bp))
                                        .add(&h_raised_skew(&r, a1, a2, dp, bp, cp, ap))
                                        .add(&h_raised_skew(&r, a1, a2, bp, ap, cp, dp))
                                        .add(&h_raised_skew(&r, a1, a2, dp, ap, cp, bp))
                                        .add(&h_raised_skew(&r, a1, a2, bp, dp, cp, ap));
                                    assert!(sum.is_zero());
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    // Antisymmetrizing the three lower unprimed slots of the E family
    // kills it, and the raised symmetric form reduces to the trace part;
    // in particular it vanishes when the trace part does.
    #[test]
    fn e_family_unprimed_antisymmetrization_vanishes() {
        let mut rng = ChaCha20Rng::seed_from_u64(19);
        let n = 2;
        let m = 2 * n;
        let d = random_decomposition(n, &mut rng, 3);
        let r = reconstruct_curvature(&d).unwrap();
        for ap in 0..2 {
            for bp in 0..2 {
                for a in 0..m {
                    for b in 0..m {
                        for c in 0..m {
                            for dd in 0..m {
                                let sum = r
                                    .re(ap, bp, a, b, c, dd)
                                    .add(r.re(ap, bp, b, c, a, dd))
                                    .add(r.re(ap, bp, c, a, b, dd))
                                    .sub(r.re(ap, bp, b, a, c, dd))
                                    .sub(r.re(ap, bp, a, c, b, dd))
                                    .sub(r.re(ap, bp, c, b, a, dd));
                                assert!(sum.is_zero());
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn e_family_raised_sym_reduces_to_trace_part() {
        let mut rng = ChaCha20Rng::seed_from_u64(23);
        let n = 2;
        let m = 2 * n;

        // Admissible curvature with vanishing trace part: raised sym E = 0.
        let mut d = CurvatureDecomposition::zero(n);
        d.lambda = {
            let raw = SpinorTensor::<FieldElement>::random(lambda_class(n), &mut rng, 4);
            let rat = |a: usize, b: usize| raw.get(&[], 0, &[a, b]).unwrap();
            SpinorTensor::from_fn(lambda_class(n), |_, _, idx| {
                rat(idx[0], idx[1])
                    .sub(rat(idx[1], idx[0]))
                    .scale(&FieldElement::from_ratio(1, 2))
            })
        };
        d.psi = weyl_project(
            &SpinorTensor::random(psi_class(n), &mut rng, 3),
            m,
            2 * n as i64 + 2,
        );
        let r = reconstruct_curvature(&d).unwrap();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            for dd in 0..m {
                                assert!(e_raised_sym(&r, a, b, c, ap, bp, dd).is_zero());
                            }
                        }
                    }
                }
            }
        }

        // General admissible curvature: raised sym E equals the raised
        // trace part assembled with the two δ terms.
        let d = random_decomposition(n, &mut rng, 3);
        let r = reconstruct_curvature(&d).unwrap();
        let phi_raised = |b: usize, c: usize, ap: usize, bp: usize| {
            let mut acc = FieldElement::zero();
            for (x, y) in [(ap, bp), (bp, ap)] {
                for ta in 0..2 {
                    for tb in 0..2 {
                        let w = eps2_up(ta, x) * eps2_up(tb, y);
                        if w != 0 {
                            acc = add_scaled(
                                acc,
                                d.phi().get(&[], 0, &[b, c, ta, tb]).unwrap(),
                                w,
                            );
                        }
                    }
                }
            }
            acc.scale(&FieldElement::from_ratio(1, 2))
        };
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            for dd in 0..m {
                                let mut expected = FieldElement::zero();
                                if delta(a, dd) {
                                    expected = expected.add(&phi_raised(b, c, ap, bp));
                                }
                                if delta(b, dd) {
                                    expected = expected.sub(&phi_raised(a, c, ap, bp));
                                }
                                assert_eq!(e_raised_sym(&r, a, b, c, ap, bp, dd), expected);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn substitution_annihilates_scalars() {
        let mut rng = ChaCha20Rng::seed_from_u64(29);
        let n = 2;
        let d = random_decomposition(n, &mut rng, 3);
        let r = reconstruct_curvature(&d).unwrap();
        let f = SpinorTensor::<FieldElement>::random(SymmetryClass::scalar(n), &mut rng, 5);
        let out = apply_ricci_identity(&r, &f, (0, 1), (2, 0)).unwrap();
        assert!(out.is_zero());
    }

    // The raised symmetrized commutator on a lower primed section matches
    // the closed quaternionic Kähler form.
    #[test]
    fn qk_raised_commutator_matches_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let n = 2;
        let m = 2 * n;
        let lam = fe(3);
        let r = qk_curvature(n, &lam);
        let class = SymmetryClass::free_tensor(n, &[Slot::PRIMED_LO]);
        let f = SpinorTensor::<FieldElement>::random(class.clone(), &mut rng, 5);
        let half = FieldElement::from_ratio(1, 2);
        for a1 in 0..m {
            for a2 in 0..m {
                let lam12 = lam.scale(&FieldElement::from_int(eps_unprimed(a1, a2)));
                for ap1 in 0..2 {
                    for ap2 in 0..2 {
                        let got = raised_commutator_sym(&r, &f, a1, a2, ap1, ap2).unwrap();
                        let expected = SpinorTensor::from_fn(class.clone(), |_, _, idx| {
                            let cp = idx[0];
                            let mut acc = FieldElement::zero();
                            for dp in 0..2 {
                                let fv = f.get(&[], 0, &[dp]).unwrap();
                                if delta(cp, ap1) {
                                    acc = add_scaled(acc, fv, eps2_up(ap2, dp));
                                }
                                if delta(cp, ap2) {
                                    acc = add_scaled(acc, fv, eps2_up(ap1, dp));
                                }
                            }
                            acc.scale(&half).mul(&lam12).neg()
                        });
                        assert_eq!(got, expected);
                    }
                }
            }
        }
    }

    // Expanding the antisymmetric and symmetric blocks into free slots
    // commutes with the substitution.
    #[test]
    fn substitution_respects_block_structure() {
        let mut rng = ChaCha20Rng::seed_from_u64(37);
        let n = 2;
        let m = 2 * n;
        let d = random_decomposition(n, &mut rng, 3);
        let r = reconstruct_curvature(&d).unwrap();
        let class = SymmetryClass::section(n, 2, 1, false).unwrap();
        let f = SpinorTensor::<FieldElement>::random(class, &mut rng, 5);
        let free_class = SymmetryClass::free_tensor(
            n,
            &[Slot::UNPRIMED_LO, Slot::UNPRIMED_LO, Slot::PRIMED_LO],
        );
        let g = SpinorTensor::from_fn(free_class, |_, _, idx| {
            f.read_full(&[idx[0], idx[1]], &[idx[2]], &[]).unwrap()
        });
        let a = (1, 0);
        let b = (2, 1);
        let out_f = apply_ricci_identity(&r, &f, a, b).unwrap();
        let out_g = apply_ricci_identity(&r, &g, a, b).unwrap();
        for x in 0..m {
            for y in 0..m {
                for p in 0..2 {
                    assert_eq!(
                        out_f.read_full(&[x, y], &[p], &[]).unwrap(),
                        *out_g.get(&[], 0, &[x, y, p]).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn error_paths_are_reported() {
        let n = 2;
        // Non-antisymmetric E family.
        let mut r_e = SpinorTensor::<FieldElement>::zero(e_family_class(n));
        r_e.set(&[], 0, &[0, 1, 0, 1, 2, 3], fe(1)).unwrap();
        let r_h = SpinorTensor::zero(h_family_class(n));
        assert!(matches!(
            CurvatureData::new(n, r_e, r_h),
            Err(Error::BadCurvature(_))
        ));

        // Nonzero upper trace on the H family.
        let r_e = SpinorTensor::<FieldElement>::zero(e_family_class(n));
        let mut r_h = SpinorTensor::zero(h_family_class(n));
        r_h.set(&[], 0, &[0, 1, 0, 1, 0, 0], fe(1)).unwrap();
        r_h.set(&[], 0, &[1, 0, 1, 0, 0, 0], fe(-1)).unwrap();
        assert!(matches!(
            CurvatureData::new(n, r_e, r_h),
            Err(Error::BadCurvature(_))
        ));

        // Non-symmetric trace part.
        let mut phi = SpinorTensor::<FieldElement>::zero(phi_class(n));
        phi.set(&[], 0, &[0, 1, 0, 0], fe(1)).unwrap();
        assert!(matches!(
            CurvatureDecomposition::new(
                n,
                SpinorTensor::zero(lambda_class(n)),
                phi,
                SpinorTensor::zero(psi_class(n)),
                None,
            ),
            Err(Error::BadDecomposition(_))
        ));

        // Second Weyl part outside dimension one, and missing in it.
        assert!(matches!(
            CurvatureDecomposition::new(
                2,
                SpinorTensor::<FieldElement>::zero(lambda_class(2)),
                SpinorTensor::zero(phi_class(2)),
                SpinorTensor::zero(psi_class(2)),
                Some(SpinorTensor::zero(psi_prime_class())),
            ),
            Err(Error::BadDecomposition(_))
        ));
        assert!(matches!(
            CurvatureDecomposition::new(
                1,
                SpinorTensor::<FieldElement>::zero(lambda_class(1)),
                SpinorTensor::zero(phi_class(1)),
                SpinorTensor::zero(psi_class(1)),
                None,
            ),
            Err(Error::BadDecomposition(_))
        ));

        // Quaternionic Kähler flag with a nonzero trace part.
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        let mut d = CurvatureDecomposition::zero(n);
        let raw = SpinorTensor::<FieldElement>::random(phi_class(n), &mut rng, 3);
        let rat = |a: usize, b: usize, ap: usize, bp: usize| {
            raw.get(&[], 0, &[a, b, ap, bp]).unwrap()
        };
        d.phi = SpinorTensor::from_fn(phi_class(n), |_, _, idx| {
            let (a, b, ap, bp) = (idx[0], idx[1], idx[2], idx[3]);
            rat(a, b, ap, bp)
                .add(rat(b, a, ap, bp))
                .add(rat(a, b, bp, ap))
                .add(rat(b, a, bp, ap))
                .scale(&FieldElement::from_ratio(1, 4))
        });
        let r = reconstruct_curvature(&d).unwrap();
        assert!(matches!(
            ricci_scalar(&r, true),
            Err(Error::NotQuaternionicKahler(_))
        ));

        // Scalar part not proportional to the symplectic form.
        let mut lambda = SpinorTensor::<FieldElement>::zero(lambda_class(n));
        lambda.set(&[], 0, &[0, 2], fe(1)).unwrap();
        lambda.set(&[], 0, &[2, 0], fe(-1)).unwrap();
        let d = CurvatureDecomposition::new(
            n,
            lambda,
            SpinorTensor::zero(phi_class(n)),
            SpinorTensor::zero(psi_class(n)),
            None,
        )
        .unwrap();
        let r = reconstruct_curvature(&d).unwrap();
        assert!(matches!(
            ricci_scalar(&r, true),
            Err(Error::NotQuaternionicKahler(_))
        ));

        // Substitution on an upper symmetric block.
        let r = qk_curvature(n, &fe(1));
        let up = SymmetryClass::section(n, 1, 1, true).unwrap();
        let f = SpinorTensor::<FieldElement>::zero(up);
        assert!(matches!(
            apply_ricci_identity(&r, &f, (0, 0), (1, 1)),
            Err(Error::BadSlots(_))
        ));

        // Direction index out of range.
        let f = SpinorTensor::<FieldElement>::zero(SymmetryClass::scalar(n));
        assert!(matches!(
            apply_ricci_identity(&r, &f, (2 * n, 0), (0, 1)),
            Err(Error::BadIndex(_))
        ));
    }

    // In dimension one the second Weyl channel participates in the round
    // trip and the contraction identities still hold.
    #[test]
    fn dimension_one_second_weyl_channel_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(47);
        for _ in 0..5 {
            let d = random_decomposition(1, &mut rng, 4);
            assert!(d.psi_prime().is_some());
            let r = reconstruct_curvature(&d).unwrap();
            let back = decompose_curvature(&r).unwrap();
            assert_eq!(back, d);
            assert!(check_traces(&r).contractions_pass());
        }
    }
}

