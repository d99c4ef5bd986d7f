//! Connections with jet coefficients and the curved versions of the
//! operators.
//!
//! A connection is described in the standard flat frame by its coefficients
//! Γ_{aB}{}^C on E and Γ_{aB'}{}^{C'} on H, where a = (A, A') runs over the
//! tangent directions split through E ⊗ H. The frame derivations commute, so
//! covariant derivatives are frame derivations plus Γ-terms and admissibility
//! becomes three linear conditions on the coefficients:
//!
//!   - the E-trace Γ_{aD}{}^D vanishes, so the top form on E is parallel;
//!   - Γ_{a(B'C')} is symmetric, equivalently the H-trace vanishes, so the
//!     symplectic form on H is parallel;
//!   - the combined tangent coefficient Γ_{aB}{}^C δ_{B'}{}^{C'} +
//!     Γ_{aB'}{}^{C'} δ_B{}^C is symmetric under a ↔ (BB'), which is
//!     torsion-freeness in a commuting frame.
//!
//! Pointwise these conditions admit only the zero solution: applying the
//! torsion condition across two distinct primed indices forces each
//! unprimed coefficient matrix into a multiple of the identity, and the
//! trace conditions kill the multiple. `sample_connection` assembles the
//! constraint system exactly and reports this honestly, returning the flat
//! connection for every seed.
//!
//! Curved models therefore come from a conformal weight instead: for a unit
//! jet Ω, the shifted coefficients Γ_{aB}{}^C = δ_A{}^C Υ_{BA'} and
//! Γ_{aB'}{}^{C'} = δ_{A'}{}^{C'} Υ_{AB'} with Υ = Ω⁻¹ ∇Ω satisfy the same
//! torsion condition, while the parallel forms pick up the weight: Ω ϵ on E
//! and Ω ε on H. A `ConnectionJets` value therefore carries an optional
//! weight, and its validation differentiates the weighted forms literally.
//! All jet arithmetic is exact, so every reported identity is an identity of
//! truncated Taylor expansions, not a numerical statement.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::curvature::{
    decompose_curvature, e_family_class, h_family_class, rep_primed, CurvatureData,
};
use crate::error::Error;
use crate::field::FieldElement;
use crate::flat::{CheckOutcome, NablaVariant};
use crate::frames::z_apply;
use crate::jet::{JetFn, EXACT_ORDER};
use crate::linalg::Matrix;
use crate::ops::{first_lower, first_upper, nabla_class, second_order, Nabla};
use crate::poly::PolynomialFn;
use crate::scalar::Scalar;
use crate::symbols::{ComplexSpec, OperatorKind};
use crate::tensor::{Slot, SlotKind, SpinorTensor, SymmetryClass};

pub(crate) fn idx_e(n: usize, a: usize, ap: usize, b: usize, c: usize) -> usize {
    ((a * 2 + ap) * (2 * n) + b) * (2 * n) + c
}

pub(crate) fn idx_h(a: usize, ap: usize, bp: usize, cp: usize) -> usize {
    ((a * 2 + ap) * 2 + bp) * 2 + cp
}

/// Connection coefficients as jets at the origin, with an optional conformal
/// weight whose top form and symplectic form are the parallel ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionJets {
    n: usize,
    order: u32,
    gamma_e: Vec<JetFn>,
    gamma_h: Vec<JetFn>,
    weight: Option<JetFn>,
}

impl ConnectionJets {
    /// Wraps unweighted coefficients, validating admissibility.
    ///
    /// `gamma_e` is indexed by (a, a', b, c) for Γ_{(aa')b}{}^c and `gamma_h`
    /// by (a, a', b', c') for Γ_{(aa')b'}{}^{c'}, both row-major.
    pub fn new(
        n: usize,
        order: u32,
        gamma_e: Vec<JetFn>,
        gamma_h: Vec<JetFn>,
    ) -> Result<Self, Error> {
        Self::build(n, order, gamma_e, gamma_h, None)
    }

    /// Wraps coefficients together with a conformal weight; the parallel
    /// forms are then Ω ϵ and Ω ε.
    pub fn with_weight(
        n: usize,
        order: u32,
        gamma_e: Vec<JetFn>,
        gamma_h: Vec<JetFn>,
        weight: JetFn,
    ) -> Result<Self, Error> {
        Self::build(n, order, gamma_e, gamma_h, Some(weight))
    }

    fn build(
        n: usize,
        order: u32,
        gamma_e: Vec<JetFn>,
        gamma_h: Vec<JetFn>,
        weight: Option<JetFn>,
    ) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::BadIndex("quaternionic dimension must be positive".into()));
        }
        let range = 2 * n;
        if gamma_e.len() != range * 2 * range * range || gamma_h.len() != range * 2 * 2 * 2 {
            return Err(Error::BadIndex("connection coefficient table has the wrong size".into()));
        }
        if gamma_e.iter().chain(&gamma_h).any(|g| g.order() < order) {
            return Err(Error::BadConnection(
                "a coefficient jet is truncated below the stated order".into(),
            ));
        }
        let conn = ConnectionJets { n, order, gamma_e, gamma_h, weight };
        conn.validate()?;
        Ok(conn)
    }

    /// The flat connection: all coefficients zero, exact to every order.
    pub fn zero(n: usize) -> Self {
        let range = 2 * n;
        ConnectionJets {
            n,
            order: EXACT_ORDER,
            gamma_e: vec![JetFn::zero(); range * 2 * range * range],
            gamma_h: vec![JetFn::zero(); range * 2 * 2 * 2],
            weight: None,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The order to which every coefficient jet is known.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn weight(&self) -> Option<&JetFn> {
        self.weight.as_ref()
    }

    /// Coefficient Γ_{(aa')b}{}^c on E.
    pub fn gamma_e(&self, a: usize, ap: usize, b: usize, c: usize) -> &JetFn {
        &self.gamma_e[idx_e(self.n, a, ap, b, c)]
    }

    /// Coefficient Γ_{(aa')b'}{}^{c'} on H.
    pub fn gamma_h(&self, a: usize, ap: usize, bp: usize, cp: usize) -> &JetFn {
        &self.gamma_h[idx_h(a, ap, bp, cp)]
    }

    /// True when every coefficient vanishes identically.
    pub fn is_flat(&self) -> bool {
        self.gamma_e.iter().chain(&self.gamma_h).all(|g| g.is_zero())
    }

    /// The weight as a jet, 1 for unweighted connections.
    pub fn weight_jet(&self) -> JetFn {
        self.weight.clone().unwrap_or_else(JetFn::one)
    }

    /// The combined tangent coefficient Γ_{a(BB')}{}^{(CC')}.
    fn tm_coefficient(
        &self,
        a: usize,
        ap: usize,
        b: usize,
        bp: usize,
        c: usize,
        cp: usize,
    ) -> JetFn {
        let mut t = JetFn::zero();
        if bp == cp {
            t = t.add(self.gamma_e(a, ap, b, c));
        }
        if b == c {
            t = t.add(self.gamma_h(a, ap, bp, cp));
        }
        t
    }

    /// The weighted top form on E: the single component of Λ^{2n} E* is the
    /// weight itself.
    fn parallel_volume(&self) -> SpinorTensor<JetFn> {
        let w = self.weight_jet();
        let class = SymmetryClass::section(self.n, 2 * self.n, 0, false)
            .expect("the top antisymmetric power exists");
        SpinorTensor::from_fn(class, |_, _, _| w.clone())
    }

    /// The weighted symplectic form Ω ε_{B'C'} on H, with ε_{0'1'} = 1.
    fn parallel_symplectic(&self) -> SpinorTensor<JetFn> {
        let w = self.weight_jet();
        let class = SymmetryClass::free_tensor(self.n, &[Slot::PRIMED_LO, Slot::PRIMED_LO]);
        SpinorTensor::from_fn(class, |_, _, free| match (free[0], free[1]) {
            (0, 1) => w.clone(),
            (1, 0) => w.neg(),
            _ => JetFn::zero(),
        })
    }

    /// Checks torsion-freeness and the parallelism of the (weighted) top and
    /// symplectic forms, differentiating them literally.
    pub fn validate(&self) -> Result<(), Error> {
        if let Some(w) = &self.weight {
            if w.constant_term().is_zero() {
                return Err(Error::SingularConformalFactor);
            }
        }
        let range = 2 * self.n;
        for a in 0..range {
            for ap in 0..2 {
                for b in 0..range {
                    for bp in 0..2 {
                        if a * 2 + ap >= b * 2 + bp {
                            continue;
                        }
                        for c in 0..range {
                            for cp in 0..2 {
                                let lhs = self.tm_coefficient(a, ap, b, bp, c, cp);
                                let rhs = self.tm_coefficient(b, bp, a, ap, c, cp);
                                if !lhs.sub(&rhs).is_zero() {
                                    return Err(Error::BadConnection(format!(
                                        "torsion does not vanish at a=({a},{ap}'), b=({b},{bp}'), c=({c},{cp}')"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        let dvol = covariant_derivative(self, &self.parallel_volume(), NablaVariant::Full)?;
        if !dvol.is_zero() {
            return Err(Error::BadConnection("the top form on E is not parallel".into()));
        }
        let deps = covariant_derivative(self, &self.parallel_symplectic(), NablaVariant::Full)?;
        if !deps.is_zero() {
            return Err(Error::BadConnection("the symplectic form on H is not parallel".into()));
        }
        Ok(())
    }
}

/// Inverse of a unit jet; exact constants invert exactly.
pub(crate) fn jet_inverse(w: &JetFn) -> Result<JetFn, Error> {
    if w.order() == EXACT_ORDER {
        let c = w.constant_term();
        if w.sub(&JetFn::from_field(&c)).is_zero() {
            return Ok(JetFn::from_field(&c.inv()?));
        }
        return Err(Error::NonUnitJet);
    }
    w.try_inv()
}

/// The logarithmic gradient Υ_{BB'} = Ω⁻¹ ∇_{BB'} Ω of a unit jet.
pub fn upsilon_of(omega: &JetFn, n: usize) -> Result<SpinorTensor<JetFn>, Error> {
    if omega.constant_term().is_zero() {
        return Err(Error::SingularConformalFactor);
    }
    if omega.order() == 0 {
        return Err(Error::OrderUnderflow(
            "the conformal factor carries no derivative information".into(),
        ));
    }
    let inv = jet_inverse(omega)?;
    let class = SymmetryClass::free_tensor(n, &[Slot::UNPRIMED_LO, Slot::PRIMED_LO]);
    Ok(SpinorTensor::from_fn(class, |_, _, free| {
        inv.mul(&z_apply(omega, free[0], free[1]))
    }))
}

/// Rescales a connection by the conformal factor Ω: both coefficient
/// families shift by the Kronecker pattern in Υ = Ω⁻¹ ∇Ω and the weight
/// multiplies by Ω. Admissibility of the result is validated, not assumed.
pub fn conformal_shift(base: &ConnectionJets, omega: &JetFn) -> Result<ConnectionJets, Error> {
    let n = base.n();
    let range = 2 * n;
    let ups = upsilon_of(omega, n)?;
    let up = |b: usize, bp: usize| ups.get(&[], 0, &[b, bp]).expect("index in range");
    let mut gamma_e = Vec::with_capacity(range * 2 * range * range);
    for a in 0..range {
        for ap in 0..2 {
            for b in 0..range {
                for c in 0..range {
                    let mut g = base.gamma_e(a, ap, b, c).clone();
                    if a == c {
                        g = g.add(up(b, ap));
                    }
                    gamma_e.push(g);
                }
            }
        }
    }
    let mut gamma_h = Vec::with_capacity(range * 2 * 2 * 2);
    for a in 0..range {
        for ap in 0..2 {
            for bp in 0..2 {
                for cp in 0..2 {
                    let mut g = base.gamma_h(a, ap, bp, cp).clone();
                    if ap == cp {
                        g = g.add(up(a, bp));
                    }
                    gamma_h.push(g);
                }
            }
        }
    }
    let order = gamma_e
        .iter()
        .chain(&gamma_h)
        .map(|g| g.order())
        .min()
        .unwrap_or(EXACT_ORDER);
    let weight = base.weight_jet().mul(omega);
    ConnectionJets::build(n, order, gamma_e, gamma_h, Some(weight))
}

/// Projection of v onto the span of the basis, orthogonal for the bilinear
/// form Σ xᵢ yᵢ. The basis vectors coming from kernel computations are
/// rational, for which the form is definite.
fn project_onto_kernel(basis: &[Vec<FieldElement>], v: &[FieldElement]) -> Vec<FieldElement> {
    if basis.is_empty() {
        return vec![FieldElement::zero(); v.len()];
    }
    let dot = |x: &[FieldElement], y: &[FieldElement]| {
        let mut acc = FieldElement::zero();
        for (a, b) in x.iter().zip(y) {
            acc = acc.add(&a.mul(b));
        }
        acc
    };
    let k = basis.len();
    let mut gram = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            gram.set(i, j, dot(&basis[i], &basis[j]));
        }
    }
    let rhs: Vec<FieldElement> = basis.iter().map(|b| dot(b, v)).collect();
    let x = gram
        .solve(&rhs)
        .expect("Gram matrix of independent rational vectors is invertible");
    let mut out = vec![FieldElement::zero(); v.len()];
    for (xi, b) in x.iter().zip(basis) {
        for (o, bv) in out.iter_mut().zip(b) {
            *o = o.add(&xi.mul(bv));
        }
    }
    out
}

/// The pointwise admissibility conditions as one exact linear system; the
/// columns list the E coefficients then the H coefficients.
fn admissibility_matrix(n: usize) -> Matrix {
    let range = 2 * n;
    let ne = range * 2 * range * range;
    let nh = range * 2 * 2 * 2;
    let mut rows: Vec<Vec<(usize, i64)>> = Vec::new();
    for a in 0..range {
        for ap in 0..2 {
            rows.push((0..range).map(|d| (idx_e(n, a, ap, d, d), 1)).collect());
            rows.push((0..2).map(|d| (ne + idx_h(a, ap, d, d), 1)).collect());
        }
    }
    for a in 0..range {
        for ap in 0..2 {
            for b in 0..range {
                for bp in 0..2 {
                    if a * 2 + ap >= b * 2 + bp {
                        continue;
                    }
                    for c in 0..range {
                        for cp in 0..2 {
                            let mut row = Vec::new();
                            if bp == cp {
                                row.push((idx_e(n, a, ap, b, c), 1));
                            }
                            if b == c {
                                row.push((ne + idx_h(a, ap, bp, cp), 1));
                            }
                            if ap == cp {
                                row.push((idx_e(n, b, bp, a, c), -1));
                            }
                            if a == c {
                                row.push((ne + idx_h(b, bp, ap, cp), -1));
                            }
                            rows.push(row);
                        }
                    }
                }
            }
        }
    }
    let mut m = Matrix::zeros(rows.len(), ne + nh);
    for (i, row) in rows.iter().enumerate() {
        // within one row all column indices are distinct
        for &(j, v) in row {
            m.set(i, j, FieldElement::from_int(v));
        }
    }
    m
}

/// Draws coefficient jets with small integer coefficients and projects them
/// onto the kernel of the admissibility system, order by order. The kernel
/// is trivial in every dimension covered here, so the projection collapses
/// to the flat connection; the draw is skipped in that case because its
/// projection would be zero anyway.
pub fn sample_connection(n: usize, order: u32, seed: u64) -> Result<ConnectionJets, Error> {
    if n < 2 {
        return Err(Error::UnsupportedDimension(
            "sampling needs quaternionic dimension at least two; dimension one carries an extra nonlinear closure condition".into(),
        ));
    }
    if order == EXACT_ORDER {
        return Err(Error::BadIndex("a finite jet order is required".into()));
    }
    let range = 2 * n;
    let ne = range * 2 * range * range;
    let nh = range * 2 * 2 * 2;
    let kernel = admissibility_matrix(n).kernel_basis();
    let entries: Vec<JetFn> = if kernel.is_empty() {
        vec![JetFn::zero(); ne + nh]
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let coords = 4 * n;
        let raw: Vec<PolynomialFn> = (0..ne + nh)
            .map(|_| PolynomialFn::random(&mut rng, coords, order.min(2), 3, 2))
            .collect();
        let mut monomials: std::collections::BTreeSet<Vec<u8>> = std::collections::BTreeSet::new();
        for p in &raw {
            monomials.extend(p.terms.keys().cloned());
        }
        let mut acc = vec![PolynomialFn::default(); ne + nh];
        for m in monomials {
            let v: Vec<FieldElement> = raw
                .iter()
                .map(|p| p.terms.get(&m).cloned().unwrap_or_else(FieldElement::zero))
                .collect();
            for (slot, c) in project_onto_kernel(&kernel, &v).into_iter().enumerate() {
                acc[slot] = acc[slot].add(&PolynomialFn::monomial(&m, &c));
            }
        }
        acc.iter().map(|p| JetFn::from_poly(p, order)).collect()
    };
    let gamma_e = entries[..ne].to_vec();
    let gamma_h = entries[ne..].to_vec();
    ConnectionJets::new(n, order, gamma_e, gamma_h)
}

/// Draws a weighted admissible connection: a sparse unit weight
/// Ω = c + a x_i + b x_j², truncated one order above the connection and
/// shifted into the coefficients through Υ = Ω⁻¹ ∇Ω. The quadratic term
/// matters: for affine weights the two-form part of the curvature cancels
/// identically, while a second derivative of Ω leaves it nonzero.
pub fn sample_weighted_connection(n: usize, order: u32, seed: u64) -> Result<ConnectionJets, Error> {
    if n == 0 {
        return Err(Error::BadIndex("quaternionic dimension must be positive".into()));
    }
    if order >= EXACT_ORDER - 1 {
        return Err(Error::BadIndex("a finite jet order is required".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let coords = 4 * n;
    let nonzero = |rng: &mut ChaCha20Rng| loop {
        let v = rng.gen_range(-2i64..=2);
        if v != 0 {
            return v;
        }
    };
    let i = rng.gen_range(0..coords);
    let j = loop {
        let j = rng.gen_range(0..coords);
        if j != i {
            break j;
        }
    };
    let quad = PolynomialFn::var(j).mul(&PolynomialFn::var(j));
    let poly = PolynomialFn::constant(&FieldElement::from_int(nonzero(&mut rng)))
        .add(&PolynomialFn::var(i).scale(&FieldElement::from_int(nonzero(&mut rng))))
        .add(&quad.scale(&FieldElement::from_int(nonzero(&mut rng))));
    let omega = JetFn::from_poly(&poly, order + 1);
    conformal_shift(&ConnectionJets::zero(n), &omega)
}

/// True only for the zero jet known to every order. A zero jet of finite
/// order is not exactly zero, only unresolved, so dropping a term it enters
/// would overstate the order of the result.
fn exactly_zero(j: &JetFn) -> bool {
    j.is_zero() && j.order() == EXACT_ORDER
}

/// The frame derivation, extended to stored-zero jets: the derivative of a
/// zero jet is zero one order lower.
fn z_apply_jet(comp: &JetFn, a: usize, ap: usize) -> JetFn {
    if comp.is_zero() {
        if comp.order() == EXACT_ORDER {
            JetFn::zero()
        } else {
            JetFn::from_poly(&PolynomialFn::default(), comp.order() - 1)
        }
    } else {
        z_apply(comp, a, ap)
    }
}

/// Covariant derivative of a section tensor: the fresh tangent slot pair
/// comes first, as with the flat derivation, and every index of the section
/// contributes a Γ-term, negative on lower slots and positive on upper ones.
pub fn covariant_derivative(
    conn: &ConnectionJets,
    f: &SpinorTensor<JetFn>,
    variant: NablaVariant,
) -> Result<SpinorTensor<JetFn>, Error> {
    let class = f.class().clone();
    if class.n != conn.n {
        return Err(Error::BadClass(format!(
            "section is over quaternionic dimension {}, the connection over {}",
            class.n, conn.n
        )));
    }
    for c in f.components() {
        if c.order() == 0 {
            return Err(Error::OrderUnderflow(
                "a section component is an order-zero jet, so its derivative is undetermined"
                    .into(),
            ));
        }
    }
    let range = 2 * conn.n;
    let out = SpinorTensor::from_fn(nabla_class(&class), |anti, ones, free| {
        let (a, ap) = (free[0], free[1]);
        let rest = &free[2..];
        let comp = f.get(anti, ones, rest).expect("index shapes match");
        let mut acc = z_apply_jet(comp, a, ap);
        let prep = rep_primed(class.p_sym, ones);
        for (i, &bi) in anti.iter().enumerate() {
            for d in 0..range {
                let g = conn.gamma_e(a, ap, bi, d);
                if exactly_zero(g) {
                    continue;
                }
                let mut idx = anti.to_vec();
                idx[i] = d;
                let v = f.read_full(&idx, &prep, rest).expect("full read stays in range");
                if exactly_zero(&v) {
                    continue;
                }
                acc = acc.sub(&g.mul(&v));
            }
        }
        for i in 0..class.p_sym {
            for d in 0..2 {
                let g = if class.primed_up {
                    conn.gamma_h(a, ap, d, prep[i])
                } else {
                    conn.gamma_h(a, ap, prep[i], d)
                };
                if exactly_zero(g) {
                    continue;
                }
                let mut idx = prep.clone();
                idx[i] = d;
                let v = f.read_full(anti, &idx, rest).expect("full read stays in range");
                if exactly_zero(&v) {
                    continue;
                }
                let term = g.mul(&v);
                acc = if class.primed_up { acc.add(&term) } else { acc.sub(&term) };
            }
        }
        for (j, slot) in class.free.iter().enumerate() {
            for d in 0..slot.range(class.n) {
                let g = match (slot.kind, slot.up) {
                    (SlotKind::Unprimed, false) => conn.gamma_e(a, ap, rest[j], d),
                    (SlotKind::Unprimed, true) => conn.gamma_e(a, ap, d, rest[j]),
                    (SlotKind::Primed, false) => conn.gamma_h(a, ap, rest[j], d),
                    (SlotKind::Primed, true) => conn.gamma_h(a, ap, d, rest[j]),
                };
                if exactly_zero(g) {
                    continue;
                }
                let mut idx = rest.to_vec();
                idx[j] = d;
                let v = f.get(anti, ones, &idx).expect("index shapes match");
                if exactly_zero(v) {
                    continue;
                }
                let term = g.mul(v);
                acc = if slot.up { acc.add(&term) } else { acc.sub(&term) };
            }
        }
        acc
    });
    match variant {
        NablaVariant::Full => Ok(out),
        NablaVariant::Antisym => out.anti_into_block(0),
    }
}

/// The commutator 2∇_{[a}∇_{b]} f for explicit tangent indices a = (A, A'),
/// b = (B, B').
pub fn direct_commutator(
    conn: &ConnectionJets,
    f: &SpinorTensor<JetFn>,
    a: (usize, usize),
    b: (usize, usize),
) -> Result<SpinorTensor<JetFn>, Error> {
    let once = covariant_derivative(conn, f, NablaVariant::Full)?;
    let dd = covariant_derivative(conn, &once, NablaVariant::Full)?;
    Ok(SpinorTensor::from_fn(f.class().clone(), |anti, ones, free| {
        let mut fwd = vec![a.0, a.1, b.0, b.1];
        fwd.extend_from_slice(free);
        let mut bwd = vec![b.0, b.1, a.0, a.1];
        bwd.extend_from_slice(free);
        let x = dd.get(anti, ones, &fwd).expect("index shapes match");
        let y = dd.get(anti, ones, &bwd).expect("index shapes match");
        x.sub(y)
    }))
}

/// Reads the curvature off commutators of covariant derivatives applied to
/// the constant basis sections of E* and H*. For a section of E* the
/// commutator is −R_{(AA')(BB')C}{}^D f_D, so the family components are
/// recovered with one sign flip; the wrapped result is validated by
/// construction against the family invariants.
pub fn curvature_from_connection(conn: &ConnectionJets) -> Result<CurvatureData<JetFn>, Error> {
    if conn.order() < 1 {
        return Err(Error::OrderUnderflow(
            "curvature needs connection jets of order at least one".into(),
        ));
    }
    let n = conn.n();
    let range = 2 * n;
    let second = |sec: &SpinorTensor<JetFn>| -> Result<SpinorTensor<JetFn>, Error> {
        let once = covariant_derivative(conn, sec, NablaVariant::Full)?;
        covariant_derivative(conn, &once, NablaVariant::Full)
    };
    let e_class = SymmetryClass::free_tensor(n, &[Slot::UNPRIMED_LO]);
    let mut dd_e = Vec::with_capacity(range);
    for d in 0..range {
        let sec = SpinorTensor::from_fn(e_class.clone(), |_, _, free| {
            if free[0] == d { JetFn::one() } else { JetFn::zero() }
        });
        dd_e.push(second(&sec)?);
    }
    let h_class = SymmetryClass::free_tensor(n, &[Slot::PRIMED_LO]);
    let mut dd_h = Vec::with_capacity(2);
    for dp in 0..2 {
        let sec = SpinorTensor::from_fn(h_class.clone(), |_, _, free| {
            if free[0] == dp { JetFn::one() } else { JetFn::zero() }
        });
        dd_h.push(second(&sec)?);
    }
    let r_e = SpinorTensor::from_fn(e_family_class(n), |_, _, free| {
        let (ap, bp, a, b, c, d) = (free[0], free[1], free[2], free[3], free[4], free[5]);
        let fwd = dd_e[d].get(&[], 0, &[a, ap, b, bp, c]).expect("index in range");
        let bwd = dd_e[d].get(&[], 0, &[b, bp, a, ap, c]).expect("index in range");
        bwd.sub(fwd)
    });
    let r_h = SpinorTensor::from_fn(h_family_class(n), |_, _, free| {
        let (a, b, ap, bp, cp, dp) = (free[0], free[1], free[2], free[3], free[4], free[5]);
        let fwd = dd_h[dp].get(&[], 0, &[a, ap, b, bp, cp]).expect("index in range");
        let bwd = dd_h[dp].get(&[], 0, &[b, bp, a, ap, cp]).expect("index in range");
        bwd.sub(fwd)
    });
    CurvatureData::new(n, r_e, r_h)
}

/// A connection packaged for the operator pipeline: its covariant
/// derivation, the ε-rescaling by the inverse weight, and the curvature
/// two-form entering the second-order operator.
pub struct CurvedFrame<'a> {
    conn: &'a ConnectionJets,
    curvature: CurvatureData<JetFn>,
    lambda: Option<SpinorTensor<JetFn>>,
    raise: Option<JetFn>,
}

impl<'a> CurvedFrame<'a> {
    pub fn new(conn: &'a ConnectionJets) -> Result<Self, Error> {
        let curvature = curvature_from_connection(conn)?;
        let dec = decompose_curvature(&curvature)?;
        let raise = match conn.weight() {
            Some(w) => Some(jet_inverse(w)?),
            None => None,
        };
        // the family components carry one weighted symplectic factor, so the
        // two-form entering the second-order operator is Λ divided by the
        // weight
        let lam = match &raise {
            Some(winv) => dec.lambda().mul_scalar(winv),
            None => dec.lambda().clone(),
        };
        let lambda = if lam.is_zero() { None } else { Some(lam) };
        Ok(CurvedFrame { conn, curvature, lambda, raise })
    }

    pub fn connection(&self) -> &ConnectionJets {
        self.conn
    }

    pub fn curvature(&self) -> &CurvatureData<JetFn> {
        &self.curvature
    }

    /// The two-form Λ_{AB} in the normalization used by the second-order
    /// operator; None when it vanishes.
    pub fn lambda_form(&self) -> Option<&SpinorTensor<JetFn>> {
        self.lambda.as_ref()
    }

    /// Apply the stage-j operator of the curved complex.
    pub fn apply_d(
        &self,
        spec: &ComplexSpec,
        j: usize,
        f: &SpinorTensor<JetFn>,
    ) -> Result<SpinorTensor<JetFn>, Error> {
        if spec.n() != self.conn.n() {
            return Err(Error::BadClass(
                "complex and connection have different quaternionic dimensions".into(),
            ));
        }
        if f.class() != spec.space(j)? {
            return Err(Error::BadClass(format!("section does not lie in space {}", j)));
        }
        match spec.operator_kind(j)? {
            OperatorKind::FirstLower => first_lower(self, f),
            OperatorKind::SecondOrder => second_order(self, f),
            OperatorKind::FirstUpper => first_upper(self, f),
        }
    }
}

impl Nabla<JetFn> for CurvedFrame<'_> {
    fn n(&self) -> usize {
        self.conn.n()
    }

    fn nabla(&self, f: &SpinorTensor<JetFn>) -> Result<SpinorTensor<JetFn>, Error> {
        covariant_derivative(self.conn, f, NablaVariant::Full)
    }

    fn raise_scale(&self) -> Option<JetFn> {
        self.raise.clone()
    }

    fn lambda(&self) -> Option<SpinorTensor<JetFn>> {
        self.lambda.clone()
    }
}

/// A random tensor of the class with jet entries of the given order.
pub fn random_jet_tensor<R: Rng + ?Sized>(
    class: SymmetryClass,
    rng: &mut R,
    order: u32,
) -> SpinorTensor<JetFn> {
    let coords = 4 * class.n;
    SpinorTensor::from_fn(class, |_, _, _| {
        JetFn::from_poly(&PolynomialFn::random(rng, coords, order, 4, 3), order)
    })
}

/// A random section of the stage-j space with jet entries of the given
/// order.
pub fn random_jet_section<R: Rng + ?Sized>(
    spec: &ComplexSpec,
    j: usize,
    rng: &mut R,
    order: u32,
) -> Result<SpinorTensor<JetFn>, Error> {
    Ok(random_jet_tensor(spec.space(j)?.clone(), rng, order))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CurvedComplexReport {
    pub n: usize,
    pub k: usize,
    pub jet_order: u32,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl CurvedComplexReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

/// Verify the curved sequence on random jet sections: every junction
/// annihilates them, the two-form Λ is closed for the antisymmetrized
/// gradient, and commutators of covariant derivatives match the curvature
/// substitution. Jets of order at least three are required, since the
/// second-order junctions consume three derivatives of a section and two of
/// the connection.
pub fn verify_curved_complex<R: Rng + ?Sized>(
    conn: &ConnectionJets,
    k: usize,
    rng: &mut R,
    trials: usize,
) -> Result<CurvedComplexReport, Error> {
    if conn.order() < 3 {
        return Err(Error::OrderUnderflow(
            "junction checks need connection jets of order at least three".into(),
        ));
    }
    let n = conn.n();
    let spec = ComplexSpec::new(n, k)?;
    let frame = CurvedFrame::new(conn)?;
    let sec_order = if conn.order() == EXACT_ORDER { 3 } else { conn.order() };
    let mut checks = Vec::new();

    for j in 0..spec.num_operators().saturating_sub(1) {
        let mut failures = Vec::new();
        for t in 0..trials {
            let f = random_jet_section(&spec, j, rng, sec_order)?;
            let g = frame.apply_d(&spec, j, &f)?;
            let h = frame.apply_d(&spec, j + 1, &g)?;
            if !h.is_zero() {
                failures.push(format!("trial {t}"));
            }
        }
        checks.push(CheckOutcome {
            name: format!("composite_vanishes_{}_{}", j, j + 1),
            cases: trials,
            failures,
        });
    }

    // ∇_{[A}{}^{A'} Λ_{BC]} = 0: raise the fresh primed slot of ∇Λ and
    // antisymmetrize the three unprimed ones. Vacuous for flat models.
    {
        let mut failures = Vec::new();
        let mut cases = 0;
        if let Some(lam) = frame.lambda_form() {
            let grad = covariant_derivative(conn, lam, NablaVariant::Full)?;
            let raised = grad.raise_free(1)?;
            let range = 2 * n;
            for x in 0..range {
                for y in x + 1..range {
                    for z in y + 1..range {
                        for ap in 0..2 {
                            cases += 1;
                            let term = |a: usize, b: usize, c: usize| {
                                raised.get(&[], 0, &[a, ap, b, c]).expect("index in range")
                            };
                            let acc = term(x, y, z)
                                .sub(term(x, z, y))
                                .add(term(y, z, x))
                                .sub(term(y, x, z))
                                .add(term(z, x, y))
                                .sub(term(z, y, x));
                            if !acc.is_zero() {
                                failures.push(format!("triple ({x},{y},{z}), primed {ap}"));
                            }
                        }
                    }
                }
            }
        } else {
            cases = 1;
        }
        checks.push(CheckOutcome {
            name: "lambda_gradient_antisymmetrizes_to_zero".into(),
            cases,
            failures,
        });
    }

    {
        let mut failures = Vec::new();
        let mut cases = 0;
        let range = 2 * n;
        let pairs: Vec<((usize, usize), (usize, usize))> = if n == 1 {
            vec![((0, 0), (1, 1)), ((0, 1), (1, 0))]
        } else {
            vec![((0, 0), (1, 1)), ((0, 1), (2, 0)), ((1, 0), (range - 1, 1))]
        };
        let classes = [
            SymmetryClass::free_tensor(n, &[Slot::UNPRIMED_LO]),
            SymmetryClass::free_tensor(n, &[Slot::PRIMED_LO]),
        ];
        for class in classes {
            for t in 0..trials {
                let f = random_jet_tensor(class.clone(), rng, sec_order);
                for &(a, b) in &pairs {
                    cases += 1;
                    let direct = direct_commutator(conn, &f, a, b)?;
                    let substituted =
                        crate::curvature::apply_ricci_identity(frame.curvature(), &f, a, b)?;
                    if !direct.sub(&substituted)?.is_zero() {
                        failures.push(format!(
                            "trial {t}, a = ({}, {}'), b = ({}, {}')",
                            a.0, a.1, b.0, b.1
                        ));
                    }
                }
            }
        }
        checks.push(CheckOutcome {
            name: "commutator_matches_curvature".into(),
            cases,
            failures,
        });
    }

    Ok(CurvedComplexReport { n, k, jet_order: sec_order, trials, checks })
}
