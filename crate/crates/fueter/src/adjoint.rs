//! Formal L² adjoints of the flat first-order operators on the torus.
//!
//! With the torus volume normalized to 1 there is no boundary term, so
//! ⟨∂_a f, h⟩ = −⟨f, ∂_a h⟩ for every coordinate derivation. Each frame
//! derivation therefore has the first-order adjoint Z*_{AA'} = −Z^{AA'},
//! whose coefficients are the conjugates of those of Z_{AA'}; the adjoints
//! of the full derivative ∇ and of the lower first-order stage operator
//! follow from the same device once the index raisings and block
//! contractions are threaded through the symmetrized storage.
//!
//! Pairings are only available on scalar backends that embed in the span of
//! finitely many Fourier modes (trigonometric polynomials and constants);
//! everything else is rejected with [`Error::UnsupportedBackend`].

use rand::Rng;

use crate::error::Error;
use crate::field::FieldElement;
use crate::flat::{flat_nabla, CheckOutcome, FlatFrame, NablaVariant};
use crate::frames::z_apply;
use crate::ops::first_lower;
use crate::scalar::Scalar;
use crate::tensor::{Slot, SpinorTensor, SymmetryClass};
use crate::trig::TrigPolynomialFn;

/// Whether the scalar backend carries the exact torus pairing.
pub fn backend_has_pairing<S: Scalar>() -> bool {
    S::zero().torus_pairing(&S::zero()).is_some()
}

fn require_pairing<S: Scalar>() -> Result<(), Error> {
    if backend_has_pairing::<S>() {
        Ok(())
    } else {
        Err(Error::UnsupportedBackend(
            "torus pairings need a trigonometric or constant scalar backend".into(),
        ))
    }
}

/// Hermitian L² pairing of two same-class tensors over the torus, summed
/// over all index tuples.
pub fn torus_inner_product<S: Scalar>(
    u: &SpinorTensor<S>,
    v: &SpinorTensor<S>,
) -> Result<FieldElement, Error> {
    require_pairing::<S>()?;
    u.inner_product_with(v, |a, b| a.torus_pairing(b).unwrap_or_else(FieldElement::zero))
}

/// The raised frame derivation Z^{AA'} = ε^{BA} ε^{B'A'} Z_{BB'}. Its
/// coefficient vector is the complex conjugate of that of Z_{AA'}.
pub fn z_apply_raised<S: Scalar>(f: &S, a: usize, ap: usize) -> S {
    // both ε's pair an index with its partner in the same two-block
    let su = if a % 2 == 0 { 1 } else { -1 };
    let sp = if ap == 0 { 1 } else { -1 };
    let g = z_apply(f, a ^ 1, ap ^ 1);
    if su * sp > 0 {
        g
    } else {
        g.neg()
    }
}

/// Formal adjoint of a frame derivation on the closed torus:
/// Z*_{AA'} = −Z^{AA'}.
pub fn z_star<S: Scalar>(f: &S, a: usize, ap: usize) -> S {
    z_apply_raised(f, a, ap).neg()
}

/// Adjoint of the full derivative on section classes:
/// (∇*f)_{B₂…B_q B'₂…B'_p} = −∇^{AA'} f_{A B₂…B_q A' B'₂…B'_p}.
pub fn nabla_star<S: Scalar>(f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
    let class = f.class();
    if class.primed_up || !class.free.is_empty() || class.q_anti == 0 || class.p_sym == 0 {
        return Err(Error::BadClass(
            "the adjoint derivative consumes one antisymmetric and one symmetric lower slot"
                .into(),
        ));
    }
    let g = flat_nabla(class.n, f, NablaVariant::Full)?;
    let h = g.raise_free(0)?.raise_free(1)?;
    Ok(h.contract_free_into_anti(0)?.contract_free_into_sym(0)?.neg())
}

/// Split a pure free-slot layout [unprimed lower × a, primed lower × b].
fn free_layout(class: &SymmetryClass) -> Result<(usize, usize), Error> {
    let a = class.free.iter().take_while(|s| **s == Slot::UNPRIMED_LO).count();
    let b = class.free.len() - a;
    if class.q_anti != 0
        || class.p_sym != 0
        || class.free[a..].iter().any(|s| *s != Slot::PRIMED_LO)
    {
        return Err(Error::BadClass(
            "expected free slots [unprimed lower × a, primed lower × b]".into(),
        ));
    }
    Ok((a, b))
}

/// Full derivative on free-slot tensors, with the two fresh slots filed into
/// the standard layout: ∇ maps [U×a, P×b] to [U×(a+1), P×(b+1)] with the new
/// unprimed slot first and the new primed slot leading the primed group.
pub fn nabla_free<S: Scalar>(f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
    let (a, _) = free_layout(f.class())?;
    let g = flat_nabla(f.class().n, f, NablaVariant::Full)?;
    // file the fresh primed slot behind the a + 1 unprimed ones
    g.move_free(1, a + 1)
}

/// Adjoint of the full derivative on free-slot tensors
/// [unprimed lower × a, primed lower × b]: the raised derivative pair is
/// contracted against the leading unprimed and leading primed slots.
pub fn nabla_star_free<S: Scalar>(f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
    let (a, b) = free_layout(f.class())?;
    if a == 0 || b == 0 {
        return Err(Error::BadClass(
            "the adjoint derivative consumes one unprimed and one primed slot".into(),
        ));
    }
    let g = flat_nabla(f.class().n, f, NablaVariant::Full)?;
    let h = g.raise_free(0)?.raise_free(1)?;
    let c = h.contract_free(0, 2)?;
    // after the first contraction the leading primed slot of f sits at `a`
    Ok(c.contract_free(0, a)?.neg())
}

/// Adjoint of the lower first-order stage operator: maps Λ^{q+1} ⊗ ⊙^{p−1}
/// back to Λ^q ⊗ ⊙^p through
/// (𝒟*f)_{𝒜 A'₁…A'_p} = ∇_{(A'₁}{}^{A} f_{|A 𝒜| A'₂…A'_p)}.
pub fn d_lower_star<S: Scalar>(f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
    let class = f.class();
    if class.primed_up || !class.free.is_empty() || class.q_anti == 0 {
        return Err(Error::BadClass(
            "the stage adjoint consumes one antisymmetric lower slot".into(),
        ));
    }
    let g = flat_nabla(class.n, f, NablaVariant::Full)?;
    g.raise_free(0)?.contract_free_into_anti(0)?.sym_into_block(0)
}

/// The operator families that come with torus adjoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjointOp {
    /// A single frame derivation Z_{AA'}, acting componentwise.
    Frame { a: usize, ap: usize },
    /// The full derivative ∇ on free-slot tensors.
    Nabla,
    /// The lower first-order stage operator on section classes.
    DLower,
}

/// A forward operator together with its formal adjoint at fixed
/// quaternionic dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdjointPair {
    n: usize,
    op: AdjointOp,
}

impl AdjointPair {
    pub fn new(n: usize, op: AdjointOp) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(
                "quaternionic dimension must be positive".into(),
            ));
        }
        if let AdjointOp::Frame { a, ap } = op {
            if a >= 2 * n || ap >= 2 {
                return Err(Error::BadIndex(format!(
                    "frame indices ({}, {}') out of range for n = {}",
                    a, ap, n
                )));
            }
        }
        Ok(AdjointPair { n, op })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn op(&self) -> AdjointOp {
        self.op
    }

    /// Apply the forward operator.
    pub fn forward<S: Scalar>(&self, f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
        match self.op {
            AdjointOp::Frame { a, ap } => Ok(f.map(|x| z_apply(x, a, ap))),
            AdjointOp::Nabla => nabla_free(f),
            AdjointOp::DLower => first_lower(&FlatFrame::new(self.n), f),
        }
    }

    /// Apply the formal adjoint. The formulas are derivative expressions, but
    /// their adjoint meaning lives on the torus, so backends without the
    /// pairing are rejected.
    pub fn adjoint<S: Scalar>(&self, f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
        require_pairing::<S>()?;
        match self.op {
            AdjointOp::Frame { a, ap } => Ok(f.map(|x| z_star(x, a, ap))),
            AdjointOp::Nabla => nabla_star_free(f),
            AdjointOp::DLower => d_lower_star(f),
        }
    }

    /// Both sides of the defining identity ⟨F h, f⟩ = ⟨h, F* f⟩.
    pub fn defining_pairing<S: Scalar>(
        &self,
        h: &SpinorTensor<S>,
        f: &SpinorTensor<S>,
    ) -> Result<(FieldElement, FieldElement), Error> {
        let lhs = torus_inner_product(&self.forward(h)?, f)?;
        let rhs = torus_inner_product(h, &self.adjoint(f)?)?;
        Ok((lhs, rhs))
    }
}

/// Apply the formal adjoint of a paired operator.
pub fn adjoint_apply<S: Scalar>(
    pair: &AdjointPair,
    f: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    pair.adjoint(f)
}

/// Random trig-polynomial tensor, sparse modes with small coefficients.
pub fn random_trig_tensor<R: Rng + ?Sized>(
    class: SymmetryClass,
    rng: &mut R,
    mode_bound: i32,
    n_terms: usize,
    bound: i64,
) -> SpinorTensor<TrigPolynomialFn> {
    let coords = 4 * class.n;
    SpinorTensor::from_fn(class, |_, _, _| {
        TrigPolynomialFn::random(rng, coords, mode_bound, n_terms, bound)
    })
}

/// A small pool of random frequency vectors.
pub fn random_mode_pool<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    size: usize,
    mode_bound: i32,
) -> Vec<Vec<i32>> {
    (0..size)
        .map(|_| (0..4 * n).map(|_| rng.gen_range(-mode_bound..=mode_bound)).collect())
        .collect()
}

/// Random tensor whose components draw from a fixed pool of modes, so that
/// two tensors built over the same pool overlap in L².
pub fn random_trig_tensor_from_pool<R: Rng + ?Sized>(
    class: SymmetryClass,
    rng: &mut R,
    pool: &[Vec<i32>],
    bound: i64,
) -> SpinorTensor<TrigPolynomialFn> {
    SpinorTensor::from_fn(class, |_, _, _| {
        let mut f = TrigPolynomialFn::default();
        for m in pool {
            if rng.gen_bool(0.75) {
                let c = FieldElement::random_gaussian(rng, bound);
                f = f.add(&TrigPolynomialFn::mode_with(m, &c));
            }
        }
        f
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AdjointReport {
    pub n: usize,
    pub max_q: usize,
    pub max_p: usize,
    pub trials: usize,
    /// Ratio ⟨F h, f⟩ / ⟨h, F* f⟩ observed whenever the denominator was
    /// nonzero; the adjoint convention is exact precisely when this is 1.
    pub measured_constant: Option<String>,
    pub checks: Vec<CheckOutcome>,
}

impl AdjointReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

/// Check the defining adjointness pairings on random trig sections, for the
/// frame derivations, the full derivative on free-slot tensors up to
/// (max_q, max_p) inputs, and the stage operators on section classes. Also
/// checks ∇* on constants and the distinguished single-mode pairing.
pub fn verify_adjoints<R: Rng + ?Sized>(
    n: usize,
    max_q: usize,
    max_p: usize,
    trials: usize,
    rng: &mut R,
) -> Result<AdjointReport, Error> {
    let mut checks = Vec::new();
    let mut constants: Vec<FieldElement> = Vec::new();
    let mut record = |lhs: &FieldElement, rhs: &FieldElement, constants: &mut Vec<FieldElement>| {
        if !rhs.is_zero() {
            if let Ok(r) = lhs.div(rhs) {
                constants.push(r);
            }
        }
    };

    // the distinguished single-mode value: ⟨Z_{00'} e^{i x₀}, e^{i x₀}⟩ = i/√2
    {
        let mut failures = Vec::new();
        let mut m = vec![0i32; 4 * n];
        m[0] = 1;
        let e0 = TrigPolynomialFn::mode(&m);
        let lhs = z_apply(&e0, 0, 0)
            .torus_pairing(&e0)
            .expect("trig backend has the torus pairing");
        let want = FieldElement::i().mul(&FieldElement::inv_sqrt2());
        if lhs != want {
            failures.push(format!(
                "single-mode frame pairing gave {}, expected i/√2",
                lhs.canonical_string()
            ));
        }
        checks.push(CheckOutcome { name: "frame_mode_value".into(), cases: 1, failures });
    }

    // frame derivations on random scalars
    for a in 0..2 * n {
        for ap in 0..2 {
            let pair = AdjointPair::new(n, AdjointOp::Frame { a, ap })?;
            let class = SymmetryClass::scalar(n);
            let mut failures = Vec::new();
            for t in 0..trials {
                let pool = random_mode_pool(rng, n, 3, 1);
                let h = random_trig_tensor_from_pool(class.clone(), rng, &pool, 2);
                let f = random_trig_tensor_from_pool(class.clone(), rng, &pool, 2);
                let (lhs, rhs) = pair.defining_pairing(&h, &f)?;
                if lhs != rhs {
                    failures.push(format!("trial {}: frame ({}, {}') pairing mismatch", t, a, ap));
                }
                record(&lhs, &rhs, &mut constants);
            }
            checks.push(CheckOutcome {
                name: format!("frame_adjoint_{}_{}", a, ap),
                cases: trials,
                failures,
            });
        }
    }

    // full derivative on free-slot tensors
    for q in 0..=max_q {
        for p in 0..=max_p {
            let pair = AdjointPair::new(n, AdjointOp::Nabla)?;
            let mut slots_h = vec![Slot::UNPRIMED_LO; q];
            slots_h.extend(vec![Slot::PRIMED_LO; p]);
            let mut slots_f = vec![Slot::UNPRIMED_LO; q + 1];
            slots_f.extend(vec![Slot::PRIMED_LO; p + 1]);
            let class_h = SymmetryClass::free_tensor(n, &slots_h);
            let class_f = SymmetryClass::free_tensor(n, &slots_f);
            let mut failures = Vec::new();
            for t in 0..trials {
                let pool = random_mode_pool(rng, n, 3, 1);
                let h = random_trig_tensor_from_pool(class_h.clone(), rng, &pool, 2);
                let f = random_trig_tensor_from_pool(class_f.clone(), rng, &pool, 2);
                let (lhs, rhs) = pair.defining_pairing(&h, &f)?;
                if lhs != rhs {
                    failures.push(format!("trial {}: derivative pairing mismatch", t));
                }
                record(&lhs, &rhs, &mut constants);
            }
            checks.push(CheckOutcome {
                name: format!("nabla_adjoint_{}_{}", q, p),
                cases: trials,
                failures,
            });
        }
    }

    // stage operators on section classes
    for q in 0..=max_q {
        if q + 1 > 2 * n {
            continue;
        }
        for p in 1..=max_p {
            let pair = AdjointPair::new(n, AdjointOp::DLower)?;
            let class_h = SymmetryClass::section(n, q, p, false)?;
            let class_f = SymmetryClass::section(n, q + 1, p - 1, false)?;
            let mut failures = Vec::new();
            for t in 0..trials {
                let pool = random_mode_pool(rng, n, 3, 1);
                let h = random_trig_tensor_from_pool(class_h.clone(), rng, &pool, 2);
                let f = random_trig_tensor_from_pool(class_f.clone(), rng, &pool, 2);
                let (lhs, rhs) = pair.defining_pairing(&h, &f)?;
                if lhs != rhs {
                    failures.push(format!("trial {}: stage pairing mismatch at ({}, {})", t, q, p));
                }
                record(&lhs, &rhs, &mut constants);
            }
            checks.push(CheckOutcome {
                name: format!("stage_adjoint_{}_{}", q, p),
                cases: trials,
                failures,
            });
        }
    }

    // the adjoint derivative annihilates constant sections
    {
        let mut failures = Vec::new();
        let mut cases = 0;
        for q in 1..=max_q.min(2 * n) {
            for p in 1..=max_p {
                cases += 1;
                let class = SymmetryClass::section(n, q, p, false)?;
                let c = SpinorTensor::from_fn(class, |_, _, _| {
                    TrigPolynomialFn::constant(&FieldElement::from_int(3))
                });
                if !nabla_star(&c)?.is_zero() {
                    failures.push(format!("constant section at ({}, {}) not annihilated", q, p));
                }
            }
        }
        checks.push(CheckOutcome { name: "adjoint_kills_constants".into(), cases, failures });
    }

    // every observed ratio must be exactly 1
    let mut failures = Vec::new();
    let cases = constants.len();
    for c in &constants {
        if *c != FieldElement::one() {
            failures.push(format!("observed proportionality {}", c.canonical_string()));
            break;
        }
    }
    let measured_constant = constants.first().map(|c| c.canonical_string());
    checks.push(CheckOutcome { name: "proportionality_is_one".into(), cases, failures });

    Ok(AdjointReport { n, max_q, max_p, trials, measured_constant, checks })
}
