//! The operator pipeline shared by symbols, flat, curved, and conformally
//! rescaled settings.
//!
//! Every operator of the complexes is assembled from one abstraction: a
//! derivation-like map ∇ that prepends a lower unprimed and a lower primed
//! slot. Substituting plain multiplication by ξ_{AA'} for ∇ turns the same
//! pipeline into the principal symbol; substituting frame derivations gives
//! the flat operators; adding connection terms gives the curved ones, with
//! an optional rescaling of the ε used to raise the fresh primed index and a
//! curvature two-form entering the second-order operator.

use crate::error::Error;
use crate::field::FieldElement;
use crate::frames::XiMatrix;
use crate::scalar::Scalar;
use crate::tensor::{Slot, SpinorTensor, SymmetryClass};

/// A derivation on spinor fields: ∇f carries two extra leading free slots
/// (lower unprimed, lower primed).
pub trait Nabla<S: Scalar> {
    fn n(&self) -> usize;

    fn nabla(&self, f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error>;

    /// Scalar applied after raising the fresh primed index; used when the
    /// primed symplectic form is rescaled. None means 1.
    fn raise_scale(&self) -> Option<S> {
        None
    }

    /// The curvature two-form Λ_{AB} entering the second-order operator;
    /// None means 0.
    fn lambda(&self) -> Option<SpinorTensor<S>> {
        None
    }
}

/// Extend a class by the two leading ∇-slots.
pub fn nabla_class(class: &SymmetryClass) -> SymmetryClass {
    let mut out = class.clone();
    out.free.insert(0, Slot::PRIMED_LO);
    out.free.insert(0, Slot::UNPRIMED_LO);
    out
}

/// Multiplication by ξ_{AA'} in place of differentiation: the pipeline then
/// computes normalized principal symbols.
pub struct SymbolAction {
    xi: XiMatrix,
}

impl SymbolAction {
    pub fn new(xi: XiMatrix) -> Self {
        SymbolAction { xi }
    }

    pub fn xi(&self) -> &XiMatrix {
        &self.xi
    }
}

impl Nabla<FieldElement> for SymbolAction {
    fn n(&self) -> usize {
        self.xi.n()
    }

    fn nabla(&self, f: &SpinorTensor<FieldElement>) -> Result<SpinorTensor<FieldElement>, Error> {
        let class = nabla_class(f.class());
        Ok(SpinorTensor::from_fn(class, |anti, ones, free| {
            let c = self.xi.lower(free[0], free[1]);
            if c.is_zero() {
                return FieldElement::zero();
            }
            f.get(anti, ones, &free[2..]).expect("index shapes match").mul(c)
        }))
    }
}

fn raise_fresh_primed<S: Scalar, N: Nabla<S>>(
    nab: &N,
    g: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    let h = g.raise_free(1)?;
    Ok(match nab.raise_scale() {
        Some(w) => h.mul_scalar(&w),
        None => h,
    })
}

/// Λ^q ⊗ ⊙^p H* → Λ^{q+1} ⊗ ⊙^{p−1} H*: derive, raise the fresh primed
/// index, contract it into the symmetric block, antisymmetrize the fresh
/// unprimed index into the antisymmetric block.
pub fn first_lower<S: Scalar, N: Nabla<S>>(
    nab: &N,
    f: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    if f.class().primed_up || f.class().p_sym == 0 {
        return Err(Error::BadStage(
            "this operator consumes a lower symmetric block of positive size".into(),
        ));
    }
    let g = nab.nabla(f)?;
    let h = raise_fresh_primed(nab, &g)?;
    let c = h.contract_free_into_sym(1)?;
    c.anti_into_block(0)
}

/// Λ^q ⊗ ⊙^p H → Λ^{q+1} ⊗ ⊙^{p+1} H: derive, raise the fresh primed index,
/// symmetrize it into the block, antisymmetrize the fresh unprimed index.
pub fn first_upper<S: Scalar, N: Nabla<S>>(
    nab: &N,
    f: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    if !f.class().primed_up && f.class().p_sym > 0 {
        return Err(Error::BadStage(
            "this operator extends an upper symmetric block".into(),
        ));
    }
    let g = nab.nabla(f)?;
    let h = raise_fresh_primed(nab, &g)?;
    let mut s = h;
    if !s.class().primed_up {
        // an empty lower block flips variance silently
        debug_assert_eq!(s.class().p_sym, 0);
        let mut class = s.class().clone();
        class.primed_up = true;
        s = SpinorTensor::from_components(class, s.into_components())?;
    }
    let s = s.sym_into_block(1)?;
    s.anti_into_block(0)
}

/// Λ^k → Λ^{k+2}: the second-order operator. Derive twice, raise the outer
/// fresh primed index, contract it against the inner one, antisymmetrize
/// both fresh unprimed indices (outer first), and add the curvature
/// correction 2 Λ ∧ f. Raising the outer index is safe in every setting
/// because no derivative acts after it.
pub fn second_order<S: Scalar, N: Nabla<S>>(
    nab: &N,
    f: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    if f.class().p_sym != 0 {
        return Err(Error::BadStage(
            "the second-order operator consumes a bare antisymmetric power".into(),
        ));
    }
    let g = nab.nabla(f)?;
    let gg = nab.nabla(&g)?; // free: [U-lo outer, P-lo outer, U-lo inner, P-lo inner]
    let h = raise_fresh_primed(nab, &gg)?; // outer primed index up
    let c = h.contract_free(1, 3)?; // free: [U-lo outer, U-lo inner]
    let w = c.anti_into_block(0)?.anti_into_block(0)?;
    match nab.lambda() {
        Some(lam) => {
            let corr = wedge2(&lam, f)?.scale(&FieldElement::from_int(2));
            w.add(&corr)
        }
        None => Ok(w),
    }
}

/// Antisymmetrized product of a two-form with a Λ^q-valued field:
/// out_T = (1/C(q+2,2)) Σ_{i<j} (−1)^{i+j−1} λ_{T_i T_j} f_{T∖{i,j}}.
pub fn wedge2<S: Scalar>(
    lam: &SpinorTensor<S>,
    f: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    let lc = lam.class();
    if lc.q_anti != 0
        || lc.p_sym != 0
        || lc.free.len() != 2
        || lc.free.iter().any(|s| *s != Slot::UNPRIMED_LO)
    {
        return Err(Error::BadSlots("two-form must have two lower unprimed slots".into()));
    }
    let fc = f.class();
    if lc.n != fc.n {
        return Err(Error::BadClass("mismatched quaternionic dimensions".into()));
    }
    let q = fc.q_anti;
    if q + 2 > fc.unprimed_range() {
        return Err(Error::BadClass("wedge exceeds the antisymmetric range".into()));
    }
    let mut class = fc.clone();
    class.q_anti = q + 2;
    let pairs = (q + 2) * (q + 1) / 2;
    let inv = FieldElement::from_int(pairs as i64).inv().expect("positive pair count");
    Ok(SpinorTensor::from_fn(class, |anti, ones, free| {
        let mut acc = S::zero();
        for i in 0..anti.len() {
            for j in (i + 1)..anti.len() {
                let l = lam.get(&[], 0, &[anti[i], anti[j]]).expect("two-form read");
                if l.is_zero() {
                    continue;
                }
                let mut rest = anti.to_vec();
                rest.remove(j);
                rest.remove(i);
                let v = f.get(&rest, ones, free).expect("canonical read");
                if v.is_zero() {
                    continue;
                }
                let term = l.mul(v);
                acc = if (i + j) % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
            }
        }
        acc.scale(&inv)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::binom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    type T = SpinorTensor<FieldElement>;

    fn fe(x: i64) -> FieldElement {
        FieldElement::from_int(x)
    }

    fn e0_symbol(n: usize) -> SymbolAction {
        let mut xi = vec![0i64; 4 * n];
        xi[0] = 1;
        SymbolAction::new(XiMatrix::from_ints(&xi).unwrap())
    }

    /// In the frame normalized to ξ = e₀ the lower-block operator has the
    /// closed form (target tuple T, target block λ):
    ///   T all ≥ 2                 → 0
    ///   T = (0, X), X all ≥ 2     → −(1/(q+1)) θ_{X, λ∪1'}
    ///   T = (1, X), X all ≥ 2     → +(1/(q+1)) θ_{X, λ∪0'}
    ///   T = (0, 1, Y)             → (1/(q+1)) (−θ_{1Y, λ∪1'} − θ_{0Y, λ∪0'})
    #[test]
    fn normalized_symbol_of_lower_operator() {
        let mut rng = ChaCha20Rng::seed_from_u64(41);
        for (n, q, p) in [(1, 0, 1), (2, 0, 2), (2, 1, 1), (2, 1, 2), (3, 2, 2)] {
            let sym = e0_symbol(n);
            let class = SymmetryClass::section(n, q, p, false).unwrap();
            let f = T::random(class, &mut rng, 4);
            let out = first_lower(&sym, &f).unwrap();
            let inv_q1 = FieldElement::from_ratio(1, (q + 1) as i64);
            for ord in 0..out.dim() {
                let (t, ones, _) = out.class().tuple_of(ord);
                let lam_ones = |extra: usize| ones + extra;
                let expected = if t[0] >= 2 {
                    fe(0)
                } else if t[0] == 0 && t.len() > 1 && t[1] == 1 {
                    let y = &t[2..];
                    let mut one_y = vec![1];
                    one_y.extend_from_slice(y);
                    let mut zero_y = vec![0];
                    zero_y.extend_from_slice(y);
                    f.get(&one_y, lam_ones(1), &[])
                        .unwrap()
                        .add(f.get(&zero_y, lam_ones(0), &[]).unwrap())
                        .neg()
                        .mul(&inv_q1)
                } else if t[0] == 0 {
                    f.get(&t[1..], lam_ones(1), &[]).unwrap().neg().mul(&inv_q1)
                } else {
                    f.get(&t[1..], lam_ones(0), &[]).unwrap().mul(&inv_q1)
                };
                assert_eq!(out.component(ord), &expected, "n={} q={} p={} T={:?}", n, q, p, t);
            }
        }
    }

    /// Upper-block operator in the normalized frame, with N = (q+1)(p+1),
    /// target block μ of size p+1 containing c ones:
    ///   T = (0, X) → −c θ_X^{μ∖1'} / N
    ///   T = (1, X) → +(p+1−c) θ_X^{μ∖0'} / N
    ///   T = (0,1,Y) → (−c θ_{1Y}^{μ∖1'} − (p+1−c) θ_{0Y}^{μ∖0'}) / N
    ///   T all ≥ 2  → 0
    #[test]
    fn normalized_symbol_of_upper_operator() {
        let mut rng = ChaCha20Rng::seed_from_u64(42);
        for (n, q, p) in [(1, 0, 0), (2, 1, 0), (2, 2, 1), (3, 2, 2)] {
            let sym = e0_symbol(n);
            let class = SymmetryClass::section(n, q, p, true).unwrap();
            let f = T::random(class, &mut rng, 4);
            let out = first_upper(&sym, &f).unwrap();
            let big_n = ((q + 1) * (p + 1)) as i64;
            for ord in 0..out.dim() {
                let (t, c, _) = out.class().tuple_of(ord);
                let term = |head: usize, rest: &[usize]| -> FieldElement {
                    // c θ_{·}^{μ∖1'} for head 0, (p+1−c) θ_{·}^{μ∖0'} for head 1
                    if head == 0 {
                        if c == 0 {
                            return fe(0);
                        }
                        f.get(rest, c - 1, &[]).unwrap().mul(&fe(c as i64))
                    } else {
                        if c == p + 1 {
                            return fe(0);
                        }
                        f.get(rest, c, &[]).unwrap().mul(&fe((p + 1 - c) as i64))
                    }
                };
                let expected = if t[0] >= 2 {
                    fe(0)
                } else if t[0] == 0 && t.len() > 1 && t[1] == 1 {
                    let y = &t[2..];
                    let mut one_y = vec![1];
                    one_y.extend_from_slice(y);
                    let mut zero_y = vec![0];
                    zero_y.extend_from_slice(y);
                    term(0, &one_y).add(&term(1, &zero_y)).neg()
                } else if t[0] == 0 {
                    term(0, &t[1..]).neg()
                } else {
                    term(1, &t[1..])
                }
                .mul(&FieldElement::from_ratio(1, big_n));
                assert_eq!(out.component(ord), &expected, "n={} q={} p={} T={:?} c={}", n, q, p, t, c);
            }
        }
    }

    /// Second-order operator in the normalized frame:
    /// out_T = (2/((k+2)(k+1))) ϑ_{T∖{0,1}} when {0,1} ⊂ T, else 0.
    #[test]
    fn normalized_symbol_of_second_order_operator() {
        let mut rng = ChaCha20Rng::seed_from_u64(43);
        for (n, k) in [(1, 0), (2, 0), (2, 1), (2, 2), (3, 2)] {
            let sym = e0_symbol(n);
            let class = SymmetryClass::section(n, k, 0, false).unwrap();
            let f = T::random(class, &mut rng, 4);
            let out = second_order(&sym, &f).unwrap();
            let factor = FieldElement::from_ratio(2, ((k + 2) * (k + 1)) as i64);
            for ord in 0..out.dim() {
                let (t, _, _) = out.class().tuple_of(ord);
                let expected = if t.len() >= 2 && t[0] == 0 && t[1] == 1 {
                    f.get(&t[2..], 0, &[]).unwrap().mul(&factor)
                } else {
                    fe(0)
                };
                assert_eq!(out.component(ord), &expected, "n={} k={} T={:?}", n, k, t);
            }
        }
    }

    #[test]
    fn wedge_with_two_form() {
        // q = 0: Λ ∧ f is Λ itself scaled by the scalar
        let n = 2;
        let mut lam: T = SpinorTensor::zero(SymmetryClass::free_tensor(
            n,
            &[Slot::UNPRIMED_LO, Slot::UNPRIMED_LO],
        ));
        lam.set(&[], 0, &[0, 1], fe(2)).unwrap();
        lam.set(&[], 0, &[1, 0], fe(-2)).unwrap();
        lam.set(&[], 0, &[2, 3], fe(1)).unwrap();
        lam.set(&[], 0, &[3, 2], fe(-1)).unwrap();
        let mut f = T::zero(SymmetryClass::section(n, 0, 0, false).unwrap());
        f.set(&[], 0, &[], fe(3)).unwrap();
        let w = wedge2(&lam, &f).unwrap();
        assert_eq!(w.get(&[0, 1], 0, &[]).unwrap(), &fe(6));
        assert_eq!(w.get(&[2, 3], 0, &[]).unwrap(), &fe(3));
        assert_eq!(w.get(&[0, 2], 0, &[]).unwrap(), &fe(0));

        // q = 1 sign pattern: out_{t0t1t2} = (1/3)(λ_{t0t1} g_{t2} − λ_{t0t2} g_{t1} + λ_{t1t2} g_{t0})
        let mut g = T::zero(SymmetryClass::section(n, 1, 0, false).unwrap());
        for a in 0..4 {
            g.set(&[a], 0, &[], fe(a as i64 + 1)).unwrap();
        }
        let w = wedge2(&lam, &g).unwrap();
        let expect = |t: [usize; 3]| -> FieldElement {
            let l = |i: usize, j: usize| lam.get(&[], 0, &[t[i], t[j]]).unwrap().clone();
            let gv = |i: usize| g.get(&[t[i]], 0, &[]).unwrap().clone();
            l(0, 1)
                .mul(&gv(2))
                .sub(&l(0, 2).mul(&gv(1)))
                .add(&l(1, 2).mul(&gv(0)))
                .mul(&FieldElement::from_ratio(1, 3))
        };
        assert_eq!(w.get(&[0, 1, 2], 0, &[]).unwrap(), &expect([0, 1, 2]));
        assert_eq!(w.get(&[0, 1, 3], 0, &[]).unwrap(), &expect([0, 1, 3]));
        assert_eq!(w.get(&[1, 2, 3], 0, &[]).unwrap(), &expect([1, 2, 3]));
    }

    #[test]
    fn stage_shape_errors() {
        let n = 2;
        let sym = e0_symbol(n);
        let upper = T::zero(SymmetryClass::section(n, 1, 1, true).unwrap());
        assert!(matches!(first_lower(&sym, &upper), Err(Error::BadStage(_))));
        let lower = T::zero(SymmetryClass::section(n, 1, 1, false).unwrap());
        assert!(matches!(first_upper(&sym, &lower), Err(Error::BadStage(_))));
        assert!(matches!(second_order(&sym, &lower), Err(Error::BadStage(_))));
    }

    #[test]
    fn symbol_composition_vanishes_along_the_lower_chain() {
        // σ ∘ σ = 0 for consecutive lower-block stages at a random covector
        let mut rng = ChaCha20Rng::seed_from_u64(44);
        for (n, q, p) in [(1, 0, 2), (2, 0, 3), (2, 1, 2)] {
            let xi = crate::frames::random_covector(&mut rng, n, 3);
            let sym = SymbolAction::new(XiMatrix::from_covector(&xi).unwrap());
            let class = SymmetryClass::section(n, q, p, false).unwrap();
            for _ in 0..5 {
                let f = T::random(class.clone(), &mut rng, 4);
                let once = first_lower(&sym, &f).unwrap();
                let twice = first_lower(&sym, &once).unwrap();
                assert!(twice.is_zero(), "n={} q={} p={}", n, q, p);
            }
        }
    }

    #[test]
    fn dimension_bookkeeping() {
        // the pipeline respects the expected bundle dimensions
        let n = 2;
        let sym = e0_symbol(n);
        let class = SymmetryClass::section(n, 1, 2, false).unwrap();
        let f = T::zero(class);
        let out = first_lower(&sym, &f).unwrap();
        assert_eq!(out.class().q_anti, 2);
        assert_eq!(out.class().p_sym, 1);
        assert_eq!(out.dim(), binom(4, 2) * 2);
    }
}
