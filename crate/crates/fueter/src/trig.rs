//! Trigonometric-polynomial backend: finite sums Σ_m c_m e^{i⟨m,x⟩} with
//! integer frequency vectors m, the exact function algebra of the flat torus.
//!
//! Derivation multiplies a mode coefficient by i·m_a, conjugation flips the
//! mode sign, and the L² pairing over the torus (volume normalized to 1)
//! reduces to a finite sum of coefficient products because distinct modes are
//! orthonormal.

use std::collections::BTreeMap;

use rand::Rng;

use crate::field::FieldElement;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigPolynomialFn {
    pub terms: BTreeMap<Vec<i32>, FieldElement>,
}

fn trim(mut key: Vec<i32>) -> Vec<i32> {
    while key.last() == Some(&0) {
        key.pop();
    }
    key
}

impl TrigPolynomialFn {
    pub fn constant(c: &FieldElement) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c.clone());
        }
        TrigPolynomialFn { terms }
    }

    /// The pure mode e^{i⟨m,x⟩}.
    pub fn mode(m: &[i32]) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(trim(m.to_vec()), FieldElement::one());
        TrigPolynomialFn { terms }
    }

    pub fn mode_with(m: &[i32], c: &FieldElement) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(trim(m.to_vec()), c.clone());
        }
        TrigPolynomialFn { terms }
    }

    fn add_term(terms: &mut BTreeMap<Vec<i32>, FieldElement>, key: Vec<i32>, c: FieldElement) {
        if c.is_zero() {
            return;
        }
        match terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&c);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Coefficient of the mode e^{i⟨m,x⟩}.
    pub fn coefficient(&self, m: &[i32]) -> FieldElement {
        self.terms.get(&trim(m.to_vec())).cloned().unwrap_or_else(FieldElement::zero)
    }

    /// Random trigonometric polynomial with up to `n_terms` modes, frequencies
    /// bounded by `mode_bound` in each coordinate.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        num_coords: usize,
        mode_bound: i32,
        n_terms: usize,
        bound: i64,
    ) -> Self {
        let mut f = TrigPolynomialFn::default();
        for _ in 0..n_terms {
            let m: Vec<i32> =
                (0..num_coords).map(|_| rng.gen_range(-mode_bound..=mode_bound)).collect();
            let c = FieldElement::random_gaussian(rng, bound);
            f = f.add(&TrigPolynomialFn::mode_with(&m, &c));
        }
        f
    }
}

/// L² inner product ∫ f ḡ over the torus with total measure 1:
/// Σ_m f_m · conj(g_m).
pub fn torus_pair(f: &TrigPolynomialFn, g: &TrigPolynomialFn) -> FieldElement {
    let mut acc = FieldElement::zero();
    for (m, fm) in &f.terms {
        if let Some(gm) = g.terms.get(m) {
            acc = acc.add(&fm.mul(&gm.conj()));
        }
    }
    acc
}

impl Scalar for TrigPolynomialFn {
    fn zero() -> Self {
        TrigPolynomialFn::default()
    }

    fn one() -> Self {
        TrigPolynomialFn::constant(&FieldElement::one())
    }

    fn from_field(c: &FieldElement) -> Self {
        TrigPolynomialFn::constant(c)
    }

    fn add(&self, rhs: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &rhs.terms {
            Self::add_term(&mut terms, k.clone(), v.clone());
        }
        TrigPolynomialFn { terms }
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v.neg())).collect();
        TrigPolynomialFn { terms }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &rhs.terms {
                let mut key = vec![0i32; k1.len().max(k2.len())];
                for (i, &e) in k1.iter().enumerate() {
                    key[i] += e;
                }
                for (i, &e) in k2.iter().enumerate() {
                    key[i] += e;
                }
                Self::add_term(&mut terms, trim(key), v1.mul(v2));
            }
        }
        TrigPolynomialFn { terms }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn derive(&self, coord: usize) -> Self {
        let mut terms = BTreeMap::new();
        for (key, coeff) in &self.terms {
            if coord >= key.len() || key[coord] == 0 {
                continue;
            }
            // d/dx_a e^{i⟨m,x⟩} = i·m_a e^{i⟨m,x⟩}
            let factor = FieldElement::i().mul(&FieldElement::from_int(key[coord] as i64));
            Self::add_term(&mut terms, key.clone(), coeff.mul(&factor));
        }
        TrigPolynomialFn { terms }
    }

    fn conj(&self) -> Self {
        let mut terms = BTreeMap::new();
        for (key, coeff) in &self.terms {
            let flipped: Vec<i32> = key.iter().map(|&m| -m).collect();
            Self::add_term(&mut terms, flipped, coeff.conj());
        }
        TrigPolynomialFn { terms }
    }

    fn torus_pairing(&self, rhs: &Self) -> Option<FieldElement> {
        Some(torus_pair(self, rhs))
    }
}
