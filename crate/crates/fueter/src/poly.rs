//! Polynomial scalar backend: exact ℂ-valued polynomials in the real
//! coordinates x₀, …, x_{4n−1}.
//!
//! Terms are kept sparse in a BTreeMap keyed by exponent vectors with
//! trailing zeros trimmed, so the zero polynomial is the empty map and a
//! constant has the empty key. No zero coefficients are ever stored; keeping
//! the map canonical makes structural equality coincide with polynomial
//! equality.

use std::collections::BTreeMap;

use rand::Rng;

use crate::field::FieldElement;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolynomialFn {
    pub terms: BTreeMap<Vec<u8>, FieldElement>,
}

fn trim(mut key: Vec<u8>) -> Vec<u8> {
    while key.last() == Some(&0) {
        key.pop();
    }
    key
}

impl PolynomialFn {
    pub fn constant(c: &FieldElement) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c.clone());
        }
        PolynomialFn { terms }
    }

    /// The coordinate function x_coord (0-based).
    pub fn var(coord: usize) -> Self {
        let mut key = vec![0u8; coord + 1];
        key[coord] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(key, FieldElement::one());
        PolynomialFn { terms }
    }

    pub fn monomial(exponents: &[u8], coeff: &FieldElement) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(trim(exponents.to_vec()), coeff.clone());
        }
        PolynomialFn { terms }
    }

    fn add_term(terms: &mut BTreeMap<Vec<u8>, FieldElement>, key: Vec<u8>, c: FieldElement) {
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

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().map(|&e| e as u32).sum())
            .max()
            .unwrap_or(0)
    }

    /// Drop all terms of total degree strictly greater than `order`.
    pub fn truncated(&self, order: u32) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(k, _)| k.iter().map(|&e| e as u32).sum::<u32>() <= order)
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        PolynomialFn { terms }
    }

    pub fn eval(&self, point: &[FieldElement]) -> FieldElement {
        let mut acc = FieldElement::zero();
        for (key, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (i, &e) in key.iter().enumerate() {
                assert!(i < point.len(), "evaluation point has too few coordinates");
                for _ in 0..e {
                    term = term.mul(&point[i]);
                }
            }
            acc = acc.add(&term);
        }
        acc
    }

    /// Sparse random polynomial: up to `n_terms` monomials of total degree at
    /// most `max_degree` in `num_coords` variables, Gaussian-integer
    /// coefficients in [-bound, bound].
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        num_coords: usize,
        max_degree: u32,
        n_terms: usize,
        bound: i64,
    ) -> Self {
        let mut p = PolynomialFn::default();
        for _ in 0..n_terms {
            let deg = rng.gen_range(0..=max_degree);
            let mut key = vec![0u8; num_coords];
            for _ in 0..deg {
                key[rng.gen_range(0..num_coords)] += 1;
            }
            let c = FieldElement::random_gaussian(rng, bound);
            p = p.add(&PolynomialFn::monomial(&key, &c));
        }
        p
    }
}

impl Scalar for PolynomialFn {
    fn zero() -> Self {
        PolynomialFn::default()
    }

    fn one() -> Self {
        PolynomialFn::constant(&FieldElement::one())
    }

    fn from_field(c: &FieldElement) -> Self {
        PolynomialFn::constant(c)
    }

    fn add(&self, rhs: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (k, v) in &rhs.terms {
            Self::add_term(&mut terms, k.clone(), v.clone());
        }
        PolynomialFn { terms }
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v.neg())).collect();
        PolynomialFn { terms }
    }

    fn mul(&self, rhs: &Self) -> Self {
        let mut terms = BTreeMap::new();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &rhs.terms {
                let mut key = vec![0u8; k1.len().max(k2.len())];
                for (i, &e) in k1.iter().enumerate() {
                    key[i] += e;
                }
                for (i, &e) in k2.iter().enumerate() {
                    key[i] += e;
                }
                Self::add_term(&mut terms, trim(key), v1.mul(v2));
            }
        }
        PolynomialFn { terms }
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
            let e = key[coord];
            let mut new_key = key.clone();
            new_key[coord] = e - 1;
            let c = coeff.mul(&FieldElement::from_int(e as i64));
            Self::add_term(&mut terms, trim(new_key), c);
        }
        PolynomialFn { terms }
    }

    fn conj(&self) -> Self {
        // Coordinates are real, so conjugation acts on coefficients only.
        let terms = self.terms.iter().map(|(k, v)| (k.clone(), v.conj())).collect();
        PolynomialFn { terms }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn x(i: usize) -> PolynomialFn {
        PolynomialFn::var(i)
    }

    #[test]
    fn product_rule_example() {
        // d/dx0 (x0² x1) = 2 x0 x1
        let p = x(0).mul(&x(0)).mul(&x(1));
        let expected = x(0).mul(&x(1)).scale(&FieldElement::from_int(2));
        assert_eq!(p.derive(0), expected);
        assert!(p.derive(2).is_zero());
    }

    #[test]
    fn eval_example() {
        // (x0 + i x1)² at (1, 2) = (1 + 2i)² = -3 + 4i
        let p = x(0).add(&x(1).scale(&FieldElement::i()));
        let sq = p.mul(&p);
        let pt = [FieldElement::from_int(1), FieldElement::from_int(2)];
        assert_eq!(sq.eval(&pt), FieldElement::from_parts(-3, 0, 4, 0));
    }

    #[test]
    fn canonical_form_drops_zeros() {
        let p = x(3).sub(&x(3));
        assert!(p.is_zero());
        assert!(p.terms.is_empty());
    }

    fn arb_poly() -> impl Strategy<Value = PolynomialFn> {
        proptest::collection::vec(
            (proptest::collection::vec(0u8..3, 0..3), -4i64..=4, -4i64..=4),
            0..5,
        )
        .prop_map(|terms| {
            let mut p = PolynomialFn::default();
            for (key, re, im) in terms {
                p = p.add(&PolynomialFn::monomial(&key, &FieldElement::from_parts(re, 0, im, 0)));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(p in arb_poly(), q in arb_poly(), r in arb_poly()) {
            prop_assert_eq!(p.mul(&q), q.mul(&p));
            prop_assert_eq!(p.mul(&q).mul(&r), p.mul(&q.mul(&r)));
            prop_assert_eq!(p.mul(&q.add(&r)), p.mul(&q).add(&p.mul(&r)));
        }

        #[test]
        fn derivations_commute(p in arb_poly()) {
            prop_assert_eq!(p.derive(0).derive(1), p.derive(1).derive(0));
        }

        #[test]
        fn leibniz(p in arb_poly(), q in arb_poly()) {
            let lhs = p.mul(&q).derive(1);
            let rhs = p.derive(1).mul(&q).add(&p.mul(&q.derive(1)));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn random_polynomials_are_reproducible() {
        let mut r1 = ChaCha20Rng::seed_from_u64(7);
        let mut r2 = ChaCha20Rng::seed_from_u64(7);
        let p1 = PolynomialFn::random(&mut r1, 8, 4, 6, 3);
        let p2 = PolynomialFn::random(&mut r2, 8, 4, 6, 3);
        assert_eq!(p1, p2);
        assert!(p1.total_degree() <= 4);
    }
}
