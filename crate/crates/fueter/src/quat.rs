//! Quaternionic matrices over ℚ and their complex realization.
//!
//! The embedding τ sends a quaternion a + bi + cj + dk to the 2×2 complex
//! block [[a+bi, −c−di], [c−di, a−bi]] and an n×m quaternionic matrix to a
//! 2n×2m complex matrix blockwise. It is an algebra homomorphism, and a
//! covector ξ ∈ ℝ^{4n} read as a quaternionic column ζ satisfies
//! ξ-matrix(ξ) = τ(ζ), which is what makes GL(n,ℍ) usable to normalize ξ.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::Error;
use crate::field::{FieldElement, Q2};
use crate::linalg::Matrix;

/// Quaternion with rational coefficients: a + bi + cj + dk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quaternion {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

impl Quaternion {
    pub fn zero() -> Self {
        let z = BigRational::zero;
        Quaternion { a: z(), b: z(), c: z(), d: z() }
    }

    pub fn one() -> Self {
        Quaternion { a: BigRational::one(), ..Quaternion::zero() }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        let r = |x: i64| BigRational::from(BigInt::from(x));
        Quaternion { a: r(a), b: r(b), c: r(c), d: r(d) }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Quaternion {
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
            c: &self.c + &rhs.c,
            d: &self.d + &rhs.d,
        }
    }

    pub fn neg(&self) -> Self {
        Quaternion {
            a: -self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }

    /// Hamilton product: ij = k, jk = i, ki = j.
    pub fn mul(&self, rhs: &Self) -> Self {
        let (a1, b1, c1, d1) = (&self.a, &self.b, &self.c, &self.d);
        let (a2, b2, c2, d2) = (&rhs.a, &rhs.b, &rhs.c, &rhs.d);
        Quaternion {
            a: a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            b: a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            c: a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            d: a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        }
    }

    pub fn conj(&self) -> Self {
        Quaternion {
            a: self.a.clone(),
            b: -self.b.clone(),
            c: -self.c.clone(),
            d: -self.d.clone(),
        }
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a + &self.b * &self.b + &self.c * &self.c + &self.d * &self.d
    }

    pub fn inv(&self) -> Result<Self, Error> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let c = self.conj();
        Ok(Quaternion { a: c.a / &n, b: c.b / &n, c: c.c / &n, d: c.d / &n })
    }

    /// A rational quaternion of norm exactly 1: q²/N(q) for a random
    /// nonzero integer quaternion q.
    pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let q = Quaternion::from_ints(
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
                rng.gen_range(-3..=3),
            );
            if q.is_zero() {
                continue;
            }
            let n = q.norm();
            let sq = q.mul(&q);
            return Quaternion { a: sq.a / &n, b: sq.b / &n, c: sq.c / &n, d: sq.d / &n };
        }
    }
}

/// Dense quaternionic matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuatMatrix { rows, cols, data: vec![Quaternion::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QuatMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Quaternion::one());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Quaternion {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, q: Quaternion) {
        self.data[i * self.cols + j] = q;
    }

    pub fn mul(&self, rhs: &QuatMatrix) -> QuatMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = QuatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Quaternion::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(rhs.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    /// Conjugate transpose Ā^t.
    pub fn conj_transpose(&self) -> QuatMatrix {
        let mut out = QuatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, bound: i64) -> Self {
        let mut m = QuatMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(
                    i,
                    j,
                    Quaternion::from_ints(
                        rng.gen_range(-bound..=bound),
                        rng.gen_range(-bound..=bound),
                        rng.gen_range(-bound..=bound),
                        rng.gen_range(-bound..=bound),
                    ),
                );
            }
        }
        m
    }

    /// A random element of Sp(n): a product of unit-quaternion diagonals,
    /// permutations, and rational plane rotations, all of which preserve the
    /// quaternionic hermitian form exactly.
    pub fn random_symplectic<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let mut acc = QuatMatrix::identity(n);
        for _ in 0..3 {
            let mut diag = QuatMatrix::zeros(n, n);
            for i in 0..n {
                diag.set(i, i, Quaternion::random_unit(rng));
            }
            acc = acc.mul(&diag);
            if n >= 2 {
                // a 3-4-5 rotation in a random coordinate plane
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let mut rot = QuatMatrix::identity(n);
                let c = Quaternion {
                    a: BigRational::new(BigInt::from(3), BigInt::from(5)),
                    ..Quaternion::zero()
                };
                let s = Quaternion {
                    a: BigRational::new(BigInt::from(4), BigInt::from(5)),
                    ..Quaternion::zero()
                };
                rot.set(i, i, c.clone());
                rot.set(j, j, c);
                rot.set(i, j, s.clone());
                rot.set(j, i, s.neg());
                acc = acc.mul(&rot);
            }
        }
        acc
    }
}

fn complex_entry(re: BigRational, im: BigRational) -> FieldElement {
    FieldElement { re: Q2::from_rational(re), im: Q2::from_rational(im) }
}

/// The complex realization: q = a + bi + cj + dk becomes the 2×2 block
/// [[a+bi, −c−di], [c−di, a−bi]], applied blockwise to matrices.
pub fn tau_embed(m: &QuatMatrix) -> Matrix {
    let mut out = Matrix::zeros(2 * m.rows(), 2 * m.cols());
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            let q = m.get(r, c);
            out.set(2 * r, 2 * c, complex_entry(q.a.clone(), q.b.clone()));
            out.set(2 * r, 2 * c + 1, complex_entry(-q.c.clone(), -q.d.clone()));
            out.set(2 * r + 1, 2 * c, complex_entry(q.c.clone(), -q.d.clone()));
            out.set(2 * r + 1, 2 * c + 1, complex_entry(q.a.clone(), -q.b.clone()));
        }
    }
    out
}

/// The symplectic form ϵ_{AB} as a 2n×2n matrix: block diagonal [[0,1],[−1,0]].
pub fn j_matrix(n: usize) -> Matrix {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for l in 0..n {
        j.set(2 * l, 2 * l + 1, FieldElement::one());
        j.set(2 * l + 1, 2 * l, FieldElement::from_int(-1));
    }
    j
}


/// Read a real covector ξ ∈ ℚ^{4n} as a quaternionic column:
/// ζ_l = ξ_{4l} + ξ_{4l+1} i + ξ_{4l+2} j + ξ_{4l+3} k.
pub fn covector_to_quaternions(xi: &[BigRational]) -> QuatMatrix {
    assert!(xi.len() % 4 == 0, "covector length must be a multiple of 4");
    let n = xi.len() / 4;
    let mut z = QuatMatrix::zeros(n, 1);
    for l in 0..n {
        z.set(
            l,
            0,
            Quaternion {
                a: xi[4 * l].clone(),
                b: xi[4 * l + 1].clone(),
                c: xi[4 * l + 2].clone(),
                d: xi[4 * l + 3].clone(),
            },
        );
    }
    z
}

/// A GL(n,ℍ) pair (P, M = P⁻¹) with M·ζ = e₀ for a nonzero quaternionic
/// column ζ. P has ζ as its first column and standard basis vectors
/// elsewhere, skipping the first coordinate where ζ is nonzero.
pub fn normalizing_pair(zeta: &QuatMatrix) -> Result<(QuatMatrix, QuatMatrix), Error> {
    assert_eq!(zeta.cols(), 1);
    let n = zeta.rows();
    let Some(l0) = (0..n).find(|&l| !zeta.get(l, 0).is_zero()) else {
        return Err(Error::DegenerateCovector);
    };
    let pivot_inv = zeta.get(l0, 0).inv().expect("pivot is nonzero");
    let others: Vec<usize> = (0..n).filter(|&l| l != l0).collect();
    let mut p = QuatMatrix::zeros(n, n);
    let mut m = QuatMatrix::zeros(n, n);
    for r in 0..n {
        p.set(r, 0, zeta.get(r, 0).clone());
    }
    for (j, &mj) in others.iter().enumerate() {
        p.set(mj, j + 1, Quaternion::one());
        m.set(j + 1, mj, Quaternion::one());
        m.set(j + 1, l0, zeta.get(mj, 0).mul(&pivot_inv).neg());
    }
    m.set(0, l0, pivot_inv);
    Ok((p, m))
}
