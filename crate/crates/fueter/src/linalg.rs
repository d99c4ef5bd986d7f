//! Exact linear algebra over ℚ(i,√2).
//!
//! Division-based Gauss-Jordan elimination with first-nonzero pivoting keeps
//! ranks, kernels, and solutions fully deterministic. A separate
//! fraction-free path over Gaussian integers in i128 handles the large
//! per-mode rank sweeps where arbitrary-precision rationals would dominate
//! the runtime.

use crate::field::FieldElement;

/// Dense row-major matrix over the ground field.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![FieldElement::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                let mut acc = FieldElement::zero();
                for j in 0..self.cols {
                    let a = self.get(i, j);
                    if !a.is_zero() && !v[j].is_zero() {
                        acc = acc.add(&a.mul(&v[j]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn mul_mat(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// In-place reduced row echelon form; returns the pivot columns in order.
    /// Pivots are the first nonzero entry in each column sweep, so the result
    /// is deterministic.
    fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..self.cols {
                    self.data.swap(r * self.cols + j, p * self.cols + j);
                }
            }
            let inv = self.get(r, c).inv().expect("pivot is nonzero");
            for j in c..self.cols {
                let v = self.get(r, j).mul(&inv);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let factor = self.get(i, c).clone();
                for j in c..self.cols {
                    let v = self.get(i, j).sub(&factor.mul(self.get(r, j)));
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref_in_place().len()
    }

    /// Deterministic kernel basis: one vector per free column, in increasing
    /// column order, with a 1 in the free slot.
    pub fn kernel_basis(&self) -> Vec<Vec<FieldElement>> {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![FieldElement::zero(); self.cols];
            v[free] = FieldElement::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = m.get(row, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    pub fn nullity(&self) -> usize {
        self.cols - self.rank()
    }

    /// Determinant by elimination with row swaps; zero for singular input.
    pub fn det(&self) -> FieldElement {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let mut m = self.clone();
        let n = self.rows;
        let mut det = FieldElement::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return FieldElement::zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(c * n + j, p * n + j);
                }
                det = det.neg();
            }
            let pivot = m.get(c, c).clone();
            det = det.mul(&pivot);
            let inv = pivot.inv().expect("pivot is nonzero");
            for i in (c + 1)..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let factor = m.get(i, c).mul(&inv);
                for j in c..n {
                    let v = m.get(i, j).sub(&factor.mul(m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// A particular solution of `self · x = rhs` with all free variables set
    /// to zero, or None when the system is inconsistent.
    pub fn solve(&self, rhs: &[FieldElement]) -> Option<Vec<FieldElement>> {
        assert_eq!(rhs.len(), self.rows, "rhs length mismatch");
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, rhs[i].clone());
        }
        let pivots = aug.rref_in_place();
        if pivots.last() == Some(&self.cols) {
            return None; // a row reduces to 0 = 1
        }
        let mut x = vec![FieldElement::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            x[pc] = aug.get(row, self.cols).clone();
        }
        Some(x)
    }
}

/// Gaussian integer with i128 components, for the fraction-free rank path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GaussInt {
    pub re: i128,
    pub im: i128,
}

impl GaussInt {
    pub fn new(re: i128, im: i128) -> Self {
        GaussInt { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    fn mul(self, rhs: Self) -> Self {
        let re = self
            .re
            .checked_mul(rhs.re)
            .and_then(|a| self.im.checked_mul(rhs.im).and_then(|b| a.checked_sub(b)));
        let im = self
            .re
            .checked_mul(rhs.im)
            .and_then(|a| self.im.checked_mul(rhs.re).and_then(|b| a.checked_add(b)));
        GaussInt {
            re: re.expect("Gaussian-integer overflow"),
            im: im.expect("Gaussian-integer overflow"),
        }
    }

    fn sub(self, rhs: Self) -> Self {
        GaussInt {
            re: self.re.checked_sub(rhs.re).expect("Gaussian-integer overflow"),
            im: self.im.checked_sub(rhs.im).expect("Gaussian-integer overflow"),
        }
    }

    /// Exact division; the fraction-free elimination guarantees divisibility.
    fn div_exact(self, rhs: Self) -> Self {
        let norm = rhs
            .re
            .checked_mul(rhs.re)
            .and_then(|a| rhs.im.checked_mul(rhs.im).and_then(|b| a.checked_add(b)))
            .expect("Gaussian-integer overflow");
        assert!(norm != 0, "division by zero");
        let num = self.mul(GaussInt { re: rhs.re, im: -rhs.im });
        assert!(
            num.re % norm == 0 && num.im % norm == 0,
            "inexact Gaussian-integer division"
        );
        GaussInt { re: num.re / norm, im: num.im / norm }
    }
}

/// Rank of a row-major Gaussian-integer matrix by fraction-free (Bareiss)
/// elimination. `data` is modified in place; entries must fit the growth of
/// the minors in i128, which holds for the small per-mode symbol matrices
/// this path is used on.
pub fn gauss_rank_i128(rows: usize, cols: usize, data: &mut [GaussInt]) -> usize {
    assert_eq!(data.len(), rows * cols);
    let mut prev = GaussInt::new(1, 0);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !data[i * cols + c].is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                data.swap(r * cols + j, p * cols + j);
            }
        }
        let pivot = data[r * cols + c];
        for i in (r + 1)..rows {
            let head = data[i * cols + c];
            for j in (c + 1)..cols {
                let v = pivot.mul(data[i * cols + j]).sub(head.mul(data[r * cols + j]));
                data[i * cols + j] = v.div_exact(prev);
            }
            data[i * cols + c] = GaussInt::default();
        }
        prev = pivot;
        r += 1;
    }
    r
}
