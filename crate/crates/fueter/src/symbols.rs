//! The symbol complexes: space lists, principal-symbol matrices, exactness
//! verification, and explicit preimage construction.
//!
//! For each n ≥ 1 and order k ≥ 0 the complex runs
//!   Λ^j E* ⊗ ⊙^{k−j} H*  for j = 0 .. min(k, 2n),
//! followed (when k ≤ 2n−2) by
//!   Λ^{k+2+m} E* ⊗ ⊙^m H  for m = 0 .. 2n−k−2.
//! The operator leaving space j is lower-type for j < k, the second-order
//! bridge at j = k, and upper-type for j > k. Extending the first family to
//! j = 2n when k ≥ 2n keeps the alternating dimension sum at zero.

use rand::Rng;

use crate::error::Error;
use crate::field::FieldElement;
use crate::frames::XiMatrix;
use crate::linalg::Matrix;
use crate::ops::{first_lower, first_upper, second_order, SymbolAction};
use crate::quat::{covector_to_quaternions, normalizing_pair, tau_embed};
use crate::tensor::{SpinorTensor, SymmetryClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    FirstLower,
    SecondOrder,
    FirstUpper,
}

/// The graded spaces of one complex.
#[derive(Debug, Clone)]
pub struct ComplexSpec {
    n: usize,
    k: usize,
    classes: Vec<SymmetryClass>,
}

impl ComplexSpec {
    pub fn new(n: usize, k: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::UnsupportedDimension(
                "quaternionic dimension must be positive".into(),
            ));
        }
        let mut classes = Vec::new();
        for j in 0..=k.min(2 * n) {
            classes.push(SymmetryClass::section(n, j, k - j, false)?);
        }
        if k + 2 <= 2 * n {
            for m in 0..=(2 * n - k - 2) {
                // the bare power Λ^{k+2} carries no primed block; the flag
                // matches what the second-order operator emits
                classes.push(SymmetryClass::section(n, k + 2 + m, m, m > 0)?);
            }
        }
        Ok(ComplexSpec { n, k, classes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_spaces(&self) -> usize {
        self.classes.len()
    }

    pub fn num_operators(&self) -> usize {
        self.classes.len() - 1
    }

    pub fn space(&self, j: usize) -> Result<&SymmetryClass, Error> {
        self.classes
            .get(j)
            .ok_or_else(|| Error::BadStage(format!("space index {} out of range", j)))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.classes.iter().map(|c| c.dim()).collect()
    }

    /// Alternating sum Σ (−1)^j dim V_j.
    pub fn euler_characteristic(&self) -> i64 {
        self.dims()
            .iter()
            .enumerate()
            .map(|(j, &d)| if j % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }

    /// The kind of the operator leaving space j.
    pub fn operator_kind(&self, j: usize) -> Result<OperatorKind, Error> {
        if j >= self.num_operators() {
            return Err(Error::BadStage(format!(
                "operator index {} out of range 0..{}",
                j,
                self.num_operators()
            )));
        }
        Ok(if j < self.k {
            OperatorKind::FirstLower
        } else if j == self.k {
            OperatorKind::SecondOrder
        } else {
            OperatorKind::FirstUpper
        })
    }

    /// Apply the normalized symbol σ_j(ξ) to a section of space j.
    pub fn apply_symbol(
        &self,
        j: usize,
        xi: &XiMatrix,
        f: &SpinorTensor<FieldElement>,
    ) -> Result<SpinorTensor<FieldElement>, Error> {
        if f.class() != self.space(j)? {
            return Err(Error::BadClass(format!("section does not lie in space {}", j)));
        }
        let action = SymbolAction::new(xi.clone());
        match self.operator_kind(j)? {
            OperatorKind::FirstLower => first_lower(&action, f),
            OperatorKind::SecondOrder => second_order(&action, f),
            OperatorKind::FirstUpper => first_upper(&action, f),
        }
    }

    /// Matrix of σ_j(ξ) in the canonical bases: dim V_{j+1} rows, dim V_j
    /// columns.
    pub fn sigma_matrix(&self, j: usize, xi: &XiMatrix) -> Result<Matrix, Error> {
        let src = self.space(j)?.clone();
        let dst_dim = self.space(j + 1)?.dim();
        let src_dim = src.dim();
        let mut out = Matrix::zeros(dst_dim, src_dim);
        for c in 0..src_dim {
            let mut basis = SpinorTensor::zero(src.clone());
            *basis.component_mut(c) = FieldElement::one();
            let image = self.apply_symbol(j, xi, &basis)?;
            for r in 0..dst_dim {
                if !image.component(r).is_zero() {
                    out.set(r, c, image.component(r).clone());
                }
            }
        }
        Ok(out)
    }
}

/// Rank data of one symbol sequence at a fixed nonzero covector.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ExactnessReport {
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    pub euler_characteristic: i64,
    pub compositions_vanish: bool,
    pub injective_start: bool,
    /// Exactness at the inner spaces V_1 … V_{N−1}.
    pub exact_inner: Vec<bool>,
    pub surjective_end: bool,
}

impl ExactnessReport {
    pub fn fully_exact(&self) -> bool {
        self.compositions_vanish
            && self.injective_start
            && self.surjective_end
            && self.exact_inner.iter().all(|&b| b)
            && self.euler_characteristic == 0
    }
}

/// Compute ranks of all σ_j(ξ) and check the complex property and exactness
/// by rank counting.
pub fn exactness_check(spec: &ComplexSpec, xi: &XiMatrix) -> Result<ExactnessReport, Error> {
    let dims = spec.dims();
    let mats: Vec<Matrix> = (0..spec.num_operators())
        .map(|j| spec.sigma_matrix(j, xi))
        .collect::<Result<_, _>>()?;
    let mut compositions_vanish = true;
    for w in mats.windows(2) {
        if !w[1].mul_mat(&w[0]).is_zero() {
            compositions_vanish = false;
        }
    }
    let ranks: Vec<usize> = mats.iter().map(|m| m.rank()).collect();
    let injective_start = ranks[0] == dims[0];
    let surjective_end = *ranks.last().unwrap() == *dims.last().unwrap();
    let exact_inner = (1..dims.len() - 1)
        .map(|j| ranks[j - 1] + ranks[j] == dims[j])
        .collect();
    Ok(ExactnessReport {
        dims,
        ranks,
        euler_characteristic: spec.euler_characteristic(),
        compositions_vanish,
        injective_start,
        exact_inner,
        surjective_end,
    })
}

/// A deterministic basis of ker σ_j(ξ) as sections of space j.
pub fn kernel_sections(
    spec: &ComplexSpec,
    j: usize,
    xi: &XiMatrix,
) -> Result<Vec<SpinorTensor<FieldElement>>, Error> {
    let mat = spec.sigma_matrix(j, xi)?;
    let class = spec.space(j)?.clone();
    mat.kernel_basis()
        .into_iter()
        .map(|v| SpinorTensor::from_components(class.clone(), v))
        .collect()
}

fn sorted_with(head: &[usize], tail: &[usize]) -> Vec<usize> {
    let mut v = Vec::with_capacity(head.len() + tail.len());
    v.extend_from_slice(head);
    v.extend_from_slice(tail);
    v
}

/// Preimage under σ_{j−1}(ξ) of a kernel vector v at space j, built in the
/// frame where ξ is normalized to the first coordinate covector and pulled
/// back. The result is verified to satisfy σ_{j−1}(ξ)Θ = v before it is
/// returned. Fails with NotInKernel when σ_j(v) ≠ 0 and with NoPreimage
/// when no preimage exists (j = 0 with v ≠ 0, or an inexact stage).
pub fn theta_preimage(
    spec: &ComplexSpec,
    j: usize,
    xi_covector: &[num_rational::BigRational],
    v: &SpinorTensor<FieldElement>,
) -> Result<SpinorTensor<FieldElement>, Error> {
    let xi = XiMatrix::from_covector(xi_covector)?;
    if v.class() != spec.space(j)? {
        return Err(Error::BadClass(format!("section does not lie in space {}", j)));
    }
    if j < spec.num_operators() && !spec.apply_symbol(j, &xi, v)?.is_zero() {
        return Err(Error::NotInKernel);
    }
    if j == 0 {
        return if v.is_zero() {
            Ok(SpinorTensor::zero(spec.space(0)?.clone()))
        } else {
            Err(Error::NoPreimage)
        };
    }

    // normalize ξ to the first coordinate covector via GL(n, ℍ)
    let zeta = covector_to_quaternions(xi_covector);
    let (p_mat, m_mat) = normalizing_pair(&zeta)?;
    let tau_m = tau_embed(&m_mat);
    let tau_p = tau_embed(&p_mat);
    let v_tilde = v.transform_unprimed_lower(&tau_m)?;

    let theta_tilde = match spec.operator_kind(j - 1)? {
        OperatorKind::FirstLower => preimage_lower(spec, j, &v_tilde)?,
        OperatorKind::SecondOrder => preimage_second_order(spec, j, &v_tilde)?,
        OperatorKind::FirstUpper => preimage_upper(spec, j, &v_tilde)?,
    };
    let theta = theta_tilde.transform_unprimed_lower(&tau_p)?;

    if !spec.apply_symbol(j - 1, &xi, &theta)?.sub(v)?.is_zero() {
        return Err(Error::NoPreimage);
    }
    Ok(theta)
}

/// Kernel vectors of the lower-type stage in the normalized frame have a
/// componentwise preimage: with Θ in Λ^{j−1} ⊗ ⊙^{k−j+1} H*,
///   Θ_{X,μ}  = j ṽ_{1X, μ∖0'}   when 0' ∈ μ   (X all ≥ 2)
///   Θ_{X,μ}  = −j ṽ_{0X, μ∖1'}  when μ = 1'…1'
///   Θ_{1Y,μ} = −j ṽ_{01Y, μ∖1'} when 1' ∈ μ, else 0
///   Θ_{0Y,·} = 0.
fn preimage_lower(
    spec: &ComplexSpec,
    j: usize,
    vt: &SpinorTensor<FieldElement>,
) -> Result<SpinorTensor<FieldElement>, Error> {
    let class = spec.space(j - 1)?.clone();
    let p_src = class.p_sym;
    let jf = FieldElement::from_int(j as i64);
    let mut theta = SpinorTensor::zero(class.clone());
    for ord in 0..theta.dim() {
        let (x, ones, _) = class.tuple_of(ord);
        let value = if x.first().is_none_or(|&a| a >= 2) {
            if ones < p_src {
                vt.get(&sorted_with(&[1], &x), ones, &[])?.mul(&jf)
            } else {
                vt.get(&sorted_with(&[0], &x), ones - 1, &[])?.mul(&jf).neg()
            }
        } else if x[0] == 1 && ones > 0 {
            vt.get(&sorted_with(&[0], &x), ones - 1, &[])?.mul(&jf).neg()
        } else {
            FieldElement::zero()
        };
        *theta.component_mut(ord) = value;
    }
    Ok(theta)
}

/// Kernel vectors after the second-order stage are supported on tuples
/// containing {0,1}; ϑ_Y = ((k+2)(k+1)/2) ṽ_{01Y} inverts the bridge.
fn preimage_second_order(
    spec: &ComplexSpec,
    j: usize,
    vt: &SpinorTensor<FieldElement>,
) -> Result<SpinorTensor<FieldElement>, Error> {
    let class = spec.space(j - 1)?.clone();
    let k = spec.k();
    let factor = FieldElement::from_ratio((((k + 2) * (k + 1)) / 2) as i64, 1);
    let mut theta = SpinorTensor::zero(class.clone());
    for ord in 0..theta.dim() {
        let (y, _, _) = class.tuple_of(ord);
        if y.first().is_none_or(|&a| a >= 2) {
            let tuple = sorted_with(&[0, 1], &y);
            *theta.component_mut(ord) = vt.get(&tuple, 0, &[])?.mul(&factor);
        }
    }
    Ok(theta)
}

/// Upper-type stage with source Λ^q ⊗ ⊙^p H, q = j, p = j−k−2, block λ with
/// d ones:
///   θ_X^λ  = −((q+1)(p+1)/(d+1)) ṽ_{0X}^{λ∪1'}    (X all ≥ 2)
///   θ_{1Y}^λ = −((q+1)(p+1)/(d+1)) ṽ_{01Y}^{λ∪1'}
///   θ_{0Y}^{0'…0'} = −(q+1) ṽ_{01Y}^{0'…0'}, other θ_{0Y} = 0.
fn preimage_upper(
    spec: &ComplexSpec,
    j: usize,
    vt: &SpinorTensor<FieldElement>,
) -> Result<SpinorTensor<FieldElement>, Error> {
    let class = spec.space(j - 1)?.clone();
    let q = class.q_anti;
    let p = class.p_sym;
    let mut theta = SpinorTensor::zero(class.clone());
    for ord in 0..theta.dim() {
        let (a, d, _) = class.tuple_of(ord);
        let value = if a.first().is_none_or(|&x| x >= 2) {
            let c = FieldElement::from_ratio(((q + 1) * (p + 1)) as i64, (d + 1) as i64);
            vt.get(&sorted_with(&[0], &a), d + 1, &[])?.mul(&c).neg()
        } else if a[0] == 1 {
            let c = FieldElement::from_ratio(((q + 1) * (p + 1)) as i64, (d + 1) as i64);
            vt.get(&sorted_with(&[0], &a), d + 1, &[])?.mul(&c).neg()
        } else if d == 0 {
            // tuple starts with 0 and the block is all 0'; a repeat of the
            // inserted 1 reads as zero
            let tuple = sorted_with(&[0, 1], &a[1..]);
            vt.read_full(&tuple, &vec![0; p + 1], &[])?
                .mul(&FieldElement::from_int((q + 1) as i64))
                .neg()
        } else {
            FieldElement::zero()
        };
        *theta.component_mut(ord) = value;
    }
    Ok(theta)
}

/// Random integer covector avoiding zero, as exact rationals.
pub fn sample_covector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<num_rational::BigRational> {
    crate::frames::random_covector(rng, n, 5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn frozen_dimension_tables() {
        let cases: &[(usize, usize, &[usize])] = &[
            (2, 0, &[1, 6, 8, 3]),
            (2, 1, &[2, 4, 4, 2]),
            (2, 2, &[3, 8, 6, 1]),
            (2, 3, &[4, 12, 12, 4]),
            (2, 4, &[5, 16, 18, 8, 1]),
            (3, 0, &[1, 15, 40, 45, 24, 5]),
            (3, 3, &[4, 18, 30, 20, 6, 2]),
        ];
        for &(n, k, dims) in cases {
            let spec = ComplexSpec::new(n, k).unwrap();
            assert_eq!(spec.dims(), dims, "n={} k={}", n, k);
        }
    }

    #[test]
    fn euler_characteristic_vanishes() {
        for n in 1..=3 {
            for k in 0..=4 {
                let spec = ComplexSpec::new(n, k).unwrap();
                assert_eq!(spec.euler_characteristic(), 0, "n={} k={}", n, k);
            }
        }
    }

    #[test]
    fn operator_kinds_along_the_complex() {
        let spec = ComplexSpec::new(2, 1).unwrap();
        assert_eq!(spec.operator_kind(0).unwrap(), OperatorKind::FirstLower);
        assert_eq!(spec.operator_kind(1).unwrap(), OperatorKind::SecondOrder);
        assert_eq!(spec.operator_kind(2).unwrap(), OperatorKind::FirstUpper);
        assert!(matches!(spec.operator_kind(3), Err(Error::BadStage(_))));
        // k = 2n−1: lower-type all the way
        let spec = ComplexSpec::new(2, 3).unwrap();
        for j in 0..spec.num_operators() {
            assert_eq!(spec.operator_kind(j).unwrap(), OperatorKind::FirstLower);
        }
        // k ≥ 2n: still a complex of lower-type operators
        let spec = ComplexSpec::new(1, 3).unwrap();
        assert_eq!(spec.dims(), vec![4, 6, 2]);
        assert_eq!(spec.num_operators(), 2);
    }

    #[test]
    fn symbol_sequences_are_exact() {
        let mut rng = ChaCha20Rng::seed_from_u64(51);
        for (n, k) in [(1, 1), (1, 2), (2, 0), (2, 1), (2, 2), (2, 3)] {
            let spec = ComplexSpec::new(n, k).unwrap();
            for _ in 0..3 {
                let xi_cov = sample_covector(&mut rng, n);
                let xi = XiMatrix::from_covector(&xi_cov).unwrap();
                let report = exactness_check(&spec, &xi).unwrap();
                assert!(report.fully_exact(), "n={} k={} report={:?}", n, k, report);
            }
        }
    }

    #[test]
    fn preimages_on_full_kernel_bases() {
        let mut rng = ChaCha20Rng::seed_from_u64(52);
        for (n, k) in [(1, 2), (2, 0), (2, 1), (2, 2)] {
            let spec = ComplexSpec::new(n, k).unwrap();
            let xi_cov = sample_covector(&mut rng, n);
            let xi = XiMatrix::from_covector(&xi_cov).unwrap();
            for j in 1..spec.num_spaces() {
                let vs = if j < spec.num_operators() {
                    kernel_sections(&spec, j, &xi).unwrap()
                } else {
                    // last space: everything is a kernel vector
                    (0..3)
                        .map(|_| {
                            SpinorTensor::random(spec.space(j).unwrap().clone(), &mut rng, 4)
                        })
                        .collect()
                };
                for v in vs {
                    let theta = theta_preimage(&spec, j, &xi_cov, &v).unwrap();
                    let image = spec.apply_symbol(j - 1, &xi, &theta).unwrap();
                    assert_eq!(image, v, "n={} k={} stage {}", n, k, j);
                }
            }
        }
    }

    #[test]
    fn preimage_error_paths() {
        let mut rng = ChaCha20Rng::seed_from_u64(53);
        let spec = ComplexSpec::new(2, 1).unwrap();
        let xi_cov = sample_covector(&mut rng, 2);
        // the start of the sequence is injective, so a nonzero vector there
        // already fails the kernel test
        let mut v0 = SpinorTensor::zero(spec.space(0).unwrap().clone());
        *v0.component_mut(0) = FieldElement::one();
        assert!(matches!(
            theta_preimage(&spec, 0, &xi_cov, &v0),
            Err(Error::NotInKernel)
        ));
        let z0 = SpinorTensor::zero(spec.space(0).unwrap().clone());
        assert!(theta_preimage(&spec, 0, &xi_cov, &z0).unwrap().is_zero());
        // a random vector is almost surely not in the kernel
        let xi = XiMatrix::from_covector(&xi_cov).unwrap();
        let v = loop {
            let cand = SpinorTensor::random(spec.space(1).unwrap().clone(), &mut rng, 4);
            if !spec.apply_symbol(1, &xi, &cand).unwrap().is_zero() {
                break cand;
            }
        };
        assert!(matches!(
            theta_preimage(&spec, 1, &xi_cov, &v),
            Err(Error::NotInKernel)
        ));
    }
}
