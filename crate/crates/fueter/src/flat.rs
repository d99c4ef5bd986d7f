//! Operators of the complexes on flat quaternionic space: the frame
//! derivations Z_{AA'} acting on exact scalar backends, the stage dispatch
//! D_j, verification that consecutive operators compose to zero, and a
//! Fourier-mode cohomology count on the flat torus.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::Error;
use crate::field::FieldElement;
use crate::frames::{z_apply, XiMatrix};
use crate::linalg::{gauss_rank_i128, GaussInt};
use crate::ops::{first_lower, first_upper, nabla_class, second_order, Nabla};
use crate::poly::PolynomialFn;
use crate::scalar::Scalar;
use crate::symbols::{ComplexSpec, OperatorKind};
use crate::tensor::SpinorTensor;
use crate::trig::TrigPolynomialFn;

/// The flat frame: ∇_{AA'} = Z_{AA'} with commuting derivations and zero
/// curvature.
#[derive(Debug, Clone, Copy)]
pub struct FlatFrame {
    n: usize,
}

impl FlatFrame {
    pub fn new(n: usize) -> Self {
        FlatFrame { n }
    }
}

impl<S: Scalar> Nabla<S> for FlatFrame {
    fn n(&self) -> usize {
        self.n
    }

    fn nabla(&self, f: &SpinorTensor<S>) -> Result<SpinorTensor<S>, Error> {
        let class = nabla_class(f.class());
        Ok(SpinorTensor::from_fn(class, |anti, ones, free| {
            let entry = f.get(anti, ones, &free[2..]).expect("index shapes match");
            z_apply(entry, free[0], free[1])
        }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NablaVariant {
    /// ∇f with the two fresh slots left free.
    Full,
    /// ∇̂f: the fresh unprimed index antisymmetrized into the block.
    Antisym,
}

/// Flat covariant derivative of a section-like tensor.
pub fn flat_nabla<S: Scalar>(
    n: usize,
    f: &SpinorTensor<S>,
    variant: NablaVariant,
) -> Result<SpinorTensor<S>, Error> {
    let frame = FlatFrame::new(n);
    let g = frame.nabla(f)?;
    match variant {
        NablaVariant::Full => Ok(g),
        NablaVariant::Antisym => g.anti_into_block(0),
    }
}

/// Apply the stage-j operator of the flat complex.
pub fn apply_d<S: Scalar>(
    spec: &ComplexSpec,
    j: usize,
    f: &SpinorTensor<S>,
) -> Result<SpinorTensor<S>, Error> {
    if f.class() != spec.space(j)? {
        return Err(Error::BadClass(format!("section does not lie in space {}", j)));
    }
    let frame = FlatFrame::new(spec.n());
    match spec.operator_kind(j)? {
        OperatorKind::FirstLower => first_lower(&frame, f),
        OperatorKind::SecondOrder => second_order(&frame, f),
        OperatorKind::FirstUpper => first_upper(&frame, f),
    }
}

/// A section of the complex: a stage index and a tensor in that stage's
/// class.
#[derive(Debug, Clone)]
pub struct Section<S: Scalar> {
    stage: usize,
    tensor: SpinorTensor<S>,
}

impl<S: Scalar> Section<S> {
    pub fn new(spec: &ComplexSpec, stage: usize, tensor: SpinorTensor<S>) -> Result<Self, Error> {
        if tensor.class() != spec.space(stage)? {
            return Err(Error::BadClass(format!(
                "tensor class does not match space {}",
                stage
            )));
        }
        Ok(Section { stage, tensor })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn tensor(&self) -> &SpinorTensor<S> {
        &self.tensor
    }

    pub fn apply_d(&self, spec: &ComplexSpec) -> Result<Section<S>, Error> {
        Ok(Section { stage: self.stage + 1, tensor: apply_d(spec, self.stage, &self.tensor)? })
    }
}

/// Random polynomial section at a stage: sparse integer coefficients in
/// [−3, 3], reproducible from the generator.
pub fn random_polynomial_section<R: Rng + ?Sized>(
    spec: &ComplexSpec,
    stage: usize,
    rng: &mut R,
    degree: u32,
) -> Result<Section<PolynomialFn>, Error> {
    let class = spec.space(stage)?.clone();
    let coords = 4 * spec.n();
    let tensor = SpinorTensor::from_fn(class, |_, _, _| {
        PolynomialFn::random(rng, coords, degree, 5, 3)
    });
    Section::new(spec, stage, tensor)
}

/// The distinguished degree-one kernel element of the first-order system at
/// k = 1: the pair (x₀ + i x₁, x₂ + i x₃) in the first quaternionic block.
pub fn one_regular_pair(spec: &ComplexSpec) -> Result<Section<PolynomialFn>, Error> {
    if spec.k() != 1 {
        return Err(Error::BadStage("the distinguished pair lives at k = 1".into()));
    }
    let class = spec.space(0)?.clone();
    let i = FieldElement::i();
    let lin = |a: usize, b: usize| {
        PolynomialFn::var(a).add(&PolynomialFn::var(b).scale(&i))
    };
    let mut tensor = SpinorTensor::zero(class);
    *tensor.component_mut(0) = lin(0, 1); // the all-0' component
    *tensor.component_mut(1) = lin(2, 3); // the 1' component
    Section::new(spec, 0, tensor)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct FlatComplexReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub degree: u32,
    pub checks: Vec<CheckOutcome>,
}

impl FlatComplexReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

/// Verify that the flat sequence is a complex: every junction D_{j+1} ∘ D_j
/// annihilates random polynomial sections, constants die at every stage, the
/// distinguished kernel pair is annihilated at k = 1, and on single Fourier
/// modes each operator agrees with its symbol matrix.
pub fn verify_flat_complex<R: Rng + ?Sized>(
    spec: &ComplexSpec,
    rng: &mut R,
    trials: usize,
    degree: u32,
) -> Result<FlatComplexReport, Error> {
    let mut checks = Vec::new();

    // junctions
    for j in 0..spec.num_operators() - 1 {
        let mut failures = Vec::new();
        for t in 0..trials {
            let f = random_polynomial_section(spec, j, rng, degree)?;
            let once = f.apply_d(spec)?;
            let twice = once.apply_d(spec)?;
            if !twice.tensor().is_zero() {
                failures.push(format!("trial {}: composition at stages {}/{} nonzero", t, j, j + 1));
            }
        }
        checks.push(CheckOutcome {
            name: format!("composite_vanishes_{}_{}", j, j + 1),
            cases: trials,
            failures,
        });
    }

    // constants are annihilated at every stage
    {
        let mut failures = Vec::new();
        for j in 0..spec.num_operators() {
            let class = spec.space(j)?.clone();
            let f = SpinorTensor::from_fn(class, |_, _, _| {
                PolynomialFn::constant(&FieldElement::from_int(7))
            });
            if !apply_d(spec, j, &f)?.is_zero() {
                failures.push(format!("stage {}: constant section not annihilated", j));
            }
        }
        checks.push(CheckOutcome {
            name: "constants_annihilated".into(),
            cases: spec.num_operators(),
            failures,
        });
    }

    // the distinguished degree-one kernel element
    if spec.k() == 1 {
        let f = one_regular_pair(spec)?;
        let failures = if f.apply_d(spec)?.tensor().is_zero() {
            Vec::new()
        } else {
            vec!["distinguished pair not annihilated".into()]
        };
        checks.push(CheckOutcome { name: "distinguished_pair_in_kernel".into(), cases: 1, failures });
    }

    // single Fourier modes: D equals the symbol matrix action, with factor
    // i/√2 per derivative order
    {
        let mut failures = Vec::new();
        let mut cases = 0;
        let mode: Vec<i64> =
            (0..4 * spec.n()).map(|c| [1, -2, 0, 3, 1, 0, -1, 2][c % 8] + (c / 8) as i64).collect();
        let xi = XiMatrix::from_ints(&mode)?;
        let mode32: Vec<i32> = mode.iter().map(|&x| x as i32).collect();
        for j in 0..spec.num_operators() {
            cases += 1;
            let class = spec.space(j)?.clone();
            let coeffs = SpinorTensor::<FieldElement>::random(class.clone(), rng, 3);
            let f = SpinorTensor::from_components(
                class,
                coeffs.components().iter().map(|c| TrigPolynomialFn::mode_with(&mode32, c)).collect(),
            )?;
            let image = apply_d(spec, j, &f)?;
            let factor = match spec.operator_kind(j)? {
                OperatorKind::SecondOrder => {
                    FieldElement::from_ratio(-1, 2)
                }
                _ => FieldElement::i().mul(&FieldElement::inv_sqrt2()),
            };
            let expected_vec = spec
                .sigma_matrix(j, &xi)?
                .mul_vec(coeffs.components())
                .into_iter()
                .map(|w| TrigPolynomialFn::mode_with(&mode32, &w.mul(&factor)))
                .collect::<Vec<_>>();
            let expected =
                SpinorTensor::from_components(spec.space(j + 1)?.clone(), expected_vec)?;
            if image != expected {
                failures.push(format!("stage {}: mode action differs from symbol matrix", j));
            }
        }
        checks.push(CheckOutcome { name: "symbol_consistency_on_modes".into(), cases, failures });
    }

    Ok(FlatComplexReport { n: spec.n(), k: spec.k(), trials, degree, checks })
}

/// One symbol matrix with entries polynomial in the mode covector, with
/// denominators cleared row by row and Gaussian-integer coefficients.
struct IntPolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<(Vec<u8>, i128, i128)>>,
}

/// ξ-multiplication with the covector entries kept symbolic, so one pipeline
/// run yields the symbol matrix for every mode at once.
struct ModeSymbol {
    n: usize,
    lower: Vec<[PolynomialFn; 2]>,
}

impl ModeSymbol {
    fn new(n: usize) -> Self {
        let i = FieldElement::i();
        let mut lower = Vec::with_capacity(2 * n);
        for l in 0..n {
            let v = |c: usize| PolynomialFn::var(4 * l + c);
            let vi = |c: usize| PolynomialFn::var(4 * l + c).scale(&i);
            lower.push([v(0).add(&vi(1)), v(2).neg().sub(&vi(3))]);
            lower.push([v(2).sub(&vi(3)), v(0).sub(&vi(1))]);
        }
        ModeSymbol { n, lower }
    }
}

impl Nabla<PolynomialFn> for ModeSymbol {
    fn n(&self) -> usize {
        self.n
    }

    fn nabla(&self, f: &SpinorTensor<PolynomialFn>) -> Result<SpinorTensor<PolynomialFn>, Error> {
        let class = nabla_class(f.class());
        Ok(SpinorTensor::from_fn(class, |anti, ones, free| {
            let entry = f.get(anti, ones, &free[2..]).expect("index shapes match");
            entry.mul(&self.lower[free[0]][free[1]])
        }))
    }
}

impl IntPolyMatrix {
    /// Build the symbolic stage-j symbol matrix.
    fn for_stage(spec: &ComplexSpec, j: usize) -> Result<Self, Error> {
        let action = ModeSymbol::new(spec.n());
        let src = spec.space(j)?.clone();
        let rows = spec.space(j + 1)?.dim();
        let cols = src.dim();
        let mut symbolic = vec![Vec::new(); rows * cols];
        for c in 0..cols {
            let mut basis = SpinorTensor::zero(src.clone());
            *basis.component_mut(c) = PolynomialFn::constant(&FieldElement::one());
            let image = match spec.operator_kind(j)? {
                OperatorKind::FirstLower => first_lower(&action, &basis)?,
                OperatorKind::SecondOrder => second_order(&action, &basis)?,
                OperatorKind::FirstUpper => first_upper(&action, &basis)?,
            };
            for r in 0..rows {
                let poly = image.component(r);
                let terms: Vec<(Vec<u8>, FieldElement)> =
                    poly.terms.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                symbolic[r * cols + c] = terms;
            }
        }
        // clear denominators one row at a time; scaling a row keeps the rank
        let mut entries = vec![Vec::new(); rows * cols];
        for r in 0..rows {
            let mut lcm = num_bigint::BigInt::one();
            for c in 0..cols {
                for (_, v) in &symbolic[r * cols + c] {
                    assert!(
                        v.re.b.is_zero() && v.im.b.is_zero(),
                        "symbol entries must be rational Gaussian"
                    );
                    lcm = lcm.lcm(v.re.a.denom());
                    lcm = lcm.lcm(v.im.a.denom());
                }
            }
            for c in 0..cols {
                entries[r * cols + c] = symbolic[r * cols + c]
                    .iter()
                    .map(|(k, v)| {
                        let re = (v.re.a.numer() * &lcm / v.re.a.denom())
                            .to_i128()
                            .expect("cleared coefficient fits in i128");
                        let im = (v.im.a.numer() * &lcm / v.im.a.denom())
                            .to_i128()
                            .expect("cleared coefficient fits in i128");
                        (k.clone(), re, im)
                    })
                    .collect();
            }
        }
        Ok(IntPolyMatrix { rows, cols, entries })
    }

    fn eval_into(&self, mode: &[i64], buf: &mut [GaussInt]) {
        for (slot, terms) in buf.iter_mut().zip(&self.entries) {
            let mut re: i128 = 0;
            let mut im: i128 = 0;
            for (exps, tre, tim) in terms {
                let mut v: i128 = 1;
                for (c, &e) in exps.iter().enumerate() {
                    for _ in 0..e {
                        v *= mode[c] as i128;
                    }
                }
                if v != 0 {
                    re += tre * v;
                    im += tim * v;
                }
            }
            *slot = GaussInt::new(re, im);
        }
    }
}

/// Cohomology of the flat-torus complex computed mode by mode: for every
/// Fourier mode m with |m|∞ ≤ mode_bound the contribution to H^j is
/// dim ker σ_j(m) − rank σ_{j−1}(m); the zero mode contributes the full
/// fiber dimension.
pub fn torus_cohomology(spec: &ComplexSpec, mode_bound: i64) -> Result<Vec<usize>, Error> {
    if mode_bound < 1 {
        return Err(Error::ConfigError("mode bound must be at least 1".into()));
    }
    let dims = spec.dims();
    let num_ops = spec.num_operators();
    let mats: Vec<IntPolyMatrix> =
        (0..num_ops).map(|j| IntPolyMatrix::for_stage(spec, j)).collect::<Result<_, _>>()?;
    let mut bufs: Vec<Vec<GaussInt>> =
        mats.iter().map(|m| vec![GaussInt::new(0, 0); m.rows * m.cols]).collect();

    let coords = 4 * spec.n();
    let mut mode = vec![-mode_bound; coords];
    let mut h = vec![0usize; dims.len()];
    let mut ranks = vec![0usize; num_ops];
    loop {
        for (j, m) in mats.iter().enumerate() {
            m.eval_into(&mode, &mut bufs[j]);
            ranks[j] = gauss_rank_i128(m.rows, m.cols, &mut bufs[j]);
        }
        for j in 0..dims.len() {
            let r_out = if j < num_ops { ranks[j] } else { 0 };
            let r_in = if j > 0 { ranks[j - 1] } else { 0 };
            h[j] += dims[j] - r_out - r_in;
        }
        // odometer over the mode box
        let mut c = 0;
        loop {
            if c == coords {
                return Ok(h);
            }
            mode[c] += 1;
            if mode[c] <= mode_bound {
                break;
            }
            mode[c] = -mode_bound;
            c += 1;
        }
    }
}
