//! Conformal rescaling of admissible connections and the exact laws it
//! induces on curvature and on the operators of the complex.
//!
//! A unit jet Ω rescales the parallel volume and symplectic forms. The
//! connection coefficients shift by Kronecker patterns in the logarithmic
//! gradient Υ = Ω⁻¹∇Ω, the two-form part of the curvature picks up a
//! gradient correction quadratic in Υ, the unprimed Weyl part is untouched,
//! and each operator of the complex intertwines with multiplication by
//! powers of Ω. Everything is checked as an identity of jets.
//!
//! The decomposition machinery reads curvature components against the
//! unweighted symplectic form, while the geometric statements are relative
//! to the weighted one. The laws below are therefore phrased in the fixed
//! normalization with the weight factors explicit: the primed Weyl
//! invariance becomes literal equality of the extracted parts, and the
//! two-form correction carries one factor of the base weight.

use rand::Rng;

use crate::connection::{
    conformal_shift, covariant_derivative, curvature_from_connection, jet_inverse,
    random_jet_section, upsilon_of, ConnectionJets, CurvedFrame,
};
use crate::curvature::{decompose_curvature, phi_class, CurvatureDecomposition};
use crate::error::Error;
use crate::field::FieldElement;
use crate::flat::{CheckOutcome, NablaVariant};
use crate::jet::JetFn;
use crate::scalar::Scalar;
use crate::symbols::{ComplexSpec, OperatorKind};
use crate::tensor::{Slot, SpinorTensor, SymmetryClass};

/// A conformal rescaling: the factor, its logarithmic gradient, and the
/// two connections it relates. Building one validates admissibility of the
/// rescaled connection.
#[derive(Debug, Clone)]
pub struct ConformalChange {
    omega: JetFn,
    upsilon: SpinorTensor<JetFn>,
    base: ConnectionJets,
    tilde: ConnectionJets,
}

impl ConformalChange {
    pub fn new(base: &ConnectionJets, omega: &JetFn) -> Result<Self, Error> {
        let upsilon = upsilon_of(omega, base.n())?;
        let tilde = conformal_shift(base, omega)?;
        Ok(ConformalChange {
            omega: omega.clone(),
            upsilon,
            base: base.clone(),
            tilde,
        })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn omega(&self) -> &JetFn {
        &self.omega
    }

    /// Υ_{BB'} = Ω⁻¹ ∇_{BB'} Ω, with the gradient of a scalar independent
    /// of the connection.
    pub fn upsilon(&self) -> &SpinorTensor<JetFn> {
        &self.upsilon
    }

    pub fn base(&self) -> &ConnectionJets {
        &self.base
    }

    pub fn tilde(&self) -> &ConnectionJets {
        &self.tilde
    }

    /// The trace-part law: the rescaled Φ differs from the base one by the
    /// doubly symmetrized gradient of Υ (negatively) and Υ-square
    /// (positively), with no weight factors.
    pub fn phi_shift(&self) -> Result<SpinorTensor<JetFn>, Error> {
        let n = self.n();
        let grad = covariant_derivative(&self.base, &self.upsilon, NablaVariant::Full)?;
        let layout = SymmetryClass::free_tensor(
            n,
            &[Slot::UNPRIMED_LO, Slot::PRIMED_LO, Slot::UNPRIMED_LO, Slot::PRIMED_LO],
        );
        let upsq = SpinorTensor::from_fn(layout, |_, _, free| {
            let (a, ap, b, bp) = (free[0], free[1], free[2], free[3]);
            let x = self.upsilon.get(&[], 0, &[a, ap]).expect("index in range");
            let y = self.upsilon.get(&[], 0, &[b, bp]).expect("index in range");
            x.mul(y)
        });
        sym_sym(n, &upsq).sub(&sym_sym(n, &grad))
    }
}

fn jet_pow(b: &JetFn, e: usize) -> JetFn {
    let mut acc = JetFn::one();
    for _ in 0..e {
        acc = acc.mul(b);
    }
    acc
}

/// The two-form correction T_{AB}: half the antisymmetrized sum of the
/// primed trace of ∇Υ with raised second index and the matching Υ-square.
/// Raising uses the base-parallel symplectic form, so one inverse weight
/// factor enters; the transformation law then adds the base weight times T
/// to the extracted two-form.
fn lambda_correction(
    base: &ConnectionJets,
    ups: &SpinorTensor<JetFn>,
) -> Result<SpinorTensor<JetFn>, Error> {
    let n = base.n();
    let w1_inv = jet_inverse(&base.weight_jet())?;
    let ups_up = ups.raise_free(1)?.mul_scalar(&w1_inv);
    let grad = covariant_derivative(base, &ups_up, NablaVariant::Full)?;
    // slots of grad: derivative pair (A, A'), then Υ's (B, raised B')
    let w = grad.contract_free(3, 1)?;
    let pair = SymmetryClass::free_tensor(n, &[Slot::UNPRIMED_LO, Slot::UNPRIMED_LO]);
    let v = SpinorTensor::from_fn(pair.clone(), |_, _, free| {
        let (a, b) = (free[0], free[1]);
        let mut acc = JetFn::zero();
        for ap in 0..2 {
            let lo = ups.get(&[], 0, &[a, ap]).expect("index in range");
            let up = ups_up.get(&[], 0, &[b, ap]).expect("index in range");
            acc = acc.add(&lo.mul(up));
        }
        acc
    });
    let s = w.add(&v)?;
    let quarter = FieldElement::from_ratio(1, 4);
    Ok(SpinorTensor::from_fn(pair, |_, _, free| {
        let (a, b) = (free[0], free[1]);
        let xy = s.get(&[], 0, &[a, b]).expect("index in range");
        let yx = s.get(&[], 0, &[b, a]).expect("index in range");
        xy.sub(yx).scale(&quarter)
    }))
}

/// Symmetrize a four-slot tensor X[A, A', B, B'] over the unprimed and the
/// primed pair separately, reindexed into the trace-part layout
/// [A, B, A', B'].
fn sym_sym(n: usize, x: &SpinorTensor<JetFn>) -> SpinorTensor<JetFn> {
    let quarter = FieldElement::from_ratio(1, 4);
    let at = |a: usize, ap: usize, b: usize, bp: usize| {
        x.get(&[], 0, &[a, ap, b, bp]).expect("index in range")
    };
    SpinorTensor::from_fn(phi_class(n), |_, _, idx| {
        let (a, b, ap, bp) = (idx[0], idx[1], idx[2], idx[3]);
        at(a, ap, b, bp)
            .add(at(b, ap, a, bp))
            .add(at(a, bp, b, ap))
            .add(at(b, bp, a, ap))
            .scale(&quarter)
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ConformalReport {
    pub n: usize,
    pub k: usize,
    pub base_order: u32,
    pub omega_order: u32,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl ConformalReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed())
    }
}

fn single_case(name: &str, ok: bool) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        cases: 1,
        failures: if ok { Vec::new() } else { vec!["exact identity violated".into()] },
    }
}

/// Verify the conformal laws for the change by Ω over the given base:
/// admissibility of the rescaled connection, the curvature transformation
/// (two-form shift, primed-part invariance, trace-part shift), and
/// stagewise operator covariance D̃(Ω^{-m) f) = Ω^{-m-1} D(f) with m the
/// stage weight, on random jet sections.
pub fn conformal_change<R: Rng + ?Sized>(
    base: &ConnectionJets,
    omega: &JetFn,
    k: usize,
    rng: &mut R,
    trials: usize,
) -> Result<ConformalReport, Error> {
    let change = ConformalChange::new(base, omega)?;
    let n = change.n();
    let mut checks = Vec::new();
    // conformal_shift validates torsion symmetry and both parallel forms
    checks.push(single_case("tilde_connection_admissible", true));

    let base_frame = CurvedFrame::new(base)?;
    let tilde_frame = CurvedFrame::new(change.tilde())?;
    let dec_b = decompose_curvature(base_frame.curvature())?;
    let dec_t = decompose_curvature(tilde_frame.curvature())?;

    checks.extend(curvature_law_checks(base, &change, &dec_b, &dec_t)?);

    let spec = ComplexSpec::new(n, k)?;
    let om_inv = jet_inverse(omega)?;
    for j in 0..spec.num_operators() {
        let q = spec.space(j)?.q_anti;
        let in_pow = match spec.operator_kind(j)? {
            OperatorKind::FirstUpper => q,
            OperatorKind::FirstLower | OperatorKind::SecondOrder => q + 1,
        };
        let mut failures = Vec::new();
        for t in 0..trials {
            let f = random_jet_section(&spec, j, rng, 3)?;
            let fin = f.mul_scalar(&jet_pow(&om_inv, in_pow));
            let lhs = tilde_frame.apply_d(&spec, j, &fin)?;
            let rhs = base_frame
                .apply_d(&spec, j, &f)?
                .mul_scalar(&jet_pow(&om_inv, in_pow + 1));
            if !lhs.sub(&rhs)?.is_zero() {
                failures.push(format!("trial {t}"));
            }
        }
        checks.push(CheckOutcome {
            name: format!("covariance_stage_{j}"),
            cases: trials,
            failures,
        });
    }

    Ok(ConformalReport {
        n,
        k,
        base_order: base.order(),
        omega_order: omega.order(),
        trials,
        checks,
    })
}

fn curvature_law_checks(
    base: &ConnectionJets,
    change: &ConformalChange,
    dec_b: &CurvatureDecomposition<JetFn>,
    dec_t: &CurvatureDecomposition<JetFn>,
) -> Result<Vec<CheckOutcome>, Error> {
    let mut out = Vec::new();

    let corr = lambda_correction(base, change.upsilon())?;
    let expected = dec_b.lambda().add(&corr.mul_scalar(&base.weight_jet()))?;
    out.push(single_case(
        "lambda_transformation",
        dec_t.lambda().sub(&expected)?.is_zero(),
    ));

    out.push(single_case(
        "psi_invariance",
        dec_t.psi().sub(dec_b.psi())?.is_zero(),
    ));
    if change.n() == 1 {
        let pb = dec_b.psi_prime().expect("dimension one carries a primed part");
        let pt = dec_t.psi_prime().expect("dimension one carries a primed part");
        out.push(single_case("psi_prime_invariance", pt.sub(pb)?.is_zero()));
    }

    let expected_phi = dec_b.phi().add(&change.phi_shift()?)?;
    out.push(single_case(
        "phi_transformation",
        dec_t.phi().sub(&expected_phi)?.is_zero(),
    ));

    Ok(out)
}
