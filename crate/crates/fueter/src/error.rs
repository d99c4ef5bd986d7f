//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the verification engine.
///
/// Mathematical check failures are not errors: verification routines return
/// reports. Errors are contract violations of the operations themselves.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero in the ground field")]
    DivisionByZero,
    #[error("jet inversion requires a nonzero constant term")]
    NonUnitJet,
    #[error("index out of range: {0}")]
    BadIndex(String),
    #[error("slot variance mismatch: {0}")]
    BadVariance(String),
    #[error("contraction slots have mismatched kinds: {0}")]
    BadContraction(String),
    #[error("symmetry class mismatch: {0}")]
    BadClass(String),
    #[error("zero covector: all symbols vanish")]
    DegenerateCovector,
    #[error("vector is not in the kernel of the symbol map")]
    NotInKernel,
    #[error("no preimage exists at the injectivity stage")]
    NoPreimage,
    #[error("stage out of range: {0}")]
    BadStage(String),
    #[error("curvature input violates antisymmetry or trace invariants: {0}")]
    BadCurvature(String),
    #[error("connection data violates an admissibility constraint: {0}")]
    BadConnection(String),
    #[error("decomposition input violates its symmetry invariants: {0}")]
    BadDecomposition(String),
    #[error("operation requires quaternionic Kähler curvature: {0}")]
    NotQuaternionicKahler(String),
    #[error("tensor slot mismatch: {0}")]
    BadSlots(String),
    #[error("dimension not supported: {0}")]
    UnsupportedDimension(String),
    #[error("jet order exhausted: {0}")]
    OrderUnderflow(String),
    #[error("conformal factor vanishes at the base point")]
    SingularConformalFactor,
    #[error("operation requires a different scalar backend: {0}")]
    UnsupportedBackend(String),
    #[error("input violates the lemma hypothesis: {0}")]
    BadHypothesis(String),
    #[error("invalid configuration: {0}")]
    ConfigError(String),
    #[error("i/o failure: {0}")]
    IoError(String),
}
