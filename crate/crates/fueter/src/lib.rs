//! Exact-arithmetic verification engine for k-Cauchy-Fueter complexes on
//! quaternionic manifolds in two-spinor form.
//!
//! Everything is computed over the exact field ℚ(i,√2): symbol sequences of
//! the complexes and their exactness, the flat differential complexes on
//! polynomial and Fourier sections, curvature decomposition and Bianchi-type
//! identities, conformal covariance, formal adjoints on the torus, and the
//! Weitzenböck decomposition ingredients. There are no floating-point numbers
//! and no tolerances; every check is an equality in the field.

pub mod error;
pub mod field;
pub mod scalar;
pub mod poly;
pub mod jet;
pub mod trig;
pub mod linalg;
pub mod tensor;
pub mod quat;
pub mod frames;
pub mod ops;
pub mod symbols;
pub mod curvature;
pub mod flat;
pub mod conformal;
pub mod connection;
pub mod adjoint;

pub use error::Error;
pub use field::FieldElement;
pub use scalar::Scalar;
