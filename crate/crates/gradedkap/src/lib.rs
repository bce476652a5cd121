//! Exact symbolic computation on dg manifolds of the form (g[1], Q) built
//! from finite-dimensional L-infinity[1] algebras over the rationals.
//!
//! The engine computes the graded Poincare-Birkhoff-Witt map attached to a
//! torsion-free affine connection, Atiyah cocycles and classes, the Kapranov
//! bracket tower, the Fedosov connection form, and Chevalley-Eilenberg
//! cohomology, and verifies the recursive identities tying them together by
//! exact rational arithmetic.

pub mod ce;
pub mod chart;
pub mod connection;
pub mod diffop;
pub mod error;
pub mod fedosov;
pub mod function;
pub mod grading;
pub mod input;
pub mod kapranov;
pub mod linalg;
pub mod linfty;
pub mod pbw;
pub mod report;
pub mod scalar;
pub mod tensor;
pub mod vector_field;

pub use ce::{
    atiyah_class_is_zero, ce_cohomology, ce_differential, closed_form_lambda, identify_vf,
    CECochain, CEModule,
};
pub use chart::Chart;
pub use connection::{
    atiyah_cocycle, cq_apply, sym_cov_derivative, AtiyahCocycle, Connection, CurvatureTensor,
    OneTwoTensor,
};
pub use diffop::{DelMonomial, DiffOp};
pub use error::{Error, Result};
pub use fedosov::{a_nabla, b_via_a, homotopy_h, koszul_delta, FedosovA, TVForm, WedgeWord};
pub use function::{FormalFunction, Monomial};
pub use kapranov::{
    b_nabla, check_linfty, connection_compare, delta_nabla, extract_r, lambda, r_recursion,
    LInftyMorphism, RTower,
};
pub use linfty::{HomologicalVF, LInftySpec};
pub use pbw::{c_nabla, c_nabla_recursive, theorem1_check, PbwCtx};
pub use scalar::Scalar;
pub use tensor::{FrameWord, SymBundleMap, SymTensorField, TensorPairSum};
pub use vector_field::VectorField;
