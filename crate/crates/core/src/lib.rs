//! Rank, border rank and orbit classification of small real tensors, with
//! generators for rank-jumping sequences and weak low-rank approximation.
//!
//! Generic routines run over `f64` or exact rationals ([`Rational`]); pick the
//! latter whenever a zero test must be decisive.

pub mod approx;
pub mod constructions;
pub mod error;
pub mod io;
pub mod linalg;
pub mod rank222;
pub mod scalar;
pub mod tensor;

pub use error::{Result, TensorError};
pub use linalg::Matrix;
pub use rank222::{
    classify222, classify_general, delta, delta_extended, minors_vanish, reduce222, GeneralClassification,
    OrbitClass, OrbitReport, EPS_DELTA,
};
pub use scalar::{rat, Rational, Scalar, ScalarKind, Sign};
pub use tensor::{
    outer_product, project_onto_support, supporting_projector, DenseTensor, ExactTensor, MlRank, MultilinearMap,
    Projector, RankOneSum, Tensor, DEFAULT_RANK_TOL,
};
