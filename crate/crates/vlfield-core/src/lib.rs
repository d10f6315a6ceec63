//! Numerical laboratory for variable-exponent Lebesgue spaces with matrix
//! weights on bounded dyadic lattices.
//!
//! The crate discretizes `[-L, L)^n` into dyadic cells, carries scalar,
//! vector, exponent, and symmetric-positive-definite matrix fields on the
//! cells, and computes the central objects of the theory at desk scale:
//!
//! - Luxemburg norms of the modular `sum |f|^p(x) dx` and the averaging
//!   functionals built from them ([`varnorm`]);
//! - scalar and matrix Muckenhoupt-type constants in the multiplier
//!   convention, reducing operators realized by minimum-volume enclosing
//!   ellipsoids, and a reverse Holder probe ([`weights`], [`mvee`]);
//! - the matrix-weighted maximal operator, its reduced auxiliary variants,
//!   and the dyadic stopping-time decomposition behind them ([`maximal`]);
//! - convex-body fields with support-function calculus, sparse families,
//!   the sparse averaging operator, and a discrete Riesz transform
//!   ([`sparse`]);
//! - a seeded battery generator and inequality suite that re-checks every
//!   quantitative bound the other modules promise ([`verify`]).
//!
//! All computations are deterministic for a fixed seed: enumeration orders
//! are fixed, parallel reductions are ordered, and random batteries are
//! stream-split per case.

pub mod domain;
pub mod error;
pub mod exponent;
pub mod field;
pub mod linalg;
pub mod directions;
pub mod maximal;
pub mod mvee;
pub mod sparse;
pub mod varnorm;
pub mod verify;
pub mod weights;

pub use domain::{
    cells_in_box, enumerate_cubes, one_third_cover, parent_cube, shift_masks, Cube, CubeFamily,
    CubeId, FamilyCube, LatticeDomain, Provenance, ShiftMask, UnitsBox,
};
pub use error::{Error, Result};
pub use exponent::{
    diening_constant, estimate_lh, estimate_log_holder, lh_closure_check, ExponentField,
    ExponentForm, LhClosureReport, LhEstimates, LogHolderReport,
};
pub use field::{ScalarField, VectorField};
pub use linalg::Mat;
pub use directions::DirectionSet;
pub use maximal::{CzDecomposition, MaximalField, OpKind, OpTag};
pub use sparse::{ConvexBody, ConvexBodyField, KernelSpec, SparseFamily};
pub use verify::{run_suite, SuiteConfig, SuiteReport};
pub use weights::{DirectionPair, MatrixWeightField, ReducingCache, ReducingOperator};
