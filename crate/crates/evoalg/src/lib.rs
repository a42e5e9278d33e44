//! Classification and dynamics of two-dimensional real evolution algebras.
//!
//! An evolution algebra on a natural basis e1, e2 has products
//! e1 e2 = 0 and ei ei = a_i1 e1 + a_i2 e2; it is described by its
//! structural matrix. Over the reals every such algebra is isomorphic to
//! exactly one of the canonical forms E0 through E7 (E4 is a genuinely real
//! phenomenon: over an algebraically closed field it merges into E1's
//! orbit). This crate classifies structural matrices into those forms with
//! verified change-of-basis witnesses, decides isomorphism, and analyses
//! chains of evolution algebras: Chapman-Kolmogorov checks, homogeneity,
//! periodicity, and class dynamics against closed-form expectations.

pub mod algebra;
pub mod cea;
pub mod classify;
pub mod dynamics;
pub mod expr;
pub mod iso;
pub mod scalar;

pub use algebra::{
    is_natural, product, rank, transform, AlgebraError, BasisChange, Element, StructMatrix,
};
pub use cea::{
    ck_check, evaluate, homogeneity_check, periodicity_scan, CeaError, CeaFamily, CkReport,
    CkSample, HomogeneityReport, PeriodResult, TimeVar,
};
pub use classify::{
    canonical_matrix, classify, classify_shape, shape_matrix, verify_witness, CanonicalClass,
    CanonicalRecord, ClassifyError, MatrixShape,
};
pub use dynamics::{
    expected_class, find_boundaries, trace, TraceGrid, TraceRecord, BOUNDARY_BAND,
};
pub use expr::{eval, eval_env, parse, Expr, ExprError};
pub use iso::{brute_force_iso, iso, BruteGrid, IsoError, IsoMethod, IsoResult};
pub use scalar::{Scalar, Tol};
