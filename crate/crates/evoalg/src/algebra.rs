//! Core data model: structural matrices, the evolution product, and
//! natural-basis changes.
//!
//! A two-dimensional evolution algebra is determined by its structural matrix
//! `M = (a_ij)` in a natural basis: `e1*e1 = a11 e1 + a12 e2`,
//! `e2*e2 = a21 e1 + a22 e2`, and `e1*e2 = 0`. A change of basis is *natural*
//! when the new basis again satisfies `e1'*e2' = 0`; only those transforms
//! are admitted here.

use thiserror::Error;

use crate::scalar::{Scalar, Tol};

#[derive(Debug, Error, PartialEq)]
pub enum AlgebraError {
    /// The basis change does not preserve `e1'*e2' = 0`.
    #[error("basis change does not yield a natural basis")]
    NotNaturalBasis,
    /// The basis change matrix is singular.
    #[error("basis change is singular (det = 0)")]
    SingularChange,
}

/// 2x2 matrix of structural constants in a natural basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StructMatrix {
    pub a11: Scalar,
    pub a12: Scalar,
    pub a21: Scalar,
    pub a22: Scalar,
}

/// An algebra element, as coordinates in the current natural basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub c1: Scalar,
    pub c2: Scalar,
}

impl Element {
    pub fn new(c1: Scalar, c2: Scalar) -> Self {
        Element { c1, c2 }
    }
}

/// An invertible basis change `e1' = t11 e1 + t12 e2`, `e2' = t21 e1 + t22 e2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisChange {
    pub t11: Scalar,
    pub t12: Scalar,
    pub t21: Scalar,
    pub t22: Scalar,
}

impl StructMatrix {
    pub fn new(a11: Scalar, a12: Scalar, a21: Scalar, a22: Scalar) -> Self {
        StructMatrix { a11, a12, a21, a22 }
    }

    pub fn from_i64(a11: i64, a12: i64, a21: i64, a22: i64) -> Self {
        StructMatrix::new(
            Scalar::from_int(a11),
            Scalar::from_int(a12),
            Scalar::from_int(a21),
            Scalar::from_int(a22),
        )
    }

    pub fn from_f64(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        StructMatrix::new(
            Scalar::from_f64(a11),
            Scalar::from_f64(a12),
            Scalar::from_f64(a21),
            Scalar::from_f64(a22),
        )
    }

    pub fn zero() -> Self {
        StructMatrix::from_i64(0, 0, 0, 0)
    }

    pub fn entries(&self) -> [&Scalar; 4] {
        [&self.a11, &self.a12, &self.a21, &self.a22]
    }

    pub fn row1(&self) -> (Scalar, Scalar) {
        (self.a11.clone(), self.a12.clone())
    }

    pub fn row2(&self) -> (Scalar, Scalar) {
        (self.a21.clone(), self.a22.clone())
    }

    pub fn is_exact(&self) -> bool {
        self.entries().iter().all(|e| e.is_exact())
    }

    /// Max absolute entry; the reference scale for relative zero tests.
    pub fn scale(&self) -> f64 {
        self.entries()
            .iter()
            .map(|e| e.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn det(&self) -> Scalar {
        &(&self.a11 * &self.a22) - &(&self.a12 * &self.a21)
    }

    /// Matrix product, used by the Chapman-Kolmogorov check.
    pub fn matmul(&self, other: &StructMatrix) -> StructMatrix {
        StructMatrix::new(
            &(&self.a11 * &other.a11) + &(&self.a12 * &other.a21),
            &(&self.a11 * &other.a12) + &(&self.a12 * &other.a22),
            &(&self.a21 * &other.a11) + &(&self.a22 * &other.a21),
            &(&self.a21 * &other.a12) + &(&self.a22 * &other.a22),
        )
    }

    pub fn sub(&self, other: &StructMatrix) -> StructMatrix {
        StructMatrix::new(
            &self.a11 - &other.a11,
            &self.a12 - &other.a12,
            &self.a21 - &other.a21,
            &self.a22 - &other.a22,
        )
    }

    pub fn scaled(&self, c: &Scalar) -> StructMatrix {
        StructMatrix::new(c * &self.a11, c * &self.a12, c * &self.a21, c * &self.a22)
    }

    pub fn frobenius(&self) -> f64 {
        self.entries()
            .iter()
            .map(|e| {
                let v = e.to_f64();
                v * v
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Entrywise approximate equality relative to the shared scale.
    pub fn approx_eq(&self, other: &StructMatrix, tol: &Tol) -> bool {
        if self.is_exact() && other.is_exact() {
            return self == other;
        }
        let scale = self.scale().max(other.scale());
        self.sub(other)
            .entries()
            .iter()
            .all(|d| tol.entry_zero(d, scale))
    }
}

impl BasisChange {
    pub fn new(t11: Scalar, t12: Scalar, t21: Scalar, t22: Scalar) -> Self {
        BasisChange { t11, t12, t21, t22 }
    }

    pub fn identity() -> Self {
        BasisChange::new(Scalar::one(), Scalar::zero(), Scalar::zero(), Scalar::one())
    }

    /// Swap of the two basis vectors.
    pub fn swap() -> Self {
        BasisChange::new(Scalar::zero(), Scalar::one(), Scalar::one(), Scalar::zero())
    }

    pub fn diagonal(d1: Scalar, d2: Scalar) -> Self {
        BasisChange::new(d1, Scalar::zero(), Scalar::zero(), d2)
    }

    pub fn det(&self) -> Scalar {
        &(&self.t11 * &self.t22) - &(&self.t12 * &self.t21)
    }

    pub fn scale(&self) -> f64 {
        [&self.t11, &self.t12, &self.t21, &self.t22]
            .iter()
            .map(|e| e.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_exact(&self) -> bool {
        self.t11.is_exact() && self.t12.is_exact() && self.t21.is_exact() && self.t22.is_exact()
    }

    /// Composition: `outer.compose(inner)` first applies `inner` to the
    /// original basis, then `outer` to the result. As matrices this is
    /// `outer * inner`.
    pub fn compose(&self, inner: &BasisChange) -> BasisChange {
        BasisChange::new(
            &(&self.t11 * &inner.t11) + &(&self.t12 * &inner.t21),
            &(&self.t11 * &inner.t12) + &(&self.t12 * &inner.t22),
            &(&self.t21 * &inner.t11) + &(&self.t22 * &inner.t21),
            &(&self.t21 * &inner.t12) + &(&self.t22 * &inner.t22),
        )
    }

    pub fn inverse(&self) -> Result<BasisChange, AlgebraError> {
        let det = self.det();
        if det.is_exactly_zero() {
            return Err(AlgebraError::SingularChange);
        }
        let inv = det.recip();
        Ok(BasisChange::new(
            &self.t22 * &inv,
            &(-&self.t12) * &inv,
            &(-&self.t21) * &inv,
            &self.t11 * &inv,
        ))
    }
}

/// Evolution product of two elements: cross terms vanish, so
/// `u*v = u1 v1 * row1(M) + u2 v2 * row2(M)`.
pub fn product(u: &Element, v: &Element, m: &StructMatrix) -> Element {
    let w1 = &u.c1 * &v.c1;
    let w2 = &u.c2 * &v.c2;
    Element::new(
        &(&w1 * &m.a11) + &(&w2 * &m.a21),
        &(&w1 * &m.a12) + &(&w2 * &m.a22),
    )
}

/// Whether `t` carries the natural basis of `m` to another natural basis,
/// i.e. `det(t) != 0` and `(t11 t21, t12 t22) . M = (0, 0)`.
pub fn is_natural(m: &StructMatrix, t: &BasisChange, tol: &Tol) -> bool {
    let tscale = t.scale().max(1.0);
    if tol.quad_zero(&t.det(), tscale) {
        return false;
    }
    let p = &t.t11 * &t.t21;
    let q = &t.t12 * &t.t22;
    let c1 = &(&p * &m.a11) + &(&q * &m.a21);
    let c2 = &(&p * &m.a12) + &(&q * &m.a22);
    let scale = m.scale().max(1.0) * tscale * tscale;
    tol.entry_zero(&c1, scale) && tol.entry_zero(&c2, scale)
}

/// New structural matrix after the natural-basis change `t`:
/// `M' = S(t) * M * t^{-1}` with `S(t)` the entrywise square of `t`.
pub fn transform(
    m: &StructMatrix,
    t: &BasisChange,
    tol: &Tol,
) -> Result<StructMatrix, AlgebraError> {
    let det = t.det();
    if det.is_exactly_zero() || tol.quad_zero(&det, t.scale()) {
        return Err(AlgebraError::SingularChange);
    }
    if !is_natural(m, t, tol) {
        return Err(AlgebraError::NotNaturalBasis);
    }
    let sq = StructMatrix::new(
        &t.t11 * &t.t11,
        &t.t12 * &t.t12,
        &t.t21 * &t.t21,
        &t.t22 * &t.t22,
    );
    let inv_det = det.recip();
    // t^{-1} = adj(t) / det
    let t_inv = StructMatrix::new(
        &t.t22 * &inv_det,
        &(-&t.t12) * &inv_det,
        &(-&t.t21) * &inv_det,
        &t.t11 * &inv_det,
    );
    Ok(sq.matmul(m).matmul(&t_inv))
}

/// Rank of the structural matrix; equals dim E^2, the top-level invariant.
pub fn rank(m: &StructMatrix, tol: &Tol) -> u8 {
    let scale = m.scale();
    if m.entries().iter().all(|e| tol.entry_zero(e, scale)) {
        return 0;
    }
    if tol.quad_zero(&m.det(), scale) {
        1
    } else {
        2
    }
}
