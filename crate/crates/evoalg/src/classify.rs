//! Total classification of 2x2 real structural matrices into the canonical
//! classes E0-E7, with machine-verified change-of-basis witnesses.
//!
//! The decision tree splits on dim E^2 = rank(M):
//!   - rank 0: the trivial algebra E0;
//!   - rank 2: E6(a2,a3) when both diagonal entries are nonzero, E7(a4)
//!     otherwise;
//!   - rank 1: E1/E2/E3/E4/E5, split on the row-proportionality factor k and
//!     the invariant p^2 + q^2 k of the spanning row (p, q).
//!
//! Over the complex field the classes E1, E2, E3, E5, E6, E7 survive while
//! E4 merges away; E4 is specific to the real case. This crate classifies
//! over the reals only.
//!
//! Every returned witness is re-verified by running [`transform`] and
//! comparing with the canonical multiplication table.

use std::fmt;

use thiserror::Error;

use crate::algebra::{transform, BasisChange, StructMatrix};
use crate::scalar::{Scalar, Tol};

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("E6 parameters must satisfy 1 - a2*a3 != 0")]
    InvalidE6Params,
}

/// One of the pairwise non-isomorphic canonical classes.
///
/// E6 carries an ordered parameter pair stored in canonical order
/// (a2 <= a3), exploiting the E6(a2;a3) ~ E6(a3;a2) symmetry. E7 carries a
/// single real parameter.
#[derive(Clone, Debug, PartialEq)]
pub enum CanonicalClass {
    E0,
    E1,
    E2,
    E3,
    E4,
    E5,
    E6 { a2: Scalar, a3: Scalar },
    E7 { a4: Scalar },
}

impl CanonicalClass {
    /// E6 with the parameter pair put into canonical (sorted) order.
    pub fn e6(p: Scalar, q: Scalar) -> Self {
        if q.lt(&p) {
            CanonicalClass::E6 { a2: q, a3: p }
        } else {
            CanonicalClass::E6 { a2: p, a3: q }
        }
    }

    pub fn e7(a4: Scalar) -> Self {
        CanonicalClass::E7 { a4 }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CanonicalClass::E0 => "E0",
            CanonicalClass::E1 => "E1",
            CanonicalClass::E2 => "E2",
            CanonicalClass::E3 => "E3",
            CanonicalClass::E4 => "E4",
            CanonicalClass::E5 => "E5",
            CanonicalClass::E6 { .. } => "E6",
            CanonicalClass::E7 { .. } => "E7",
        }
    }

    pub fn params(&self) -> Vec<Scalar> {
        match self {
            CanonicalClass::E6 { a2, a3 } => vec![a2.clone(), a3.clone()],
            CanonicalClass::E7 { a4 } => vec![a4.clone()],
            _ => vec![],
        }
    }

    /// Tag and parameters equal within tolerance (exact equality in exact
    /// mode). E6 pairs compare positionally; both sides are stored sorted.
    pub fn matches(&self, other: &CanonicalClass, tol: &Tol) -> bool {
        if self.tag() != other.tag() {
            return false;
        }
        self.params()
            .iter()
            .zip(other.params().iter())
            .all(|(a, b)| tol.scalar_eq(a, b))
    }
}

impl fmt::Display for CanonicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.tag())
        } else {
            let parts: Vec<String> = params.iter().map(|p| p.to_string()).collect();
            write!(f, "{}({})", self.tag(), parts.join(", "))
        }
    }
}

/// Result of classification: the class, the witness basis change carrying
/// the input to the canonical table, and verification status.
#[derive(Clone, Debug)]
pub struct CanonicalRecord {
    pub class: CanonicalClass,
    pub witness: BasisChange,
    pub verified: bool,
    /// A branch condition fell within tolerance of a decision boundary
    /// (floating mode only); the record carries the boundary classification.
    pub ambiguous: bool,
}

/// The exact multiplication table of a canonical class.
pub fn canonical_matrix(class: &CanonicalClass) -> Result<StructMatrix, ClassifyError> {
    Ok(match class {
        CanonicalClass::E0 => StructMatrix::zero(),
        CanonicalClass::E1 => StructMatrix::from_i64(1, 0, 0, 0),
        CanonicalClass::E2 => StructMatrix::from_i64(1, 0, 1, 0),
        CanonicalClass::E3 => StructMatrix::from_i64(1, 1, -1, -1),
        CanonicalClass::E4 => StructMatrix::from_i64(0, 1, 0, 0),
        CanonicalClass::E5 => StructMatrix::from_i64(0, 1, 0, -1),
        CanonicalClass::E6 { a2, a3 } => {
            let prod = a2 * a3;
            let gap = &Scalar::one() - &prod;
            let degenerate = match &gap {
                Scalar::Exact(_) => gap.is_exactly_zero(),
                Scalar::Float(v) => v.abs() <= 1e-14 * prod.to_f64().abs().max(1.0),
            };
            if degenerate {
                return Err(ClassifyError::InvalidE6Params);
            }
            StructMatrix::new(Scalar::one(), a2.clone(), a3.clone(), Scalar::one())
        }
        CanonicalClass::E7 { a4 } => {
            StructMatrix::new(Scalar::zero(), Scalar::one(), Scalar::one(), a4.clone())
        }
    })
}

/// Zero-test context that records near-boundary hits.
struct Ctx<'a> {
    tol: &'a Tol,
    scale: f64,
    ambiguous: bool,
}

impl<'a> Ctx<'a> {
    fn new(tol: &'a Tol, scale: f64) -> Self {
        Ctx {
            tol,
            scale,
            ambiguous: false,
        }
    }

    fn entry_zero(&mut self, x: &Scalar) -> bool {
        let z = self.tol.entry_zero(x, self.scale);
        if z && !x.is_exactly_zero() {
            self.ambiguous = true;
        }
        z
    }

    fn quad_zero(&mut self, x: &Scalar) -> bool {
        let z = self.tol.quad_zero(x, self.scale);
        if z && !x.is_exactly_zero() {
            self.ambiguous = true;
        }
        z
    }
}

/// Classifies any real 2x2 structural matrix, returning the canonical class
/// together with a verified witness. Total on real input; never panics.
pub fn classify(m: &StructMatrix, tol: &Tol) -> CanonicalRecord {
    let mut ctx = Ctx::new(tol, m.scale());
    let (class, witness) = classify_inner(m, &mut ctx);
    let ambiguous = ctx.ambiguous;
    let verified = verify_witness(m, &witness, &class, tol);
    CanonicalRecord {
        class,
        witness,
        verified,
        ambiguous,
    }
}

pub fn verify_witness(
    m: &StructMatrix,
    witness: &BasisChange,
    class: &CanonicalClass,
    tol: &Tol,
) -> bool {
    let canon = match canonical_matrix(class) {
        Ok(c) => c,
        Err(_) => return false,
    };
    match transform(m, witness, tol) {
        Ok(out) => out.approx_eq(&canon, tol),
        Err(_) => false,
    }
}

fn classify_inner(m: &StructMatrix, ctx: &mut Ctx) -> (CanonicalClass, BasisChange) {
    let all_zero = {
        let entries = m.entries().map(|e| e.clone());
        entries.iter().all(|e| ctx.entry_zero(e))
    };
    if all_zero {
        return (CanonicalClass::E0, BasisChange::identity());
    }
    if ctx.quad_zero(&m.det()) {
        classify_rank1(m, ctx)
    } else {
        classify_rank2(m, ctx)
    }
}

fn classify_rank2(m: &StructMatrix, ctx: &mut Ctx) -> (CanonicalClass, BasisChange) {
    let a1_zero = ctx.entry_zero(&m.a11);
    let a4_zero = ctx.entry_zero(&m.a22);
    if !a1_zero && !a4_zero {
        // normalize the diagonal: e1' = e1/a1, e2' = e2/a4
        let p1 = &(&m.a12 * &m.a22) / &(&m.a11 * &m.a11);
        let p2 = &(&m.a21 * &m.a11) / &(&m.a22 * &m.a22);
        let diag = BasisChange::diagonal(m.a11.recip(), m.a22.recip());
        if p2.lt(&p1) {
            // restore canonical parameter order through the E6 swap symmetry
            (
                CanonicalClass::e6(p2, p1),
                BasisChange::swap().compose(&diag),
            )
        } else {
            (CanonicalClass::e6(p1, p2), diag)
        }
    } else if a1_zero {
        rank2_zero_diagonal(&m.a12, &m.a21, &m.a22)
    } else {
        // a4 = 0, a1 != 0: swap basis vectors first
        let swap = BasisChange::swap();
        let (class, w) = rank2_zero_diagonal(&m.a21, &m.a12, &m.a11);
        (class, w.compose(&swap))
    }
}

/// Rank-2 case with a vanishing (1,1) entry: e1e1 = a2 e2, e2e2 = a3 e1 + a4 e2
/// with a2 a3 != 0. Cube-root scaling lands on E7(a4 / cbrt(a2 a3^2)).
fn rank2_zero_diagonal(a2: &Scalar, a3: &Scalar, a4: &Scalar) -> (CanonicalClass, BasisChange) {
    let c1 = (&Scalar::one() / &(&(a2 * a2) * a3)).cbrt();
    let c2 = (&Scalar::one() / &(a2 * &(a3 * a3))).cbrt();
    let param = a4 * &c2;
    (
        CanonicalClass::e7(param),
        BasisChange::diagonal(c1, c2),
    )
}

fn classify_rank1(m: &StructMatrix, ctx: &mut Ctx) -> (CanonicalClass, BasisChange) {
    let row1_zero = {
        let z1 = ctx.entry_zero(&m.a11);
        let z2 = ctx.entry_zero(&m.a12);
        z1 && z2
    };
    if row1_zero {
        // move the spanning row into position 1 (transform through the swap
        // exchanges both rows and columns)
        let swap = BasisChange::swap();
        let swapped = StructMatrix::new(
            m.a22.clone(),
            m.a21.clone(),
            m.a12.clone(),
            m.a11.clone(),
        );
        let (class, w) = classify_rank1_row1(&swapped, ctx);
        (class, w.compose(&swap))
    } else {
        classify_rank1_row1(m, ctx)
    }
}

/// Rank-1 classification with row 1 as the spanning row (p, q) and
/// row 2 = k * row 1.
fn classify_rank1_row1(m: &StructMatrix, ctx: &mut Ctx) -> (CanonicalClass, BasisChange) {
    let (p, q) = (m.a11.clone(), m.a12.clone());
    let row2_zero = {
        let z1 = ctx.entry_zero(&m.a21);
        let z2 = ctx.entry_zero(&m.a22);
        z1 && z2
    };
    let p_zero = ctx.entry_zero(&p);
    // proportionality factor from the dominant component of row 1
    let kappa = if p.to_f64().abs() >= q.to_f64().abs() {
        &m.a21 / &p
    } else {
        &m.a22 / &q
    };

    if p_zero {
        // spanning row (0, q): e1e1 = q e2, e2e2 = k q e2
        if row2_zero {
            // E4, witness e1' = e1, e2' = q e2
            (
                CanonicalClass::E4,
                BasisChange::new(Scalar::one(), Scalar::zero(), Scalar::zero(), q),
            )
        } else if kappa.sign() > 0 {
            // E2: e1' = e2/(q k), e2' = e1/(q sqrt(k))
            let row1 = (&q * &kappa).recip();
            let row2 = (&q * &kappa.sqrt()).recip();
            (
                CanonicalClass::E2,
                BasisChange::new(Scalar::zero(), row1, row2, Scalar::zero()),
            )
        } else {
            // E5: e1' = e1/(q sqrt(|k|)), e2' = -e2/(q k)
            let x = (&q * &kappa.abs().sqrt()).recip();
            let w = -&(&q * &kappa).recip();
            (
                CanonicalClass::E5,
                BasisChange::new(x, Scalar::zero(), Scalar::zero(), w),
            )
        }
    } else if row2_zero {
        // E1: e1' = (p e1 + q e2)/p^2, e2' = e2
        let p2 = &p * &p;
        (
            CanonicalClass::E1,
            BasisChange::new(
                p.recip(),
                &q / &p2,
                Scalar::zero(),
                Scalar::one(),
            ),
        )
    } else {
        // u = p e1 + q e2 spans E^2; u*u = d*u with d = p^2 + q^2 k
        let d = &(&p * &p) + &(&(&q * &q) * &kappa);
        if kappa.sign() > 0 {
            // E2: e1' = u/d, e2' = (-q sqrt(k) e1 + (p/sqrt(k)) e2)/d
            let sk = kappa.sqrt();
            let row21 = &(-&(&q * &sk)) / &d;
            let row22 = &(&p / &sk) / &d;
            (
                CanonicalClass::E2,
                BasisChange::new(&p / &d, &q / &d, row21, row22),
            )
        } else if ctx.quad_zero(&d) {
            // the p^2 + q^2 k = 0 stratum: E3, rational witness
            // e1' = e1/p, e2' = (q/p^2) e2
            (
                CanonicalClass::E3,
                BasisChange::new(
                    p.recip(),
                    Scalar::zero(),
                    Scalar::zero(),
                    &q / &(&p * &p),
                ),
            )
        } else {
            // E5: e2' = -u/d, e1' = (x, y) with y = p/(d sqrt(|k|)),
            // x = -y q k / p
            let y = &p / &(&d * &kappa.abs().sqrt());
            let x = &(-&(&(&y * &q) * &kappa)) / &p;
            (
                CanonicalClass::E5,
                BasisChange::new(x, y, &(-&p) / &d, &(-&q) / &d),
            )
        }
    }
}

/// Which of the three parametric matrix shapes a closed-form classification
/// is requested for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixShape {
    /// [[l, m], [m, l]]
    Symmetric,
    /// [[l, m], [-m, l]]
    Skew,
    /// [[1+l, 1-l], [1+m, 1-m]]
    Affine,
}

/// Materializes the structural matrix of a parametric matrix shape.
pub fn shape_matrix(kind: MatrixShape, lambda: &Scalar, mu: &Scalar) -> StructMatrix {
    match kind {
        MatrixShape::Symmetric => StructMatrix::new(
            lambda.clone(),
            mu.clone(),
            mu.clone(),
            lambda.clone(),
        ),
        MatrixShape::Skew => StructMatrix::new(
            lambda.clone(),
            mu.clone(),
            -mu,
            lambda.clone(),
        ),
        MatrixShape::Affine => {
            let one = Scalar::one();
            StructMatrix::new(&one + lambda, &one - lambda, &one + mu, &one - mu)
        }
    }
}

/// Closed-form classification of the parametric matrix shapes. Fast path and
/// cross-check only: must agree with `classify(shape_matrix(..))`.
///
/// Strata corrections relative to the naive closed forms:
///   - symmetric with l = -m != 0 is E3 (the E6(-1,-1) form would violate
///     1 - a2 a3 != 0);
///   - affine E7 parameters are (1-m)/cbrt(2(1+m)^2) and
///     (1+l)/cbrt(2(1-l)^2), confirmed against the isomorphism oracle.
pub fn classify_shape(
    kind: MatrixShape,
    lambda: &Scalar,
    mu: &Scalar,
    tol: &Tol,
) -> CanonicalClass {
    let scale = lambda.to_f64().abs().max(mu.to_f64().abs());
    let lz = tol.entry_zero(lambda, scale);
    let mz = tol.entry_zero(mu, scale);
    match kind {
        MatrixShape::Symmetric => {
            if lz && mz {
                CanonicalClass::E0
            } else if tol.scalar_eq(lambda, mu) {
                CanonicalClass::E2
            } else if lz {
                CanonicalClass::e7(Scalar::zero())
            } else if tol.scalar_eq(lambda, &(-mu)) {
                CanonicalClass::E3
            } else {
                let r = mu / lambda;
                CanonicalClass::e6(r.clone(), r)
            }
        }
        MatrixShape::Skew => {
            if lz && mz {
                CanonicalClass::E0
            } else if lz {
                CanonicalClass::e7(Scalar::zero())
            } else {
                let r = mu / lambda;
                CanonicalClass::e6(r.clone(), -&r)
            }
        }
        MatrixShape::Affine => {
            let one = Scalar::one();
            let neg_one = Scalar::from_int(-1);
            if tol.scalar_eq(lambda, mu) {
                CanonicalClass::E2
            } else if tol.scalar_eq(lambda, &neg_one) {
                let num = &one - mu;
                let den = (&Scalar::from_int(2) * &(&(&one + mu) * &(&one + mu))).cbrt();
                CanonicalClass::e7(&num / &den)
            } else if tol.scalar_eq(mu, &one) {
                let num = &one + lambda;
                let den = (&Scalar::from_int(2) * &(&(&one - lambda) * &(&one - lambda))).cbrt();
                CanonicalClass::e7(&num / &den)
            } else {
                let p1 = &(&(&one + lambda) * &(&one + mu)) / &(&(&one - mu) * &(&one - mu));
                let p2 = &(&(&one - lambda) * &(&one - mu))
                    / &(&(&one + lambda) * &(&one + lambda));
                CanonicalClass::e6(p1, p2)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tol {
        Tol::default()
    }

    fn check(m: StructMatrix, expected: CanonicalClass) {
        let rec = classify(&m, &tol());
        assert!(
            rec.class.matches(&expected, &tol()),
            "classified {:?} as {} (expected {})",
            m,
            rec.class,
            expected
        );
        assert!(rec.verified, "unverified witness for {:?}", m);
    }

    #[test]
    fn canonical_tables() {
        assert_eq!(
            canonical_matrix(&CanonicalClass::E1).unwrap(),
            StructMatrix::from_i64(1, 0, 0, 0)
        );
        assert_eq!(
            canonical_matrix(&CanonicalClass::e6(Scalar::zero(), Scalar::zero())).unwrap(),
            StructMatrix::from_i64(1, 0, 0, 1)
        );
        assert_eq!(
            canonical_matrix(&CanonicalClass::e7(Scalar::from_int(-2))).unwrap(),
            StructMatrix::from_i64(0, 1, 1, -2)
        );
        assert_eq!(
            canonical_matrix(&CanonicalClass::e6(Scalar::from_int(-1), Scalar::from_int(-1)))
                .unwrap_err(),
            ClassifyError::InvalidE6Params
        );
    }

    #[test]
    fn classify_known_cases() {
        check(StructMatrix::zero(), CanonicalClass::E0);
        check(StructMatrix::from_i64(1, 1, -1, -1), CanonicalClass::E3);
        check(
            StructMatrix::from_i64(3, 1, 1, 3),
            CanonicalClass::e6(Scalar::from_ratio(1, 3), Scalar::from_ratio(1, 3)),
        );
        check(
            StructMatrix::from_i64(0, 1, 1, 0),
            CanonicalClass::e7(Scalar::zero()),
        );
        check(
            StructMatrix::from_i64(2, 4, 6, 2),
            CanonicalClass::e6(Scalar::from_int(2), Scalar::from_int(3)),
        );
        check(
            StructMatrix::new(
                Scalar::one(),
                Scalar::from_int(2),
                Scalar::from_ratio(-1, 4),
                Scalar::from_ratio(-1, 2),
            ),
            CanonicalClass::E3,
        );
        check(
            StructMatrix::new(
                Scalar::from_ratio(1, 2),
                Scalar::from_ratio(-1, 2),
                Scalar::from_ratio(-1, 2),
                Scalar::from_ratio(1, 2),
            ),
            CanonicalClass::E3,
        );
        check(
            StructMatrix::from_i64(0, 1, 1, 5),
            CanonicalClass::e7(Scalar::from_int(5)),
        );
    }

    #[test]
    fn classify_e3_witness_is_identity() {
        let rec = classify(&StructMatrix::from_i64(1, 1, -1, -1), &tol());
        assert_eq!(rec.witness, BasisChange::identity());
    }

    #[test]
    fn classify_canonical_representatives_fixed() {
        check(StructMatrix::from_i64(1, 0, 0, 0), CanonicalClass::E1);
        check(StructMatrix::from_i64(1, 0, 1, 0), CanonicalClass::E2);
        check(StructMatrix::from_i64(0, 1, 0, 0), CanonicalClass::E4);
        check(StructMatrix::from_i64(0, 1, 0, -1), CanonicalClass::E5);
        // identity witnesses on the canonical representatives
        for m in [
            StructMatrix::from_i64(1, 0, 0, 0),
            StructMatrix::from_i64(1, 0, 1, 0),
            StructMatrix::from_i64(0, 1, 0, 0),
            StructMatrix::from_i64(0, 1, 0, -1),
        ] {
            let rec = classify(&m, &tol());
            assert_eq!(rec.witness, BasisChange::identity(), "for {:?}", m);
        }
    }

    #[test]
    fn classify_rank1_with_zero_first_row() {
        // zero row 1 forces the swap path: e2^2 = e1 alone is nilpotent,
        // e2^2 = e2 alone has an idempotent
        check(StructMatrix::from_i64(0, 0, 1, 0), CanonicalClass::E4);
        check(StructMatrix::from_i64(0, 0, 0, 1), CanonicalClass::E1);
        check(StructMatrix::from_i64(0, 0, 2, 3), CanonicalClass::E1);
    }

    #[test]
    fn classify_e5_derived_witness() {
        // [[1,0],[-1,0]]: forced witness e1' = e2, e2' = -e1
        let rec = classify(&StructMatrix::from_i64(1, 0, -1, 0), &tol());
        assert!(rec.class.matches(&CanonicalClass::E5, &tol()));
        assert!(rec.verified);
        assert_eq!(
            rec.witness,
            BasisChange::new(
                Scalar::zero(),
                Scalar::one(),
                Scalar::from_int(-1),
                Scalar::zero()
            )
        );
    }

    #[test]
    fn classify_rank2_zero_a4() {
        // a4 = 0 routes through the swap into the E7 branch
        check(
            StructMatrix::from_i64(5, 1, 1, 0),
            CanonicalClass::e7(Scalar::from_int(5)),
        );
    }

    #[test]
    fn floating_boundary_sets_ambiguous_flag() {
        let m = StructMatrix::from_f64(1e-12, 1.0, 1.0, 0.5);
        let rec = classify(&m, &tol());
        assert!(rec.ambiguous);
        assert!(rec.verified);
        assert_eq!(rec.class.tag(), "E7");
    }

    #[test]
    fn shapes_agree_with_classify() {
        let t = tol();
        let vals: Vec<Scalar> = [-3, -2, -1, 0, 1, 2, 3]
            .iter()
            .map(|&v| Scalar::from_int(v))
            .collect();
        for kind in [MatrixShape::Symmetric, MatrixShape::Skew, MatrixShape::Affine] {
            for l in &vals {
                for m in &vals {
                    let fast = classify_shape(kind, l, m, &t);
                    let full = classify(&shape_matrix(kind, l, m), &t);
                    assert!(
                        fast.matches(&full.class, &t),
                        "{:?} l={} m={}: fast {} vs classify {}",
                        kind,
                        l,
                        m,
                        fast,
                        full.class
                    );
                    assert!(full.verified);
                }
            }
        }
    }

    #[test]
    fn shape_known_cases() {
        let t = tol();
        let two = Scalar::from_int(2);
        assert!(classify_shape(MatrixShape::Symmetric, &two, &two, &t)
            .matches(&CanonicalClass::E2, &t));
        assert!(
            classify_shape(MatrixShape::Skew, &Scalar::one(), &Scalar::one(), &t).matches(
                &CanonicalClass::e6(Scalar::one(), Scalar::from_int(-1)),
                &t
            )
        );
        assert!(
            classify_shape(MatrixShape::Skew, &Scalar::zero(), &Scalar::from_int(3), &t)
                .matches(&CanonicalClass::e7(Scalar::zero()), &t)
        );
        // affine l=-1, m=0 materializes [[0,2],[1,1]] -> E7(1/cbrt(2))
        let got = classify_shape(MatrixShape::Affine, &Scalar::from_int(-1), &Scalar::zero(), &t);
        let expected = CanonicalClass::e7(Scalar::from_f64(1.0 / 2f64.cbrt()));
        assert!(got.matches(&expected, &t), "got {}", got);
    }
}
