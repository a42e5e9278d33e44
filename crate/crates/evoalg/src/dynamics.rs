//! Isomorphism-class dynamics of a CEA over the (s, t) domain: closed-form
//! expected classes for the built-in families, grid tracing, and boundary
//! location.
//!
//! For the F3 family the closed forms are stated in terms of
//! `xi = Phi(t)(Psi(t) - Psi(s)) + Phi(t)/Phi(s)` and
//! `zeta = Phi(t)(Psi(t) - Psi(s)) - Phi(t)/Phi(s)`; the family entries are
//! then `(1 +- xi)/2` and `(1 +- zeta)/2` row-wise, matching the affine
//! affine shape. See DISCREPANCIES.md for the corrected E7 parameter strata.

use crate::algebra::rank;
use crate::cea::{evaluate, CeaError, CeaFamily};
use crate::classify::{classify, CanonicalClass};
use crate::scalar::{Scalar, Tol};

/// Half-width of the band around a class-transition line inside which the
/// boundary classification is reported.
pub const BOUNDARY_BAND: f64 = 1e-6;

/// One grid point of a dynamics trace.
#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub s: f64,
    pub t: f64,
    pub class: CanonicalClass,
    pub expected: Option<CanonicalClass>,
    pub agrees: Option<bool>,
    /// Set when this point neighbours a class-transition boundary.
    pub boundary: bool,
    pub ambiguous: bool,
}

/// Closed-form expected class of a built-in family at (s, t).
///
/// Strata beyond the generic closed forms:
///   - F1: mu^u = 0 gives E2, lambda^u = 0 gives E3, both zero gives E0
///     (the blanket E6 form would violate 1 - a2 a3 != 0 there);
///   - F2: E7(0) on the lines t = s + pi/2 + pi k;
///   - F3: E7((1-zeta)/cbrt(2(1+zeta)^2)) for xi = -1 and
///     E7((1+xi)/cbrt(2(1-xi)^2)) for zeta = 1.
pub fn expected_class(
    f: &CeaFamily,
    s: f64,
    t: f64,
    tol: &Tol,
) -> Result<CanonicalClass, CeaError> {
    match f {
        CeaFamily::F1 {
            lambda,
            mu,
            printed_exponent,
        } => {
            let u = if *printed_exponent { t } else { t - s };
            let l = lambda.powf(u);
            let m = mu.powf(u);
            let scale = l.max(m);
            let lz = l.abs() <= tol.rel * scale.max(1.0);
            let mz = m.abs() <= tol.rel * scale.max(1.0);
            Ok(if lz && mz {
                CanonicalClass::E0
            } else if mz {
                CanonicalClass::E2
            } else if lz {
                CanonicalClass::E3
            } else {
                let theta = (l - m) / (l + m);
                CanonicalClass::e6(Scalar::from_f64(theta), Scalar::from_f64(theta))
            })
        }
        CeaFamily::F2 { .. } => {
            let u = t - s;
            let half_pi = std::f64::consts::FRAC_PI_2;
            let pi = std::f64::consts::PI;
            let k = ((u - half_pi) / pi).round();
            if (u - (half_pi + pi * k)).abs() <= BOUNDARY_BAND {
                Ok(CanonicalClass::e7(Scalar::zero()))
            } else {
                let tan = u.tan();
                Ok(CanonicalClass::e6(
                    Scalar::from_f64(tan),
                    Scalar::from_f64(-tan),
                ))
            }
        }
        CeaFamily::F3 { .. } => {
            let m = evaluate(f, s, t, tol)?;
            // recover xi and zeta from the entries: a11 = (1+xi)/2,
            // a22 = (1-zeta)/2
            let xi = 2.0 * m.a11.to_f64() - 1.0;
            let zeta = 1.0 - 2.0 * m.a22.to_f64();
            let xz = (xi + 1.0).abs() <= tol.rel * xi.abs().max(1.0);
            let zz = (zeta - 1.0).abs() <= tol.rel * zeta.abs().max(1.0);
            Ok(if xz {
                let denom = (2.0 * (1.0 + zeta) * (1.0 + zeta)).cbrt();
                CanonicalClass::e7(Scalar::from_f64((1.0 - zeta) / denom))
            } else if zz {
                let denom = (2.0 * (1.0 - xi) * (1.0 - xi)).cbrt();
                CanonicalClass::e7(Scalar::from_f64((1.0 + xi) / denom))
            } else {
                CanonicalClass::e6(
                    Scalar::from_f64((1.0 + xi) * (1.0 + zeta) / ((1.0 - zeta) * (1.0 - zeta))),
                    Scalar::from_f64((1.0 - xi) * (1.0 - zeta) / ((1.0 + xi) * (1.0 + xi))),
                )
            })
        }
        CeaFamily::Custom { .. } => Err(CeaError::UnsupportedFamily),
    }
}

/// A fixed-s trace grid over t in [t0, t1] with the given step.
#[derive(Clone, Copy, Debug)]
pub struct TraceGrid {
    pub s: f64,
    pub t0: f64,
    pub t1: f64,
    pub step: f64,
}

impl TraceGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.t1 - self.t0) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.t0 + i as f64 * self.step).collect()
    }
}

/// Classifies the family at every grid point, compares with the closed-form
/// expectation where available, and flags boundary neighbourhoods.
pub fn trace(f: &CeaFamily, grid: &TraceGrid, tol: &Tol) -> Result<Vec<TraceRecord>, CeaError> {
    let supported = !matches!(f, CeaFamily::Custom { .. });
    let mut records = Vec::new();
    let mut signatures: Vec<(String, i8, i8)> = Vec::new();
    for t in grid.points() {
        let m = evaluate(f, grid.s, t, tol)?;
        let rec = classify(&m, tol);
        let expected = if supported {
            Some(expected_class(f, grid.s, t, tol)?)
        } else {
            None
        };
        let agrees = expected.as_ref().map(|e| rec.class.matches(e, tol));
        signatures.push(signature(&m, &rec.class, tol));
        records.push(TraceRecord {
            s: grid.s,
            t,
            class: rec.class,
            expected,
            agrees,
            boundary: false,
            ambiguous: rec.ambiguous,
        });
    }
    // a boundary lies between adjacent points whose signatures differ
    for i in 0..records.len().saturating_sub(1) {
        if signatures[i] != signatures[i + 1] {
            records[i].boundary = true;
            records[i + 1].boundary = true;
        }
    }
    Ok(records)
}

/// Classification signature used for boundary detection: the class tag plus
/// the signs of the diagonal entries of the evaluated matrix. Within the
/// rank-2 region the E6/E7 transition is exactly a diagonal-entry zero
/// crossing, which a coarse grid sees as a sign flip even when the tag stays
/// E6 on both sides.
fn signature(
    m: &crate::algebra::StructMatrix,
    class: &CanonicalClass,
    tol: &Tol,
) -> (String, i8, i8) {
    let diag_signs = if rank(m, tol) == 2 {
        (
            if m.a11.to_f64() >= 0.0 { 1 } else { -1 },
            if m.a22.to_f64() >= 0.0 { 1 } else { -1 },
        )
    } else {
        (0, 0)
    };
    (class.tag().to_string(), diag_signs.0, diag_signs.1)
}

/// Locates class-transition boundaries in t over [t_lo, t_hi] at fixed s:
/// scans with `scan_step`, then refines each signature change by bisection
/// to within `refine_tol` (default 1e-6).
pub fn find_boundaries(
    f: &CeaFamily,
    s: f64,
    t_lo: f64,
    t_hi: f64,
    scan_step: f64,
    refine_tol: f64,
    tol: &Tol,
) -> Result<Vec<f64>, CeaError> {
    let sig_at = |t: f64| -> Result<(String, i8, i8), CeaError> {
        let m = evaluate(f, s, t, tol)?;
        let rec = classify(&m, tol);
        Ok(signature(&m, &rec.class, tol))
    };

    let mut boundaries = Vec::new();
    let n = ((t_hi - t_lo) / scan_step).ceil() as usize;
    let mut prev_t = t_lo;
    let mut prev_sig = sig_at(prev_t)?;
    for i in 1..=n {
        let t = (t_lo + i as f64 * scan_step).min(t_hi);
        let sig = sig_at(t)?;
        if sig != prev_sig {
            // bisection on "still on the left side"
            let (mut lo, mut hi) = (prev_t, t);
            while hi - lo > refine_tol {
                let mid = (lo + hi) / 2.0;
                if sig_at(mid)? == prev_sig {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let b = (lo + hi) / 2.0;
            if boundaries
                .last()
                .map_or(true, |&last: &f64| (b - last).abs() > 10.0 * refine_tol)
            {
                boundaries.push(b);
            }
        }
        prev_t = t;
        prev_sig = sig;
    }
    Ok(boundaries)
}
