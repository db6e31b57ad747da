//! One-dimensional derivative-free search used by the calibration code.

use crate::{Error, Result};

/// 1/φ, the golden-section shrink factor.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Location and value of a maximum found by [`golden_section_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Maximizes a unimodal `f` on `[lo, hi]` until the bracket is narrower than `tol`.
///
/// After the first trisection, an interior sample lying below both endpoint
/// values means the function has a valley inside the bracket and the search
/// is rejected with [`Error::Bracketing`].
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain("search bracket requires finite lo < hi"));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParam {
            field: "tol",
            reason: "must be positive",
        });
    }

    let (mut a, mut b) = (lo, hi);
    let fa = f(a)?;
    let fb = f(b)?;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;

    let floor = fa.min(fb);
    if f1 < floor || f2 < floor {
        return Err(Error::Bracketing("interior sample below both ends"));
    }

    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        }
    }

    let mut best = if f1 >= f2 {
        Maximum { x: x1, value: f1 }
    } else {
        Maximum { x: x2, value: f2 }
    };
    // The maximum can sit on the boundary (monotone f); keep the better end.
    if fa > best.value {
        best = Maximum { x: lo, value: fa };
    }
    if fb > best.value {
        best = Maximum { x: hi, value: fb };
    }
    Ok(best)
}

/// Finds a root of a monotone `f` in `[lo, hi]` by bisection, given that
/// `f(lo)` and `f(hi)` have opposite signs. Stops when `|f| <= ftol` or the
/// bracket collapses to floating-point resolution.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, ftol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracketing("root bracket ends share a sign"));
    }

    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid.abs() <= ftol {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
