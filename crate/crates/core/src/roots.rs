//! Bracketing root finder.

use crate::error::{domain, Result};

/// Bisection on `[lo, hi]`; `f(lo)` and `f(hi)` must have opposite signs
/// (a zero at either end is accepted). Stops once the bracket width falls
/// below `rel_tol · |mid|` or after `max_iter` halvings.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(domain(format!(
            "bisection needs a sign change on [{lo}, {hi}], got f = ({f_lo}, {f_hi})"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
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

/// Doubles `hi` (starting from `start > 0`) until `pred(hi)` holds.
pub fn expand_upward<P: FnMut(f64) -> bool>(start: f64, mut pred: P, max_doublings: usize) -> Result<f64> {
    let mut hi = start;
    for _ in 0..max_doublings {
        if pred(hi) {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(domain(format!("no bracket found below {hi}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-15, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 4e-15);
    }

    #[test]
    fn decreasing_function() {
        let r = bisect(|x| 1.0 / x - 4.0, 0.01, 10.0, 1e-14, 200).unwrap();
        assert!((r - 0.25).abs() < 1e-13);
    }

    #[test]
    fn rejects_missing_sign_change() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
    }

    #[test]
    fn expansion_finds_bracket() {
        let hi = expand_upward(1.0, |x| x > 100.0, 20).unwrap();
        assert_eq!(hi, 128.0);
    }
}
