//! Bracketing root search used for the KDAC breakpoint analysis.

use crate::error::{config, Result};

/// Bisection on a bracket `[lo, hi]` with `f(lo)` and `f(hi)` of opposite
/// sign. Stops once the bracket is narrower than `x_tol` or stops shrinking
/// in floating point.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || !f_lo.is_finite() || !f_hi.is_finite() {
        return config(format!("bisect: [{lo}, {hi}] does not bracket a root"));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid <= lo || mid >= hi {
            break;
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

/// Finds the root of `f` closest to `from` (exclusive) on the ray towards
/// `to`, by scanning a geometric grid of `|x - from|` for a sign change and
/// refining it with bisection. Returns `None` when no sign change is seen.
pub fn first_root_from(
    f: impl Fn(f64) -> f64,
    from: f64,
    to: f64,
    min_offset: f64,
    samples: usize,
    x_tol: f64,
) -> Result<Option<f64>> {
    let span = (to - from).abs();
    if span <= min_offset || samples < 2 {
        return config("first_root_from: empty search interval");
    }
    let dir = (to - from).signum();
    let ratio = (span / min_offset).powf(1.0 / (samples - 1) as f64);
    let mut prev_x = from + dir * min_offset;
    let mut prev_f = f(prev_x);
    let mut offset = min_offset;
    for _ in 1..samples {
        offset *= ratio;
        let x = from + dir * offset.min(span);
        let fx = f(x);
        if fx == 0.0 {
            return Ok(Some(x));
        }
        if prev_f != 0.0 && fx.signum() != prev_f.signum() {
            let (lo, hi) = if prev_x < x { (prev_x, x) } else { (x, prev_x) };
            return bisect(&f, lo, hi, x_tol).map(Some);
        }
        prev_x = x;
        prev_f = fx;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_requires_bracket() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn scan_finds_nearest_root() {
        // roots at 1 and 2; scanning right from 0 must report 1
        let f = |x: f64| (x - 1.0) * (x - 2.0);
        let r = first_root_from(f, 0.0, 3.0, 1e-6, 2000, 1e-13).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        // scanning left from 3 reports 2
        let r = first_root_from(f, 3.0, 0.0, 1e-6, 2000, 1e-13).unwrap().unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        assert!(first_root_from(|x| x + 10.0, 0.0, 5.0, 1e-6, 100, 1e-12)
            .unwrap()
            .is_none());
    }
}
