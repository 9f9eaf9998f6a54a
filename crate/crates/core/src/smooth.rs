//! Clamped quadratic blends of two values.
//!
//! Inside the band `|f_i - f_j| < mu` the hard min/max is replaced by a
//! quadratic in the switching factor; outside it the exact branch is
//! returned untouched. The quadratic term is chosen so that the derivative
//! matches the pure branch at both band edges, which makes the blend C¹.
//!
//! A useful consequence is that the partial derivatives collapse to the
//! blend weights: with `P = f_i (1 - s) + s f_j ∓ mu s (1 - s)`,
//! `dP/ds = (f_j - f_i) ± mu (1 - 2s)` vanishes identically once `s` is
//! substituted, so `∂P/∂f_i = 1 - s` and `∂P/∂f_j = s`.

use crate::error::{config, Result};

/// Which side of the band the switching factor fell on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clamp {
    /// Factor saturated at 0; the blend is exactly the first argument.
    Below,
    Inside,
    /// Factor saturated at 1; the blend is exactly the second argument.
    Above,
}

/// State of one blend evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothBlend {
    pub factor: f64,
    pub mu: f64,
    pub weight_first: f64,
    pub weight_second: f64,
    pub clamped: Clamp,
}

impl SmoothBlend {
    /// Builds the blend state from the signed difference `d` whose band test
    /// decides the factor: `factor = 1/2 + d / (2 mu)`, saturated to [0, 1].
    fn from_difference(d: f64, mu: f64) -> Self {
        let (factor, clamped) = if d >= mu {
            (1.0, Clamp::Above)
        } else if d <= -mu {
            (0.0, Clamp::Below)
        } else {
            (0.5 + d / (2.0 * mu), Clamp::Inside)
        };
        SmoothBlend {
            factor,
            mu,
            weight_first: 1.0 - factor,
            weight_second: factor,
            clamped,
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        config(format!("smoothing band mu must be finite and > 0, got {mu}"))
    }
}

/// Switching factor of the smoothed minimum, `1/2 + (f_i - f_j) / (2 mu)`.
pub fn switching_factor_min(f_i: f64, f_j: f64, mu: f64) -> Result<SmoothBlend> {
    check_mu(mu)?;
    Ok(SmoothBlend::from_difference(f_i - f_j, mu))
}

/// Switching factor of the smoothed maximum, `1/2 + (f_j - f_i) / (2 mu)`.
pub fn switching_factor_max(f_i: f64, f_j: f64, mu: f64) -> Result<SmoothBlend> {
    check_mu(mu)?;
    Ok(SmoothBlend::from_difference(f_j - f_i, mu))
}

/// Value of a smoothed minimum given its precomputed blend state.
#[inline]
pub fn min_from_blend(f_i: f64, f_j: f64, blend: &SmoothBlend) -> f64 {
    match blend.clamped {
        Clamp::Below => f_i,
        Clamp::Above => f_j,
        Clamp::Inside => {
            let z = blend.factor;
            f_i * (1.0 - z) + z * f_j - blend.mu * z * (1.0 - z)
        }
    }
}

/// Value of a smoothed maximum given its precomputed blend state.
#[inline]
pub fn max_from_blend(f_i: f64, f_j: f64, blend: &SmoothBlend) -> f64 {
    match blend.clamped {
        Clamp::Below => f_i,
        Clamp::Above => f_j,
        Clamp::Inside => {
            let s = blend.factor;
            f_i * (1.0 - s) + s * f_j + blend.mu * s * (1.0 - s)
        }
    }
}

/// Smoothed `min(f_i, f_j)`. Lies in `[min - mu/4, min]`.
pub fn smooth_min(f_i: f64, f_j: f64, mu: f64) -> Result<f64> {
    let blend = switching_factor_min(f_i, f_j, mu)?;
    Ok(min_from_blend(f_i, f_j, &blend))
}

/// Smoothed `max(f_i, f_j)`. Lies in `[max, max + mu/4]`.
pub fn smooth_max(f_i: f64, f_j: f64, mu: f64) -> Result<f64> {
    let blend = switching_factor_max(f_i, f_j, mu)?;
    Ok(max_from_blend(f_i, f_j, &blend))
}

/// Partial derivatives `(∂P/∂f_i, ∂P/∂f_j)` of a blend, valid for both the
/// min and max variants.
pub fn blend_partials(blend: &SmoothBlend) -> (f64, f64) {
    match blend.clamped {
        Clamp::Below => (1.0, 0.0),
        Clamp::Above => (0.0, 1.0),
        Clamp::Inside => (blend.weight_first, blend.weight_second),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MU: f64 = 0.01;

    #[test]
    fn min_factor_examples() {
        let b = switching_factor_min(0.0, 0.0, MU).unwrap();
        assert_eq!(b.factor, 0.5);
        assert_eq!(b.clamped, Clamp::Inside);

        let b = switching_factor_min(1.0, 0.5, MU).unwrap();
        assert_eq!(b.factor, 1.0);
        assert_eq!(b.clamped, Clamp::Above);

        let b = switching_factor_min(1.0, 1.005, MU).unwrap();
        assert!((b.factor - 0.25).abs() < 1e-12);
        assert_eq!(b.clamped, Clamp::Inside);
    }

    #[test]
    fn max_factor_examples() {
        assert_eq!(switching_factor_max(0.0, 0.0, MU).unwrap().factor, 0.5);
        let b = switching_factor_max(0.0, 5.0, MU).unwrap();
        assert_eq!((b.factor, b.clamped), (1.0, Clamp::Above));
        let b = switching_factor_max(0.0, 0.0025, MU).unwrap();
        assert!((b.factor - 0.625).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        for &(a, b) in &[(0.0, 0.0), (1.0, 1.004), (-3.0, 2.0), (0.3, 0.2999)] {
            let s = switching_factor_min(a, b, MU).unwrap();
            assert_eq!(s.weight_first + s.weight_second, 1.0);
        }
    }

    #[test]
    fn min_values() {
        assert!((smooth_min(0.0, 0.0, MU).unwrap() + 0.0025).abs() < 1e-15);
        assert_eq!(smooth_min(5.0, 1.0, MU).unwrap(), 1.0);
        // zeta = 0.25: 1.0 * 0.75 + 0.25 * 1.005 - 0.01 * 0.25 * 0.75
        let expected = 0.75 + 0.25 * 1.005 - 0.01 * 0.1875;
        assert!((expected - 0.999375_f64).abs() < 1e-12);
        assert!((smooth_min(1.0, 1.005, MU).unwrap() - 0.999375).abs() < 1e-12);
    }

    #[test]
    fn max_values() {
        assert!((smooth_max(0.0, 0.0, MU).unwrap() - 0.0025).abs() < 1e-15);
        assert_eq!(smooth_max(-3.0, 2.0, MU).unwrap(), 2.0);
        assert!((smooth_max(-0.0025, 0.0, MU).unwrap() - 0.00140625).abs() < 1e-15);
    }

    #[test]
    fn partials_match_finite_differences() {
        let h = 1e-7;
        for &(a, b) in &[(0.0, 0.0), (1.0, 1.005)] {
            let blend = switching_factor_min(a, b, MU).unwrap();
            let (da, db) = blend_partials(&blend);
            let fd_a = (smooth_min(a + h, b, MU).unwrap() - smooth_min(a - h, b, MU).unwrap()) / (2.0 * h);
            let fd_b = (smooth_min(a, b + h, MU).unwrap() - smooth_min(a, b - h, MU).unwrap()) / (2.0 * h);
            assert!((da - fd_a).abs() < 1e-7, "{da} vs {fd_a}");
            assert!((db - fd_b).abs() < 1e-7, "{db} vs {fd_b}");
        }
        let blend = switching_factor_min(0.0, 0.0, MU).unwrap();
        assert_eq!(blend_partials(&blend), (0.5, 0.5));
        let blend = switching_factor_min(1.0, 1.005, MU).unwrap();
        let (da, db) = blend_partials(&blend);
        assert!((da - 0.75).abs() < 1e-12 && (db - 0.25).abs() < 1e-12);
        let blend = switching_factor_max(0.0, 5.0, MU).unwrap();
        assert_eq!(blend_partials(&blend), (0.0, 1.0));
    }

    #[test]
    fn rejects_non_positive_mu() {
        assert!(smooth_min(0.0, 1.0, 0.0).is_err());
        assert!(smooth_max(0.0, 1.0, -1.0).is_err());
        assert!(switching_factor_min(0.0, 1.0, f64::NAN).is_err());
    }
}
