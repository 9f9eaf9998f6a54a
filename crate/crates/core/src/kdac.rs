//! The KDAC activation: a smoothed `max(min(tanh x, β₁x), β₂x)` with
//! trainable slopes β₁, β₂ and a fixed smoothing band μ.
//!
//! Evaluation follows the nesting `P_max(P_min(β₁x, tanh x), β₂x)`. Because
//! each blend's partials reduce to its weights (see [`crate::smooth`]), the
//! gradients have a closed form in the two switching factors ζ (inner) and
//! ξ (outer):
//!
//! ```text
//! ∂y/∂x  = (1-ξ)[(1-ζ)β₁ + ζ sech²x] + ξβ₂
//! ∂y/∂β₁ = (1-ξ)(1-ζ)x
//! ∂y/∂β₂ = ξx
//! ```

use crate::error::{config, shape, Result};
use crate::roots;
use crate::smooth::{self, Clamp, SmoothBlend};
use crate::tensor::Tensor;

/// Smoothing band used when none is given.
pub const DEFAULT_MU: f64 = 0.01;
pub const DEFAULT_BETA1: f64 = 1.2;
pub const DEFAULT_BETA2: f64 = 0.8;
/// Lower bound applied to every slope after an optimizer step.
pub const MIN_BETA: f64 = 1e-3;

/// Per-feature slopes and the shared smoothing band.
#[derive(Debug, Clone, PartialEq)]
pub struct KdacParams {
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub mu: f64,
}

impl KdacParams {
    pub fn new(beta1: Vec<f64>, beta2: Vec<f64>, mu: f64) -> Result<Self> {
        let p = KdacParams { beta1, beta2, mu };
        p.validate()?;
        Ok(p)
    }

    /// `features` copies of the same `(beta1, beta2)` pair.
    pub fn uniform(features: usize, beta1: f64, beta2: f64, mu: f64) -> Result<Self> {
        Self::new(vec![beta1; features], vec![beta2; features], mu)
    }

    pub fn features(&self) -> usize {
        self.beta1.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta1.len() != self.beta2.len() {
            return shape(format!(
                "beta1 has {} features but beta2 has {}",
                self.beta1.len(),
                self.beta2.len()
            ));
        }
        for &b in self.beta1.iter().chain(&self.beta2) {
            check_slope(b)?;
        }
        check_mu(self.mu)
    }

    /// Clamps every slope to `[MIN_BETA, ∞)`.
    pub fn enforce_positive(&mut self) {
        for b in self.beta1.iter_mut().chain(self.beta2.iter_mut()) {
            if b.is_nan() || *b < MIN_BETA {
                *b = MIN_BETA;
            }
        }
    }

    pub fn min_beta(&self) -> f64 {
        self.beta1
            .iter()
            .chain(&self.beta2)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_slope(b: f64) -> Result<()> {
    if b.is_finite() && b > 0.0 {
        Ok(())
    } else {
        config(format!("KDAC slopes must be finite and > 0, got {b}"))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu.is_finite() && mu > 0.0 {
        Ok(())
    } else {
        config(format!("KDAC mu must be finite and > 0, got {mu}"))
    }
}

fn check_scalar(beta1: f64, beta2: f64, mu: f64) -> Result<()> {
    check_slope(beta1)?;
    check_slope(beta2)?;
    check_mu(mu)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdacGradients {
    pub d_x: f64,
    pub d_beta1: f64,
    pub d_beta2: f64,
}

/// Both blends of one evaluation, plus the output.
#[derive(Debug, Clone, Copy)]
pub struct KdacTrace {
    pub inner: SmoothBlend,
    pub outer: SmoothBlend,
    pub y: f64,
}

impl KdacTrace {
    /// Identifies the piece of the function `x` falls on; the function is
    /// C^∞ inside a piece and only C¹ across pieces.
    pub fn regime(&self) -> (Clamp, Clamp) {
        (self.inner.clamped, self.outer.clamped)
    }
}

/// Evaluates with already validated parameters.
#[inline]
pub(crate) fn trace_unchecked(x: f64, beta1: f64, beta2: f64, mu: f64) -> KdacTrace {
    let f1 = beta1 * x;
    let f2 = x.tanh();
    let f3 = beta2 * x;
    let inner = smooth::switching_factor_min(f1, f2, mu).expect("mu validated");
    let p_min = smooth::min_from_blend(f1, f2, &inner);
    let outer = smooth::switching_factor_max(p_min, f3, mu).expect("mu validated");
    let y = smooth::max_from_blend(p_min, f3, &outer);
    KdacTrace { inner, outer, y }
}

#[inline]
pub(crate) fn gradients_from_trace(x: f64, beta1: f64, beta2: f64, t: &KdacTrace) -> KdacGradients {
    let (w_lin1, w_tanh) = smooth::blend_partials(&t.inner);
    let (w_pmin, w_lin2) = smooth::blend_partials(&t.outer);
    let sech2 = 1.0 - x.tanh().powi(2);
    KdacGradients {
        d_x: w_pmin * (w_lin1 * beta1 + w_tanh * sech2) + w_lin2 * beta2,
        d_beta1: w_pmin * w_lin1 * x,
        d_beta2: w_lin2 * x,
    }
}

pub fn kdac_trace(x: f64, beta1: f64, beta2: f64, mu: f64) -> Result<KdacTrace> {
    check_scalar(beta1, beta2, mu)?;
    if !x.is_finite() {
        return Err(crate::Error::Domain(format!("KDAC input must be finite, got {x}")));
    }
    Ok(trace_unchecked(x, beta1, beta2, mu))
}

/// `P_max(P_min(β₁x, tanh x, μ), β₂x, μ)`.
pub fn kdac_scalar(x: f64, beta1: f64, beta2: f64, mu: f64) -> Result<f64> {
    kdac_trace(x, beta1, beta2, mu).map(|t| t.y)
}

/// Closed-form partials of [`kdac_scalar`] with respect to x, β₁ and β₂.
pub fn kdac_backward(x: f64, beta1: f64, beta2: f64, mu: f64) -> Result<KdacGradients> {
    let t = kdac_trace(x, beta1, beta2, mu)?;
    Ok(gradients_from_trace(x, beta1, beta2, &t))
}

/// The unsmoothed composition `max(min(tanh x, β₁x), β₂x)`.
pub fn hard_composition(x: f64, beta1: f64, beta2: f64) -> f64 {
    x.tanh().min(beta1 * x).max(beta2 * x)
}

fn check_tensor(x: &Tensor, params: &KdacParams) -> Result<()> {
    params.validate()?;
    if x.last_dim() != params.features() {
        return shape(format!(
            "KDAC: input trailing dimension {} does not match {} slope features",
            x.last_dim(),
            params.features()
        ));
    }
    if !x.all_finite() {
        return Err(crate::Error::Domain("KDAC input contains non-finite values".into()));
    }
    Ok(())
}

/// Elementwise KDAC over a tensor whose trailing axis indexes features; the
/// slopes for feature `k` are broadcast over all leading axes.
pub fn kdac_forward_tensor(x: &Tensor, params: &KdacParams) -> Result<Tensor> {
    check_tensor(x, params)?;
    let e = params.features();
    let data = x
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let k = i % e;
            trace_unchecked(v, params.beta1[k], params.beta2[k], params.mu).y
        })
        .collect();
    Tensor::new(x.shape().to_vec(), data)
}

/// Gradients produced by [`kdac_backward_tensor`].
#[derive(Debug, Clone, PartialEq)]
pub struct KdacTensorGrads {
    pub dx: Tensor,
    pub dbeta1: Vec<f64>,
    pub dbeta2: Vec<f64>,
}

/// Reverse-mode step: scales the local partials by `upstream` and sums the
/// slope gradients over the broadcast axes.
pub fn kdac_backward_tensor(x: &Tensor, upstream: &Tensor, params: &KdacParams) -> Result<KdacTensorGrads> {
    check_tensor(x, params)?;
    x.same_shape(upstream, "KDAC backward upstream")?;
    let e = params.features();
    let mut dbeta1 = vec![0.0; e];
    let mut dbeta2 = vec![0.0; e];
    let mut dx = Vec::with_capacity(x.len());
    for (i, (&v, &up)) in x.data().iter().zip(upstream.data()).enumerate() {
        let k = i % e;
        let (b1, b2) = (params.beta1[k], params.beta2[k]);
        let t = trace_unchecked(v, b1, b2, params.mu);
        let g = gradients_from_trace(v, b1, b2, &t);
        dx.push(up * g.d_x);
        dbeta1[k] += up * g.d_beta1;
        dbeta2[k] += up * g.d_beta2;
    }
    Ok(KdacTensorGrads {
        dx: Tensor::new(x.shape().to_vec(), dx)?,
        dbeta1,
        dbeta2,
    })
}

/// Positive crossing points of the unsmoothed pieces.
///
/// `k` is where `β₁x = tanh x` (present only for β₁ < 1). `t` is the
/// magnitude of the nonzero zero of `β₂x - min(tanh x, β₁x)` nearest the
/// origin (present only for β₂ < 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoints {
    pub k: Option<f64>,
    pub t: Option<f64>,
}

const ROOT_X_TOL: f64 = 1e-13;
const ROOT_SCAN_SAMPLES: usize = 4000;
const ROOT_MIN_OFFSET: f64 = 1e-9;

pub fn find_breakpoints(beta1: f64, beta2: f64) -> Result<Breakpoints> {
    check_slope(beta1)?;
    check_slope(beta2)?;

    let k = if beta1 < 1.0 {
        let g = |x: f64| beta1 * x - x.tanh();
        roots::first_root_from(
            g,
            0.0,
            1.0 / beta1 + 1.0,
            ROOT_MIN_OFFSET,
            ROOT_SCAN_SAMPLES,
            ROOT_X_TOL,
        )?
    } else {
        None
    };

    let t = if beta2 < 1.0 {
        let m = |x: f64| beta2 * x - x.tanh().min(beta1 * x);
        let reach = 1.0 / beta2 + 1.0;
        let right = roots::first_root_from(m, 0.0, reach, ROOT_MIN_OFFSET, ROOT_SCAN_SAMPLES, ROOT_X_TOL)?;
        let left = roots::first_root_from(m, 0.0, -reach, ROOT_MIN_OFFSET, ROOT_SCAN_SAMPLES, ROOT_X_TOL)?;
        match (right, left) {
            (Some(r), Some(l)) => Some(r.abs().min(l.abs())),
            (r, l) => r.or(l).map(f64::abs),
        }
    } else {
        None
    };

    Ok(Breakpoints { k, t })
}

/// Limiting slopes `(x → -∞, x → +∞)`: the negative side follows the
/// shallower line, the positive side follows β₂x.
pub fn asymptotic_slopes(beta1: f64, beta2: f64) -> (f64, f64) {
    (beta1.min(beta2), beta2)
}

/// One point of a sampled activation curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub x: f64,
    pub y: f64,
    pub dy_dx: f64,
}

/// Evenly spaced abscissae from `x_min` to `x_max` inclusive.
pub fn linspace(x_min: f64, x_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return config(format!("curve needs at least 2 steps, got {steps}"));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
        return config(format!("curve range [{x_min}, {x_max}] is empty or not finite"));
    }
    let dx = (x_max - x_min) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| if i == steps - 1 { x_max } else { x_min + i as f64 * dx })
        .collect())
}

pub fn sample_curve(beta1: f64, beta2: f64, mu: f64, x_min: f64, x_max: f64, steps: usize) -> Result<Vec<CurveSample>> {
    check_scalar(beta1, beta2, mu)?;
    linspace(x_min, x_max, steps)?
        .into_iter()
        .map(|x| {
            let t = trace_unchecked(x, beta1, beta2, mu);
            let g = gradients_from_trace(x, beta1, beta2, &t);
            Ok(CurveSample {
                x,
                y: t.y,
                dy_dx: g.d_x,
            })
        })
        .collect()
}
