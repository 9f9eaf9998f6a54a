//! Finite-difference verification of analytic derivatives.
//!
//! Every activation here is piecewise smooth, so a stencil is only trusted
//! when all of its samples fall on the same piece (same `regime` id). Near a
//! piece boundary a second-order one-sided stencil is used instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::activations::ActivationKind;
use crate::error::{Error, Result};
use crate::nn::mlp::MlpModel;
use crate::nn::train::{loss_and_output_grad, Dataset, Targets};
use crate::tensor::Tensor;

/// Default step for all checks.
pub const FD_STEP: f64 = 1e-5;

/// Gradients smaller than this are compared in absolute terms.
pub const GRAD_FLOOR: f64 = 1e-3;

/// Half-width of the neighbourhood around each pre-activation that must lie
/// on a single piece before an end-to-end check uses the input.
pub const KINK_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    Central,
    Forward,
    Backward,
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Numerical derivative of `f` at `x` using only samples on `x`'s piece.
/// Returns `None` when neither a central nor a one-sided stencil fits.
pub fn piecewise_difference(
    f: impl Fn(f64) -> f64,
    regime: impl Fn(f64) -> u32,
    x: f64,
    h: f64,
) -> Option<(f64, Stencil)> {
    let r = regime(x);
    if regime(x - h) == r && regime(x + h) == r {
        return Some(((f(x + h) - f(x - h)) / (2.0 * h), Stencil::Central));
    }
    if regime(x + h) == r && regime(x + 2.0 * h) == r {
        let d = (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
        return Some((d, Stencil::Forward));
    }
    if regime(x - h) == r && regime(x - 2.0 * h) == r {
        let d = (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
        return Some((d, Stencil::Backward));
    }
    None
}

/// Locations where `regime` changes on `[lo, hi]`, found by scanning with
/// `step` and bisecting each change down to `1e-13`.
pub fn regime_edges(regime: impl Fn(f64) -> u32, lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut edges = Vec::new();
    let n = ((hi - lo) / step).ceil() as usize;
    let mut prev = (lo, regime(lo));
    for i in 1..=n {
        let x = (lo + i as f64 * step).min(hi);
        let r = regime(x);
        if r != prev.1 {
            let (mut a, mut b) = (prev.0, x);
            while b - a > 1e-13 {
                let m = 0.5 * (a + b);
                if regime(m) == prev.1 {
                    a = m;
                } else {
                    b = m;
                }
            }
            edges.push(b);
        }
        prev = (x, r);
    }
    edges
}

/// Points on both sides of each edge, closer than one step.
pub fn edge_probes(edges: &[f64], h: f64) -> Vec<f64> {
    edges
        .iter()
        .flat_map(|&e| [-1.5, -0.5, 0.0, 0.5, 1.5].map(|f| e + f * h))
        .collect()
}

/// Worst-case agreement between an analytic derivative and finite
/// differences over a set of points.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScalarCheck {
    /// Largest error over central stencils.
    pub worst_central: f64,
    /// Largest error over one-sided stencils.
    pub worst_one_sided: f64,
    /// Point where the overall largest error occurred.
    pub worst_at: f64,
    pub central: usize,
    pub one_sided: usize,
    pub skipped: usize,
}

impl ScalarCheck {
    pub fn worst(&self) -> f64 {
        self.worst_central.max(self.worst_one_sided)
    }

    pub fn checked(&self) -> usize {
        self.central + self.one_sided
    }
}

/// Compares `df` against finite differences of `f` at every point; errors
/// are relative with magnitudes below 1 compared absolutely.
pub fn check_derivative(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    regime: impl Fn(f64) -> u32,
    points: &[f64],
    h: f64,
) -> ScalarCheck {
    let mut out = ScalarCheck::default();
    for &x in points {
        let Some((numeric, stencil)) = piecewise_difference(&f, &regime, x, h) else {
            out.skipped += 1;
            continue;
        };
        let err = relative_error(df(x), numeric, 1.0);
        if err > out.worst() || out.checked() == 0 {
            out.worst_at = x;
        }
        match stencil {
            Stencil::Central => {
                out.central += 1;
                out.worst_central = out.worst_central.max(err);
            }
            _ => {
                out.one_sided += 1;
                out.worst_one_sided = out.worst_one_sided.max(err);
            }
        }
    }
    out
}

/// Checks `kind.derivative` (or a substitute) on `points`.
pub fn check_activation(kind: &ActivationKind, derivative: impl Fn(f64) -> f64, points: &[f64]) -> ScalarCheck {
    check_derivative(|x| kind.value(x), derivative, |x| kind.regime(x), points, FD_STEP)
}

/// Result of a full-parameter gradient check of an MLP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpCheck {
    /// Largest `relative_error(analytic, numeric, GRAD_FLOOR)` over all parameters.
    pub worst: f64,
    pub params: usize,
    /// Inputs rejected because a stencil would cross a piece boundary.
    pub resamples: usize,
}

/// Piece ids of every hidden unit for input `x`.
fn hidden_regimes(model: &MlpModel, x: &Tensor, shift: f64) -> Result<Vec<u32>> {
    let pre = model.hidden_preactivations(x)?;
    let mut ids = Vec::new();
    for (l, z) in pre.iter().enumerate() {
        let width = z.last_dim();
        for (i, &v) in z.data().iter().enumerate() {
            let kind = match *model.activation() {
                ActivationKind::Kdac { mu, .. } => {
                    let p = &model.kdac[l];
                    ActivationKind::Kdac {
                        beta1: p.beta1[i % width],
                        beta2: p.beta2[i % width],
                        mu,
                    }
                }
                k => k,
            };
            ids.push(kind.regime(v + shift));
        }
    }
    Ok(ids)
}

fn mse_value(model: &MlpModel, data: &Dataset) -> Result<f64> {
    loss_and_output_grad(model, data).map(|(l, _)| l)
}

const MAX_ATTEMPTS: usize = 200;

/// Builds a Glorot-initialised network with `dims` and `kind`, draws a batch
/// of inputs in [-2, 2] and targets in [-1, 1], and compares the backprop
/// gradient of the MSE loss with central differences for every parameter.
pub fn check_mlp_gradients(kind: ActivationKind, dims: &[usize], seed: u64, batch: usize) -> Result<MlpCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = MlpModel::new(dims, kind, &mut rng)?;
    let (n_in, n_out) = (base.input_dim(), base.output_dim());
    let h = FD_STEP;

    'attempt: for attempt in 0..MAX_ATTEMPTS {
        let x = Tensor::new(
            vec![batch, n_in],
            (0..batch * n_in).map(|_| rng.random_range(-2.0..2.0)).collect(),
        )?;
        let y = Tensor::new(
            vec![batch, n_out],
            (0..batch * n_out).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )?;
        let reference = hidden_regimes(&base, &x, 0.0)?;
        if hidden_regimes(&base, &x, -KINK_MARGIN)? != reference || hidden_regimes(&base, &x, KINK_MARGIN)? != reference
        {
            continue;
        }
        let data = Dataset::new(x.clone(), Targets::Real(y))?;
        let (_, upstream) = loss_and_output_grad(&base, &data)?;
        let grads = base.backward(&x, &upstream)?;
        let analytic: Vec<f64> = grads.slices().iter().flat_map(|s| s.iter().copied()).collect();

        let mut model = base.clone();
        let mut worst = 0.0f64;
        let mut index = 0;
        let n_slices = model.params_mut().len();
        for s in 0..n_slices {
            let len = model.params_mut()[s].len();
            for j in 0..len {
                let original = model.params_mut()[s][j];
                model.params_mut()[s][j] = original + h;
                let plus = mse_value(&model, &data)?;
                let plus_ok = hidden_regimes(&model, &x, 0.0)? == reference;
                model.params_mut()[s][j] = original - h;
                let minus = mse_value(&model, &data)?;
                let minus_ok = hidden_regimes(&model, &x, 0.0)? == reference;
                model.params_mut()[s][j] = original;
                if !(plus_ok && minus_ok) {
                    continue 'attempt;
                }
                let numeric = (plus - minus) / (2.0 * h);
                worst = worst.max(relative_error(analytic[index], numeric, GRAD_FLOOR));
                index += 1;
            }
        }
        return Ok(MlpCheck {
            worst,
            params: index,
            resamples: attempt,
        });
    }
    Err(Error::Domain(format!(
        "no input batch kept every stencil on one piece after {MAX_ATTEMPTS} attempts"
    )))
}
