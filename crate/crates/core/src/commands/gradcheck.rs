//! `kdac-kit gradcheck`: every derivative in the crate against finite
//! differences, plus the bound and spot-value oracles of the smoothing and
//! KDAC layers.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::RunConfig;
use super::write_output;
use crate::activations::ActivationKind;
use crate::error::Result;
use crate::fdcheck::{self, piecewise_difference, relative_error, FD_STEP};
use crate::kdac::{self, hard_composition, kdac_backward, kdac_scalar};
use crate::nn::loss::{mse_loss, softmax_cross_entropy};
use crate::numfmt::fmt17;
use crate::smooth::{self, smooth_max, smooth_min};
use crate::tensor::Tensor;

/// Substitute for `ActivationKind::derivative`, used to exercise the
/// failure path.
pub type DerivativeFn = dyn Fn(&ActivationKind, f64) -> f64;

pub const SCALAR_TOL: f64 = 1e-6;
pub const ONE_SIDED_TOL: f64 = 1e-4;
pub const MLP_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub family: &'static str,
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub points: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GradcheckReport {
    pub checks: Vec<CheckOutcome>,
}

impl GradcheckReport {
    fn push(&mut self, family: &'static str, name: impl Into<String>, worst: f64, tolerance: f64, points: usize) {
        self.checks.push(CheckOutcome {
            family,
            name: name.into(),
            worst,
            tolerance,
            points,
            passed: worst <= tolerance,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn families(&self) -> Vec<&'static str> {
        let mut f: Vec<_> = self.checks.iter().map(|c| c.family).collect();
        f.dedup();
        f
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut s = cfg.header_comment();
        s.push_str("family,check,status,worst_error,tolerance,points\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.family,
                c.name,
                if c.passed { "PASS" } else { "FAIL" },
                fmt17(c.worst),
                fmt17(c.tolerance),
                c.points
            );
        }
        s
    }
}

/// Runs all checks with the real derivatives and writes the report to
/// `cfg.out` when set.
pub fn run_gradcheck(cfg: &RunConfig) -> Result<GradcheckReport> {
    let report = run_checks(cfg, &|k: &ActivationKind, x| k.derivative(x))?;
    if let Some(path) = &cfg.out {
        write_output(path, &report.render(cfg))?;
    }
    Ok(report)
}

/// Runs all checks, taking scalar activation derivatives from `derivative`.
pub fn run_checks(cfg: &RunConfig, derivative: &DerivativeFn) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let mut report = GradcheckReport::default();
    scalar_family(cfg, derivative, &mut rng, &mut report);
    smoothing_family(&mut rng, &mut report)?;
    kdac_family(&mut rng, &mut report)?;
    harness_family(cfg, &mut rng, &mut report)?;
    Ok(report)
}

fn scalar_family(cfg: &RunConfig, derivative: &DerivativeFn, rng: &mut ChaCha8Rng, report: &mut GradcheckReport) {
    let mut points: Vec<f64> = (0..=2400).map(|i| -6.0 + i as f64 * 0.005).collect();
    points.extend((0..2000).map(|_| rng.random_range(-6.0..6.0)));
    for kind in &cfg.activations {
        let mut pts = points.clone();
        let edges = fdcheck::regime_edges(|x| kind.regime(x), -6.0, 6.0, 1e-3);
        pts.extend(fdcheck::edge_probes(&edges, FD_STEP));
        let c = fdcheck::check_activation(kind, |x| derivative(kind, x), &pts);
        report.push("scalar_derivative", kind.tag(), c.worst_central, SCALAR_TOL, c.central);
        report.push(
            "scalar_derivative",
            format!("{}/one_sided", kind.tag()),
            c.worst_one_sided,
            ONE_SIDED_TOL,
            c.one_sided,
        );
    }
}

fn random_triple(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    let mu = 10f64.powf(rng.random_range(-4.0..0.0));
    let a = rng.random_range(-10.0..10.0);
    // half the pairs land inside the band
    let b = if rng.random_bool(0.5) {
        a + rng.random_range(-mu..mu)
    } else {
        rng.random_range(-10.0..10.0)
    };
    (a, b, mu)
}

fn smoothing_family(rng: &mut ChaCha8Rng, report: &mut GradcheckReport) -> Result<()> {
    const N: usize = 100_000;
    let mut bound = 0.0f64;
    let mut exact = 0.0f64;
    let mut exact_n = 0;
    for _ in 0..N {
        let (a, b, mu) = random_triple(rng);
        let lo = smooth_min(a, b, mu)?;
        let hi = smooth_max(a, b, mu)?;
        let scale = a.abs().max(b.abs()).max(mu);
        // amount by which each bound is violated, relative to the scale
        let slack = 1e-15 * scale;
        bound = bound
            .max((lo - a.min(b) - slack).max(0.0))
            .max((a.min(b) - mu / 4.0 - lo - slack).max(0.0))
            .max((a.max(b) - hi - slack).max(0.0))
            .max((hi - a.max(b) - mu / 4.0 - slack).max(0.0));
        if (a - b).abs() >= mu {
            exact_n += 1;
            exact = exact.max(relative_error(lo, a.min(b), f64::MIN_POSITIVE));
            exact = exact.max(relative_error(hi, a.max(b), f64::MIN_POSITIVE));
        }
    }
    report.push("smoothing", "bounds", bound, 0.0, N);
    report.push("smoothing", "exact_branch", exact, 1e-15, exact_n);

    // one-sided slopes in the first argument at |a - b| = mu
    let mut c1 = 0.0f64;
    let h = 1e-5;
    const EDGES: usize = 1000;
    for _ in 0..EDGES {
        let b = rng.random_range(-5.0..5.0);
        let mu = rng.random_range(0.01..1.0);
        for sign in [-1.0, 1.0] {
            let edge = b + sign * mu;
            for f in [smooth_min as fn(f64, f64, f64) -> Result<f64>, smooth_max] {
                let g = |a: f64| f(a, b, mu).expect("mu > 0");
                let fwd = (-3.0 * g(edge) + 4.0 * g(edge + h) - g(edge + 2.0 * h)) / (2.0 * h);
                let bwd = (3.0 * g(edge) - 4.0 * g(edge - h) + g(edge - 2.0 * h)) / (2.0 * h);
                c1 = c1.max((fwd - bwd).abs());
            }
        }
    }
    report.push("smoothing", "c1_band_edge", c1, 1e-6, EDGES * 4);

    // weights returned by blend_partials against finite differences
    let mut partial = 0.0f64;
    let mut partial_n = 0;
    for _ in 0..10_000 {
        let (a, b, mu) = random_triple(rng);
        let mu = mu.max(1e-2);
        for max in [false, true] {
            let eval = |a: f64, b: f64| {
                if max {
                    smooth_max(a, b, mu)
                } else {
                    smooth_min(a, b, mu)
                }
                .expect("mu > 0")
            };
            let regime = |a: f64, b: f64| {
                let blend = if max {
                    smooth::switching_factor_max(a, b, mu)
                } else {
                    smooth::switching_factor_min(a, b, mu)
                };
                blend.expect("mu > 0").clamped as u32
            };
            let blend = if max {
                smooth::switching_factor_max(a, b, mu)?
            } else {
                smooth::switching_factor_min(a, b, mu)?
            };
            let (wa, wb) = smooth::blend_partials(&blend);
            if let Some((n, _)) = piecewise_difference(|t| eval(t, b), |t| regime(t, b), a, FD_STEP) {
                partial = partial.max(relative_error(wa, n, 1.0));
                partial_n += 1;
            }
            if let Some((n, _)) = piecewise_difference(|t| eval(a, t), |t| regime(a, t), b, FD_STEP) {
                partial = partial.max(relative_error(wb, n, 1.0));
                partial_n += 1;
            }
        }
    }
    report.push("smoothing", "blend_partials", partial, SCALAR_TOL, partial_n);
    Ok(())
}

fn kdac_family(rng: &mut ChaCha8Rng, report: &mut GradcheckReport) -> Result<()> {
    let (b1, b2, mu) = (kdac::DEFAULT_BETA1, kdac::DEFAULT_BETA2, kdac::DEFAULT_MU);
    let spot = [
        (kdac_scalar(0.0, b1, b2, mu)? - 0.00140625).abs() / 1e-12,
        (kdac_scalar(10.0, b1, b2, mu)? - 8.0).abs(),
        (kdac_scalar(-10.0, b1, b2, mu)? + 8.0).abs(),
        (kdac_backward(0.0, b1, b2, mu)?.d_x - 0.9125).abs() / 1e-9,
    ];
    // each entry is scaled so that 1 is its tolerance; tail values are exact
    let spot_ok = spot[0] <= 1.0 && spot[1] == 0.0 && spot[2] == 0.0 && spot[3] <= 1.0;
    report.push(
        "kdac",
        "spot_values",
        if spot_ok {
            0.0
        } else {
            spot.iter().cloned().fold(0.0, f64::max)
        },
        0.0,
        4,
    );

    const N: usize = 10_000;
    let mut worst = [0.0f64; 3];
    let mut worst_one_sided = 0.0f64;
    let mut counts = [0usize; 3];
    let mut one_sided = 0;
    let mut cases = Vec::with_capacity(N);
    for i in 0..N {
        let b1 = rng.random_range(0.1..2.0);
        let b2 = rng.random_range(0.1..2.0);
        let mu = [0.01, 0.1, 0.5][rng.random_range(0..3)];
        cases.push((rng.random_range(-6.0..6.0), b1, b2, mu));
        // every 100th parameter draw also probes its band edges in x
        if i % 100 == 0 {
            let kind = ActivationKind::Kdac {
                beta1: b1,
                beta2: b2,
                mu,
            };
            let edges = fdcheck::regime_edges(|x| kind.regime(x), -6.0, 6.0, 1e-3);
            cases.extend(
                fdcheck::edge_probes(&edges, FD_STEP)
                    .into_iter()
                    .map(|x| (x, b1, b2, mu)),
            );
        }
    }
    for &(x, b1, b2, mu) in &cases {
        let g = kdac_backward(x, b1, b2, mu)?;
        let regime = |x: f64, b1: f64, b2: f64| {
            ActivationKind::Kdac {
                beta1: b1,
                beta2: b2,
                mu,
            }
            .regime(x)
        };
        let f = |x: f64, b1: f64, b2: f64| kdac_scalar(x, b1, b2, mu).expect("valid");
        let probes: [(f64, Option<(f64, fdcheck::Stencil)>); 3] = [
            (
                g.d_x,
                piecewise_difference(|t| f(t, b1, b2), |t| regime(t, b1, b2), x, FD_STEP),
            ),
            (
                g.d_beta1,
                piecewise_difference(|t| f(x, t, b2), |t| regime(x, t, b2), b1, FD_STEP),
            ),
            (
                g.d_beta2,
                piecewise_difference(|t| f(x, b1, t), |t| regime(x, b1, t), b2, FD_STEP),
            ),
        ];
        for (i, (analytic, numeric)) in probes.into_iter().enumerate() {
            if let Some((n, stencil)) = numeric {
                let e = relative_error(analytic, n, 1.0);
                if stencil == fdcheck::Stencil::Central {
                    worst[i] = worst[i].max(e);
                    counts[i] += 1;
                } else {
                    worst_one_sided = worst_one_sided.max(e);
                    one_sided += 1;
                }
            }
        }
    }
    for (i, name) in ["grad_x", "grad_beta1", "grad_beta2"].into_iter().enumerate() {
        report.push("kdac", name, worst[i], SCALAR_TOL, counts[i]);
    }
    report.push("kdac", "grad_one_sided", worst_one_sided, ONE_SIDED_TOL, one_sided);

    let mut excess = 0.0f64;
    let grid: Vec<f64> = (0..=20_000).map(|i| -10.0 + i as f64 * 1e-3).collect();
    for _ in 0..10 {
        let b1 = rng.random_range(0.1..2.0);
        let b2 = rng.random_range(0.1..2.0);
        for mu in [1e-4, 1e-2, 0.5] {
            for &x in &grid {
                let dev = (kdac_scalar(x, b1, b2, mu)? - hard_composition(x, b1, b2)).abs();
                excess = excess.max(dev / (mu / 2.0));
            }
        }
    }
    // ratio of the worst deviation to mu/2
    report.push("kdac", "mu_over_2_bound", excess, 1.0, 10 * 3 * grid.len());
    Ok(())
}

fn harness_family(cfg: &RunConfig, rng: &mut ChaCha8Rng, report: &mut GradcheckReport) -> Result<()> {
    for kind in &cfg.activations {
        let c = fdcheck::check_mlp_gradients(*kind, &[2, 8, 8, 1], cfg.train.seed, 4)?;
        report.push("mlp_end_to_end", kind.tag(), c.worst, MLP_TOL, c.params);
    }

    let (rows, cols) = (4, 3);
    let out = Tensor::new(
        vec![rows, cols],
        (0..rows * cols).map(|_| rng.random_range(-3.0..3.0)).collect(),
    )?;
    let target = Tensor::new(
        vec![rows, cols],
        (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )?;
    let labels: Vec<usize> = (0..rows).map(|_| rng.random_range(0..cols)).collect();
    let (_, g_mse) = mse_loss(&out, &target)?;
    let (_, g_ce) = softmax_cross_entropy(&out, &labels)?;
    let mut worst = [0.0f64; 2];
    for i in 0..rows * cols {
        let shifted = |d: f64| {
            let mut t = out.clone();
            t.data_mut()[i] += d;
            t
        };
        let (p, m) = (shifted(FD_STEP), shifted(-FD_STEP));
        let n_mse = (mse_loss(&p, &target)?.0 - mse_loss(&m, &target)?.0) / (2.0 * FD_STEP);
        let n_ce = (softmax_cross_entropy(&p, &labels)?.0 - softmax_cross_entropy(&m, &labels)?.0) / (2.0 * FD_STEP);
        worst[0] = worst[0].max(relative_error(g_mse.data()[i], n_mse, 1.0));
        worst[1] = worst[1].max(relative_error(g_ce.data()[i], n_ce, 1.0));
    }
    report.push("loss", "mse", worst[0], SCALAR_TOL, rows * cols);
    report.push("loss", "softmax_cross_entropy", worst[1], SCALAR_TOL, rows * cols);
    Ok(())
}
