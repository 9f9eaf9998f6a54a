//! `kdac-kit timing`: nanoseconds per scalar forward call, as the median and
//! 95th percentile over timed batches.

use std::fmt::Write as _;
use std::hint::black_box;
use std::time::{Duration, Instant};

use super::config::RunConfig;
use super::write_output;
use crate::activations::ActivationKind;
use crate::error::Result;
use crate::numfmt::{csv_field, fmt17};

/// Calls per timed batch.
pub const BATCH: u64 = 10_000;
/// Untimed batches run before measuring each activation.
pub const WARMUP_BATCHES: u64 = 50;
/// Busy time spent before the first measurement so clocks settle.
pub const SPIN_UP: Duration = Duration::from_millis(200);

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub activation: ActivationKind,
    pub median_ns: f64,
    pub p95_ns: f64,
    pub calls: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingReport {
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    pub fn row(&self, tag: &str) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.activation.tag() == tag)
    }

    /// Median KDAC time over median ReLU time, when both were timed.
    pub fn kdac_relu_ratio(&self) -> Option<f64> {
        Some(self.row("kdac")?.median_ns / self.row("relu")?.median_ns)
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        let mut s = cfg.header_comment();
        s.push_str("activation,median_ns,p95_ns,calls\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                csv_field(&r.activation.to_string()),
                fmt17(r.median_ns),
                fmt17(r.p95_ns),
                r.calls
            );
        }
        if let Some(ratio) = self.kdac_relu_ratio() {
            let _ = writeln!(s, "# kdac_relu_ratio = {}", fmt17(ratio));
        }
        s
    }
}

/// Fixed inputs spread over the interesting range of every activation.
fn inputs() -> Vec<f64> {
    (0..1024)
        .map(|i| -6.0 + 12.0 * ((i * 617) % 1024) as f64 / 1023.0)
        .collect()
}

fn time_batch(kind: &ActivationKind, xs: &[f64]) -> f64 {
    let start = Instant::now();
    let mut acc = 0.0;
    let mut i = 0;
    for _ in 0..BATCH {
        acc += black_box(kind).value(black_box(xs[i]));
        i = (i + 1) & (xs.len() - 1);
    }
    black_box(acc);
    start.elapsed().as_nanos() as f64 / BATCH as f64
}

/// Nearest-rank percentile of sorted values.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// Times every activation over `calls` calls each. Batches are taken
/// round-robin across activations so slow drifts in machine load affect all
/// of them alike.
pub fn time_activations(kinds: &[ActivationKind], calls: u64) -> Vec<TimingRow> {
    let xs = inputs();
    let start = Instant::now();
    while start.elapsed() < SPIN_UP {
        time_batch(&ActivationKind::Tanh, &xs);
    }
    for kind in kinds {
        for _ in 0..WARMUP_BATCHES {
            time_batch(kind, &xs);
        }
    }
    let batches = calls.div_ceil(BATCH).max(1);
    let mut per_call = vec![Vec::with_capacity(batches as usize); kinds.len()];
    for _ in 0..batches {
        for (kind, times) in kinds.iter().zip(&mut per_call) {
            times.push(time_batch(kind, &xs));
        }
    }
    kinds
        .iter()
        .zip(per_call)
        .map(|(kind, mut times)| {
            times.sort_by(f64::total_cmp);
            TimingRow {
                activation: *kind,
                median_ns: percentile(&times, 0.5),
                p95_ns: percentile(&times, 0.95),
                calls: batches * BATCH,
            }
        })
        .collect()
}

pub fn run_timing(cfg: &RunConfig) -> Result<TimingReport> {
    let report = TimingReport {
        rows: time_activations(&cfg.activations, cfg.calls),
    };
    if let Some(out) = &cfg.out {
        write_output(out, &report.render(cfg))?;
    }
    Ok(report)
}
