//! `kdac-kit bench`: trains every selected activation on one synthetic task
//! for every seed and tabulates mean ± sd of the final metric.
//!
//! Reports are a pure function of the configuration; wall time is kept on
//! [`BenchReport`] but never written to the report files.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use super::config::RunConfig;
use super::write_output;
use crate::activations::ActivationKind;
use crate::error::{Error, Result};
use crate::nn::tasks::{run_experiment, summarize, RepeatSummary};
use crate::numfmt::{csv_field, fmt17};

/// One seed of one activation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub metric: f64,
}

/// Per-seed values of one split of one activation.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitBlock {
    /// `train_loss` or the task's held-out metric name.
    pub split: &'static str,
    pub summary: RepeatSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub activation: ActivationKind,
    /// `None` for seeds whose training diverged.
    pub runs: Vec<(u64, Option<SeedRun>)>,
    pub blocks: Vec<SplitBlock>,
    pub wall_time: Duration,
}

impl BenchRow {
    pub fn diverged(&self) -> usize {
        self.runs.iter().filter(|(_, r)| r.is_none()).count()
    }

    pub fn block(&self, split: &str) -> Option<&SplitBlock> {
        self.blocks.iter().find(|b| b.split == split)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub seeds: Vec<u64>,
    pub metric: &'static str,
    pub direction: &'static str,
    /// Files written, CSV first.
    pub files: Vec<PathBuf>,
}

pub const TRAIN_SPLIT: &str = "train_loss";

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "diverged".to_string(), fmt17)
}

impl BenchReport {
    fn direction_line(&self) -> String {
        format!(
            "# metric {}: {}; {}: lower is better\n",
            self.metric, self.direction, TRAIN_SPLIT
        )
    }

    pub fn to_csv(&self, cfg: &RunConfig) -> String {
        let mut s = cfg.header_comment();
        s.push_str(&self.direction_line());
        s.push_str("activation,split,mean,sd,diverged");
        for seed in &self.seeds {
            let _ = write!(s, ",seed_{seed}");
        }
        s.push('\n');
        for row in &self.rows {
            for b in &row.blocks {
                let _ = write!(
                    s,
                    "{},{},{},{},{}",
                    csv_field(&row.activation.to_string()),
                    b.split,
                    fmt17(b.summary.mean),
                    fmt17(b.summary.sd),
                    b.summary.diverged()
                );
                for (_, v) in &b.summary.per_seed {
                    let _ = write!(s, ",{}", show(*v));
                }
                s.push('\n');
            }
        }
        s
    }

    /// One row per activation, one `mean ± sd` column per split.
    pub fn to_table(&self, cfg: &RunConfig) -> String {
        let mut s = cfg.header_comment();
        s.push_str(&self.direction_line());
        let splits: Vec<&str> = self
            .rows
            .first()
            .map_or(vec![], |r| r.blocks.iter().map(|b| b.split).collect());
        let mut lines = vec![{
            let mut h = vec!["activation".to_string()];
            h.extend(splits.iter().map(|s| format!("{s} (mean ± sd)")));
            h.push("diverged".into());
            h
        }];
        for row in &self.rows {
            let mut l = vec![row.activation.label()];
            for b in &row.blocks {
                l.push(format!("{} ± {}", fmt17(b.summary.mean), fmt17(b.summary.sd)));
            }
            l.push(format!("{}/{}", row.diverged(), row.runs.len()));
            lines.push(l);
        }
        let cols = lines[0].len();
        let widths: Vec<usize> = (0..cols)
            .map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        for l in &lines {
            let cells: Vec<String> = l
                .iter()
                .zip(&widths)
                .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
                .collect();
            s.push_str(cells.join("  ").trim_end());
            s.push('\n');
        }
        s
    }
}

pub fn run_bench(cfg: &RunConfig) -> Result<BenchReport> {
    let spec = cfg.task_spec();
    let mut rows = Vec::with_capacity(cfg.activations.len());
    for &activation in &cfg.activations {
        let start = Instant::now();
        let mut runs = Vec::with_capacity(cfg.seeds.len());
        for &seed in &cfg.seeds {
            match run_experiment(&spec, activation, &cfg.train_for_seed(seed)) {
                Ok(out) => runs.push((
                    seed,
                    Some(SeedRun {
                        seed,
                        initial_loss: out.history.initial().loss,
                        final_loss: out.history.last().loss,
                        metric: out.final_metric,
                    }),
                )),
                Err(Error::Divergence { .. }) => runs.push((seed, None)),
                Err(e) => return Err(e),
            }
        }
        let column = |f: fn(&SeedRun) -> f64| {
            summarize(
                runs.iter()
                    .map(|(s, r)| (*s, r.as_ref().map(f).filter(|v| v.is_finite())))
                    .collect(),
            )
        };
        let blocks = vec![
            SplitBlock {
                split: TRAIN_SPLIT,
                summary: column(|r| r.final_loss),
            },
            SplitBlock {
                split: cfg.task.metric_name(),
                summary: column(|r| r.metric),
            },
        ];
        rows.push(BenchRow {
            activation,
            runs,
            blocks,
            wall_time: start.elapsed(),
        });
    }

    let mut report = BenchReport {
        rows,
        seeds: cfg.seeds.clone(),
        metric: cfg.task.metric_name(),
        direction: cfg.task.metric_direction(),
        files: Vec::new(),
    };
    if let Some(out) = &cfg.out {
        let csv = out.with_extension("csv");
        let txt = out.with_extension("txt");
        write_output(&csv, &report.to_csv(cfg))?;
        write_output(&txt, &report.to_table(cfg))?;
        report.files = vec![csv, txt];
    }
    Ok(report)
}
