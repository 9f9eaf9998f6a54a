//! End-to-end experiments on the synthetic tasks, plus reference baselines.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::activations::ActivationKind;
use crate::error::{config, Error, Result};
use crate::nn::adam::TrainConfig;
use crate::nn::data::{self, label_id, label_tag, LABELS};
use crate::nn::metrics::{corpus_prf, Tag, TagSequence};
use crate::nn::mlp::MlpModel;
use crate::nn::train::{dataset_loss, train, Dataset, History, Targets};
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Regression,
    Tagging,
}

impl Task {
    pub fn metric_name(&self) -> &'static str {
        match self {
            Task::Regression => "test_mse",
            Task::Tagging => "test_span_f1",
        }
    }

    pub fn higher_is_better(&self) -> bool {
        matches!(self, Task::Tagging)
    }

    pub fn metric_direction(&self) -> &'static str {
        if self.higher_is_better() {
            "higher is better"
        } else {
            "lower is better"
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Regression => "regression",
            Task::Tagging => "tagging",
        })
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(Task::Regression),
            "tagging" => Ok(Task::Tagging),
            other => config(format!("unknown task `{other}` (expected regression or tagging)")),
        }
    }
}

/// Size of the synthetic problem and of the network trained on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub task: Task,
    /// Rows for regression, sequences for tagging. 80% train, 20% test.
    pub samples: usize,
    pub hidden: usize,
    pub data_seed: u64,
}

impl TaskSpec {
    pub fn layer_dims(&self) -> Vec<usize> {
        match self.task {
            Task::Regression => vec![2, self.hidden, self.hidden, 1],
            Task::Tagging => vec![
                (2 * data::WINDOW_RADIUS + 1) * data::VOCAB as usize,
                self.hidden,
                LABELS.len(),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub history: History,
    pub final_metric: f64,
}

fn split_point(n: usize) -> Result<usize> {
    let cut = n * 4 / 5;
    if cut == 0 || cut == n {
        return config(format!("need at least 2 samples for a train/test split, got {n}"));
    }
    Ok(cut)
}

pub fn regression_dataset(samples: &[data::RegressionSample]) -> Result<Dataset> {
    let x = Tensor::new(vec![samples.len(), 2], samples.iter().flat_map(|s| s.x).collect())?;
    let y = Tensor::new(vec![samples.len(), 1], samples.iter().map(|s| s.target).collect())?;
    Dataset::new(x, Targets::Real(y))
}

pub fn tagging_dataset(seqs: &[TagSequence]) -> Result<Dataset> {
    let x = data::window_features(seqs)?;
    let labels = seqs.iter().flat_map(|s| s.labels.iter().map(label_id)).collect();
    Dataset::new(
        x,
        Targets::Class {
            labels,
            classes: LABELS.len(),
        },
    )
}

/// Arg-max label per token.
pub fn predict_tags(model: &MlpModel, seqs: &[TagSequence]) -> Result<Vec<Vec<Tag>>> {
    let logits = model.forward(&data::window_features(seqs)?)?;
    let mut row = 0;
    Ok(seqs
        .iter()
        .map(|s| {
            (0..s.len())
                .map(|_| {
                    let r = logits.row(row);
                    row += 1;
                    let best = r
                        .iter()
                        .enumerate()
                        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
                        .0;
                    label_tag(best)
                })
                .collect()
        })
        .collect())
}

pub fn tagging_f1(gold: &[TagSequence], pred: &[Vec<Tag>]) -> Result<f64> {
    Ok(corpus_prf(gold.iter().zip(pred).map(|(g, p)| (g.labels.as_slice(), p.as_slice())))?.f1)
}

/// Trains a fresh network with `activation` on the task; model init and
/// batch order follow `cfg.seed`, the data follows `spec.data_seed`.
pub fn run_experiment(spec: &TaskSpec, activation: ActivationKind, cfg: &TrainConfig) -> Result<RunOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::new(&spec.layer_dims(), activation, &mut rng)?;
    match spec.task {
        Task::Regression => {
            let all = data::gen_regression_task(spec.data_seed, spec.samples);
            let cut = split_point(all.len())?;
            let train_set = regression_dataset(&all[..cut])?;
            let test_set = regression_dataset(&all[cut..])?;
            let history = train(&mut model, &train_set, cfg, &mut |m| dataset_loss(m, &test_set))?;
            let final_metric = history.last().metric;
            Ok(RunOutcome { history, final_metric })
        }
        Task::Tagging => {
            let all = data::gen_toy_tagging_task(spec.data_seed, spec.samples);
            let cut = split_point(all.len())?;
            let (train_seqs, test_seqs) = all.split_at(cut);
            let train_set = tagging_dataset(train_seqs)?;
            let history = train(&mut model, &train_set, cfg, &mut |m| {
                tagging_f1(test_seqs, &predict_tags(m, test_seqs)?)
            })?;
            let final_metric = history.last().metric;
            Ok(RunOutcome { history, final_metric })
        }
    }
}

/// Per-token most frequent training label; unseen tokens get `O`.
pub fn frequency_baseline(train: &[TagSequence], test: &[TagSequence]) -> Vec<Vec<Tag>> {
    let mut counts = vec![[0usize; LABELS.len()]; data::VOCAB as usize];
    for s in train {
        for (&tok, tag) in s.tokens.iter().zip(&s.labels) {
            counts[tok as usize][label_id(tag)] += 1;
        }
    }
    let best: Vec<Tag> = counts
        .iter()
        .map(|c| {
            let id = (0..LABELS.len()).fold(0, |b, i| if c[i] > c[b] { i } else { b });
            label_tag(id)
        })
        .collect();
    test.iter()
        .map(|s| s.tokens.iter().map(|&t| best[t as usize].clone()).collect())
        .collect()
}

/// Predicts the single most frequent training label everywhere.
pub fn majority_baseline(train: &[TagSequence], test: &[TagSequence]) -> Vec<Vec<Tag>> {
    let mut counts = [0usize; LABELS.len()];
    for tag in train.iter().flat_map(|s| &s.labels) {
        counts[label_id(tag)] += 1;
    }
    let id = (0..LABELS.len()).fold(0, |b, i| if counts[i] > counts[b] { i } else { b });
    test.iter().map(|s| vec![label_tag(id); s.len()]).collect()
}

/// The train/test split used by [`run_experiment`] for the tagging task.
pub fn tagging_split(spec: &TaskSpec) -> Result<(Vec<TagSequence>, Vec<TagSequence>)> {
    let mut all = data::gen_toy_tagging_task(spec.data_seed, spec.samples);
    let cut = split_point(all.len())?;
    let test = all.split_off(cut);
    Ok((all, test))
}

/// Outcome of repeating one experiment over several seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatSummary {
    /// `None` marks a seed whose run diverged.
    pub per_seed: Vec<(u64, Option<f64>)>,
    pub mean: f64,
    pub sd: f64,
}

impl RepeatSummary {
    pub fn diverged(&self) -> usize {
        self.per_seed.iter().filter(|(_, v)| v.is_none()).count()
    }
}

/// Runs `f` once per seed. Divergent runs are recorded, not propagated;
/// mean and sample standard deviation cover the finished runs (NaN if none).
pub fn repeat_and_average(seeds: &[u64], mut f: impl FnMut(u64) -> Result<f64>) -> Result<RepeatSummary> {
    let mut per_seed = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        match f(seed) {
            Ok(v) if v.is_finite() => per_seed.push((seed, Some(v))),
            Ok(_) | Err(Error::Divergence { .. }) => per_seed.push((seed, None)),
            Err(e) => return Err(e),
        }
    }
    Ok(summarize(per_seed))
}

/// Mean and sample standard deviation of the finished runs (NaN mean if
/// none finished).
pub fn summarize(per_seed: Vec<(u64, Option<f64>)>) -> RepeatSummary {
    let vals: Vec<f64> = per_seed.iter().filter_map(|(_, v)| *v).collect();
    let n = vals.len() as f64;
    let mean = if vals.is_empty() {
        f64::NAN
    } else {
        vals.iter().sum::<f64>() / n
    };
    let sd = if vals.len() < 2 {
        0.0
    } else {
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    RepeatSummary { per_seed, mean, sd }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_names() {
        assert_eq!("tagging".parse::<Task>().unwrap(), Task::Tagging);
        assert!("ner".parse::<Task>().is_err());
        assert_eq!(Task::Regression.to_string(), "regression");
        assert!(!Task::Regression.higher_is_better());
    }

    #[test]
    fn repeat_summary_stats() {
        let s = repeat_and_average(&[1, 2, 3], |seed| Ok(seed as f64)).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.sd - 1.0).abs() < 1e-15);
        let s = repeat_and_average(&[1, 2], |seed| {
            if seed == 1 {
                Err(Error::Divergence {
                    epoch: 3,
                    reason: "nan".into(),
                })
            } else {
                Ok(4.0)
            }
        })
        .unwrap();
        assert_eq!(s.diverged(), 1);
        assert_eq!(s.mean, 4.0);
        assert!(repeat_and_average(&[1], |_| Err(Error::Config("x".into()))).is_err());
    }

    #[test]
    fn majority_baseline_scores_zero() {
        let spec = TaskSpec {
            task: Task::Tagging,
            samples: 50,
            hidden: 8,
            data_seed: 1,
        };
        let (train, test) = tagging_split(&spec).unwrap();
        let pred = majority_baseline(&train, &test);
        assert!(pred.iter().flatten().all(|t| *t == Tag::Outside));
        assert_eq!(tagging_f1(&test, &pred).unwrap(), 0.0);
    }
}
