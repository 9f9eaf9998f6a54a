//! Mini-batch training loop.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{shape, Error, Result};
use crate::nn::adam::{Adam, TrainConfig};
use crate::nn::loss::{mse_loss, softmax_cross_entropy};
use crate::nn::mlp::MlpModel;
use crate::numfmt::fmt17;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// `[rows, outputs]`, trained with mean squared error.
    Real(Tensor),
    /// Class ids, trained with softmax cross-entropy.
    Class { labels: Vec<usize>, classes: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Tensor,
    pub targets: Targets,
}

impl Dataset {
    pub fn new(inputs: Tensor, targets: Targets) -> Result<Self> {
        if inputs.shape().len() != 2 {
            return shape(format!("inputs must be [rows, features], got {:?}", inputs.shape()));
        }
        let rows = inputs.shape()[0];
        let n_targets = match &targets {
            Targets::Real(t) => {
                if t.shape().len() != 2 {
                    return shape("real targets must be [rows, outputs]");
                }
                t.shape()[0]
            }
            Targets::Class { labels, classes } => {
                if let Some(&bad) = labels.iter().find(|&&l| l >= *classes) {
                    return Err(Error::Domain(format!("label {bad} out of range for {classes} classes")));
                }
                labels.len()
            }
        };
        if n_targets != rows {
            return shape(format!("{rows} input rows but {n_targets} targets"));
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn gather(t: &Tensor, idx: &[usize]) -> Tensor {
        let w = t.last_dim();
        let mut data = Vec::with_capacity(idx.len() * w);
        for &i in idx {
            data.extend_from_slice(t.row(i));
        }
        Tensor::new(vec![idx.len(), w], data).expect("gathered rows are consistent")
    }

    /// Rows `idx` as a new dataset; used for mini-batches.
    pub fn subset(&self, idx: &[usize]) -> Dataset {
        let targets = match &self.targets {
            Targets::Real(t) => Targets::Real(Self::gather(t, idx)),
            Targets::Class { labels, classes } => Targets::Class {
                labels: idx.iter().map(|&i| labels[i]).collect(),
                classes: *classes,
            },
        };
        Dataset {
            inputs: Self::gather(&self.inputs, idx),
            targets,
        }
    }
}

/// Loss of `model` on `data` and its gradient with respect to the output.
pub fn loss_and_output_grad(model: &MlpModel, data: &Dataset) -> Result<(f64, Tensor)> {
    let out = model.forward(&data.inputs)?;
    match &data.targets {
        Targets::Real(t) => mse_loss(&out, t),
        Targets::Class { labels, .. } => softmax_cross_entropy(&out, labels),
    }
}

pub fn dataset_loss(model: &MlpModel, data: &Dataset) -> Result<f64> {
    loss_and_output_grad(model, data).map(|(l, _)| l)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct History {
    /// Epoch 0 is the untrained model; epochs `1..=E` follow each pass.
    pub records: Vec<EpochRecord>,
    /// Smallest KDAC slope observed after any optimizer step.
    pub min_kdac_beta: Option<f64>,
    pub steps: u64,
}

impl History {
    pub fn initial(&self) -> &EpochRecord {
        &self.records[0]
    }

    pub fn last(&self) -> &EpochRecord {
        self.records.last().expect("history has the initial record")
    }

    /// `epoch,loss,metric` CSV body.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "epoch,loss,metric")?;
        for r in &self.records {
            writeln!(w, "{},{},{}", r.epoch, fmt17(r.loss), fmt17(r.metric))?;
        }
        Ok(())
    }
}

fn diverged(epoch: usize, what: &str) -> Error {
    Error::Divergence {
        epoch,
        reason: format!("non-finite {what}"),
    }
}

/// Trains with Adam on shuffled mini-batches. After every epoch the full
/// training loss and `metric(model)` are recorded. Identical inputs give
/// bit-identical histories.
pub fn train(
    model: &mut MlpModel,
    data: &Dataset,
    cfg: &TrainConfig,
    metric: &mut dyn FnMut(&MlpModel) -> Result<f64>,
) -> Result<History> {
    cfg.validate()?;
    if data.is_empty() {
        return shape("cannot train on an empty dataset");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5DEE_CE66_D1CE_5EED);
    let mut opt = Adam::new(model);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut min_beta = model.min_kdac_beta();

    let record = |model: &MlpModel, epoch: usize, metric: &mut dyn FnMut(&MlpModel) -> Result<f64>| {
        let loss = dataset_loss(model, data)?;
        if !loss.is_finite() {
            return Err(diverged(epoch, "loss"));
        }
        Ok(EpochRecord {
            epoch,
            loss,
            metric: metric(model)?,
        })
    };

    let mut records = vec![record(model, 0, metric)?];
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch = data.subset(chunk);
            let (loss, upstream) = loss_and_output_grad(model, &batch)?;
            if !loss.is_finite() {
                return Err(diverged(epoch, "batch loss"));
            }
            let grads = model.backward(&batch.inputs, &upstream).map_err(|e| match e {
                Error::Divergence { reason, .. } => Error::Divergence { epoch, reason },
                other => other,
            })?;
            opt.step(model, &grads, cfg)?;
            if let Some(b) = model.min_kdac_beta() {
                min_beta = Some(min_beta.map_or(b, |m: f64| m.min(b)));
            }
        }
        records.push(record(model, epoch, metric)?);
    }
    Ok(History {
        records,
        min_kdac_beta: min_beta,
        steps: opt.steps_taken(),
    })
}
