use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean squared error over all elements and its gradient `2(pred - target)/N`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor)> {
    pred.same_shape(target, "mse_loss")?;
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad: Vec<f64> = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((loss / n, Tensor::new(pred.shape().to_vec(), grad)?))
}

/// Mean negative log-likelihood of `labels` under a row-wise softmax of
/// `logits [batch, classes]`; gradient `(softmax - onehot) / batch`.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[usize]) -> Result<(f64, Tensor)> {
    if logits.shape().len() != 2 {
        return Err(Error::Shape(format!("logits must be 2-D, got {:?}", logits.shape())));
    }
    let (batch, classes) = (logits.shape()[0], logits.shape()[1]);
    if labels.len() != batch {
        return Err(Error::Shape(format!("{} labels for a batch of {batch}", labels.len())));
    }
    let mut grad = Vec::with_capacity(batch * classes);
    let mut loss = 0.0;
    for (r, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(Error::Domain(format!(
                "label {label} out of range for {classes} classes"
            )));
        }
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|&z| (z - max).exp()).sum();
        let log_sum = sum.ln();
        loss += log_sum - (row[label] - max);
        for (c, &z) in row.iter().enumerate() {
            let p = (z - max).exp() / sum;
            let onehot = if c == label { 1.0 } else { 0.0 };
            grad.push((p - onehot) / batch as f64);
        }
    }
    Ok((loss / batch as f64, Tensor::new(vec![batch, classes], grad)?))
}
