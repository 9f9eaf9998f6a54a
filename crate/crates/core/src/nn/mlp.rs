//! Fully connected network with one activation kind shared by every hidden
//! layer and a linear output layer.

use rand::Rng;

use crate::activations::ActivationKind;
use crate::error::{shape, Error, Result};
use crate::kdac::{self, KdacParams};
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `[fan_in, fan_out]`
    pub weight: Tensor,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_dims: Vec<usize>,
    pub layers: Vec<Dense>,
    activation: ActivationKind,
    /// Per-feature slopes for each hidden layer; empty unless the
    /// activation is KDAC.
    pub kdac: Vec<KdacParams>,
}

/// Gradients laid out like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Tensor>,
    pub biases: Vec<Vec<f64>>,
    pub kdac_beta1: Vec<Vec<f64>>,
    pub kdac_beta2: Vec<Vec<f64>>,
}

impl MlpGrads {
    /// Flat views in the same order as [`MlpModel::params_mut`].
    pub fn slices(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.push(w.data());
            out.push(b);
        }
        for (b1, b2) in self.kdac_beta1.iter().zip(&self.kdac_beta2) {
            out.push(b1);
            out.push(b2);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// Intermediate values kept for the backward pass.
struct ForwardCache {
    /// Input to each layer (index 0 is the network input).
    inputs: Vec<Tensor>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Tensor>,
    output: Tensor,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases. KDAC slopes start at the
    /// activation's `(beta1, beta2)`.
    pub fn new(layer_dims: &[usize], activation: ActivationKind, rng: &mut impl Rng) -> Result<Self> {
        let mut model = Self::zeros(layer_dims, activation)?;
        for layer in &mut model.layers {
            let (fan_in, fan_out) = (layer.weight.shape()[0], layer.weight.shape()[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in layer.weight.data_mut() {
                *w = rng.random_range(-limit..=limit);
            }
        }
        Ok(model)
    }

    /// All weights and biases zero.
    pub fn zeros(layer_dims: &[usize], activation: ActivationKind) -> Result<Self> {
        if layer_dims.len() < 2 || layer_dims.contains(&0) {
            return shape(format!(
                "layer dims must list at least two positive sizes, got {layer_dims:?}"
            ));
        }
        activation.validate()?;
        let layers = layer_dims
            .windows(2)
            .map(|w| Dense {
                weight: Tensor::zeros(vec![w[0], w[1]]),
                bias: vec![0.0; w[1]],
            })
            .collect();
        let kdac = match activation {
            ActivationKind::Kdac { beta1, beta2, mu } => layer_dims[1..layer_dims.len() - 1]
                .iter()
                .map(|&width| KdacParams::uniform(width, beta1, beta2, mu))
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };
        Ok(MlpModel {
            layer_dims: layer_dims.to_vec(),
            layers,
            activation,
            kdac,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn activation(&self) -> &ActivationKind {
        &self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Mutable flat views of every trainable parameter.
    pub fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            out.push(layer.weight.data_mut());
            out.push(&mut layer.bias);
        }
        for p in &mut self.kdac {
            out.push(&mut p.beta1);
            out.push(&mut p.beta2);
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum::<usize>()
            + self.kdac.iter().map(|p| 2 * p.features()).sum::<usize>()
    }

    /// Re-applies the positivity floor on KDAC slopes.
    pub fn enforce_constraints(&mut self) {
        for p in &mut self.kdac {
            p.enforce_positive();
        }
    }

    /// Smallest KDAC slope in the model, if it has any.
    pub fn min_kdac_beta(&self) -> Option<f64> {
        self.kdac.iter().map(KdacParams::min_beta).reduce(f64::min)
    }

    fn affine(&self, layer: &Dense, x: &Tensor) -> Result<Tensor> {
        let mut z = x.matmul(&layer.weight)?;
        let width = layer.bias.len();
        for (i, v) in z.data_mut().iter_mut().enumerate() {
            *v += layer.bias[i % width];
        }
        Ok(z)
    }

    fn activate(&self, hidden: usize, z: &Tensor) -> Result<Tensor> {
        match self.activation {
            ActivationKind::Kdac { .. } => kdac::kdac_forward_tensor(z, &self.kdac[hidden]),
            kind => Ok(z.map(|v| kind.value(v))),
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape().len() != 2 || x.last_dim() != self.input_dim() {
            return shape(format!(
                "network expects [batch, {}] input, got {:?}",
                self.input_dim(),
                x.shape()
            ));
        }
        Ok(())
    }

    fn forward_cached(&self, x: &Tensor) -> Result<ForwardCache> {
        self.check_input(x)?;
        let last = self.layers.len() - 1;
        let mut inputs = vec![x.clone()];
        let mut pre = Vec::with_capacity(last);
        for (l, layer) in self.layers.iter().enumerate() {
            let z = self.affine(layer, &inputs[l])?;
            if l == last {
                return Ok(ForwardCache { inputs, pre, output: z });
            }
            let a = self.activate(l, &z)?;
            pre.push(z);
            inputs.push(a);
        }
        unreachable!("model has at least one layer")
    }

    /// Affine + activation per hidden layer, affine output layer.
    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(x)?.output)
    }

    /// Every hidden-layer pre-activation for input `x`, shape `[batch, width]`.
    pub fn hidden_preactivations(&self, x: &Tensor) -> Result<Vec<Tensor>> {
        Ok(self.forward_cached(x)?.pre)
    }

    /// Gradients of `sum(upstream ⊙ forward(x))` with respect to every
    /// parameter.
    pub fn backward(&self, x: &Tensor, upstream: &Tensor) -> Result<MlpGrads> {
        let cache = self.forward_cached(x)?;
        cache.output.same_shape(upstream, "backward upstream")?;
        let n_layers = self.layers.len();
        let mut weights = vec![Tensor::zeros(vec![1]); n_layers];
        let mut biases = vec![Vec::new(); n_layers];
        let mut kdac_beta1 = vec![Vec::new(); self.kdac.len()];
        let mut kdac_beta2 = vec![Vec::new(); self.kdac.len()];

        let mut delta = upstream.clone();
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            weights[l] = cache.inputs[l].t_matmul(&delta)?;
            let width = layer.bias.len();
            let mut db = vec![0.0; width];
            for (i, &d) in delta.data().iter().enumerate() {
                db[i % width] += d;
            }
            biases[l] = db;
            if l == 0 {
                break;
            }
            let d_act = delta.matmul_t(&layer.weight)?;
            let z = &cache.pre[l - 1];
            delta = match self.activation {
                ActivationKind::Kdac { .. } => {
                    let g = kdac::kdac_backward_tensor(z, &d_act, &self.kdac[l - 1])?;
                    kdac_beta1[l - 1] = g.dbeta1;
                    kdac_beta2[l - 1] = g.dbeta2;
                    g.dx
                }
                kind => {
                    let mut d = d_act;
                    for (dv, &zv) in d.data_mut().iter_mut().zip(z.data()) {
                        *dv *= kind.derivative(zv);
                    }
                    d
                }
            };
        }

        let grads = MlpGrads {
            weights,
            biases,
            kdac_beta1,
            kdac_beta2,
        };
        if !grads.all_finite() {
            return Err(Error::Divergence {
                epoch: 0,
                reason: "non-finite gradient".into(),
            });
        }
        Ok(grads)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::ActivationKind::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn input(rows: usize, cols: usize, v: &[f64]) -> Tensor {
        Tensor::new(vec![rows, cols], v.to_vec()).unwrap()
    }

    #[test]
    fn zero_network_outputs_zero() {
        for kind in [Tanh, Relu, Swish] {
            let m = MlpModel::zeros(&[2, 3, 1], kind).unwrap();
            let y = m.forward(&input(2, 2, &[1.0, -2.0, 0.5, 3.0])).unwrap();
            assert!(y.data().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn zero_kdac_network_hand_trace() {
        let kdac = ActivationKind::default_for("kdac").unwrap();
        let mut m = MlpModel::zeros(&[1, 1, 1], kdac).unwrap();
        // output weight 2, bias 0.5: y = 2 * KDAC(0) + 0.5 = 2 * 0.140625 * mu + 0.5
        m.layers[1].weight.data_mut()[0] = 2.0;
        m.layers[1].bias[0] = 0.5;
        let y = m.forward(&input(1, 1, &[3.0])).unwrap();
        assert!((y.data()[0] - (2.0 * 0.140625 * 0.01 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn identity_relu_net() {
        let mut m = MlpModel::zeros(&[1, 1, 1], Relu).unwrap();
        m.layers[0].weight.data_mut()[0] = 1.0;
        m.layers[1].weight.data_mut()[0] = 1.0;
        assert_eq!(m.forward(&input(1, 1, &[2.0])).unwrap().data(), &[2.0]);
    }

    #[test]
    fn tanh_net_symbolic() {
        let (w, v, c, x) = (0.7, -1.3, 0.25, 0.9);
        let mut m = MlpModel::zeros(&[1, 1, 1], Tanh).unwrap();
        m.layers[0].weight.data_mut()[0] = w;
        m.layers[1].weight.data_mut()[0] = v;
        m.layers[1].bias[0] = c;
        let y = m.forward(&input(1, 1, &[x])).unwrap().data()[0];
        assert!((y - ((w * x).tanh() * v + c)).abs() < 1e-15);
    }

    #[test]
    fn zero_upstream_gives_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let kdac = ActivationKind::default_for("kdac").unwrap();
        let m = MlpModel::new(&[2, 4, 1], kdac, &mut rng).unwrap();
        let x = input(3, 2, &[0.1, 0.2, -1.0, 2.0, 0.5, -0.5]);
        let g = m.backward(&x, &Tensor::zeros(vec![3, 1])).unwrap();
        assert!(g.slices().iter().all(|s| s.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn kdac_slope_grads_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let kdac = ActivationKind::default_for("kdac").unwrap();
        let m = MlpModel::new(&[2, 4, 1], kdac, &mut rng).unwrap();
        let x = input(2, 2, &[1.5, -2.0, -1.0, 2.0]);
        let g = m.backward(&x, &Tensor::full(vec![2, 1], 1.0)).unwrap();
        assert!(g.kdac_beta2[0].iter().any(|&v| v != 0.0));
    }

    #[test]
    fn shape_errors() {
        let m = MlpModel::zeros(&[2, 3, 1], Tanh).unwrap();
        assert!(m.forward(&input(1, 3, &[0.0; 3])).is_err());
        assert!(m.backward(&input(1, 2, &[0.0; 2]), &Tensor::zeros(vec![2, 1])).is_err());
        assert!(MlpModel::zeros(&[2], Tanh).is_err());
    }

    #[test]
    fn params_and_grads_align() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kdac = ActivationKind::default_for("kdac").unwrap();
        let mut m = MlpModel::new(&[2, 8, 8, 1], kdac, &mut rng).unwrap();
        let x = input(1, 2, &[0.3, -0.4]);
        let g = m.backward(&x, &Tensor::full(vec![1, 1], 1.0)).unwrap();
        let n = m.param_count();
        let lens: Vec<usize> = m.params_mut().iter().map(|s| s.len()).collect();
        assert_eq!(lens, g.slices().iter().map(|s| s.len()).collect::<Vec<_>>());
        assert_eq!(lens.iter().sum::<usize>(), n);
        assert_eq!(n, (2 * 8 + 8) + (8 * 8 + 8) + (8 + 1) + 2 * 16);
    }
}
