//! Adam with bias correction.

use crate::error::{config, shape, Result};
use crate::nn::mlp::{MlpGrads, MlpModel};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            learning_rate: 1e-3,
            epochs: 20,
            batch_size: 32,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
        }
    }
}

impl TrainConfig {
    /// A zero learning rate is accepted so that frozen-parameter ablations
    /// can run through the same path.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return config(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            ));
        }
        if self.epochs < 1 {
            return config("epochs must be >= 1");
        }
        if self.batch_size < 1 {
            return config("batch_size must be >= 1");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return config("adam moment decay rates must lie in [0, 1)");
        }
        if self.adam_eps.is_nan() || self.adam_eps <= 0.0 {
            return config("adam_eps must be > 0");
        }
        Ok(())
    }
}

/// One Adam update of a flat parameter slice. `step` is the 1-based step
/// index after increment.
pub fn adam_update(param: &mut [f64], grad: &[f64], m: &mut [f64], v: &mut [f64], step: u64, cfg: &TrainConfig) {
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let bc1 = 1.0 - b1.powi(step as i32);
    let bc2 = 1.0 - b2.powi(step as i32);
    for i in 0..param.len() {
        let g = grad[i];
        m[i] = b1 * m[i] + (1.0 - b1) * g;
        v[i] = b2 * v[i] + (1.0 - b2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        param[i] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);
    }
}

/// Moment estimates for every parameter slice of a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
}

impl Adam {
    pub fn new(model: &mut MlpModel) -> Self {
        let lens: Vec<usize> = model.params_mut().iter().map(|p| p.len()).collect();
        Adam {
            m: lens.iter().map(|&n| vec![0.0; n]).collect(),
            v: lens.iter().map(|&n| vec![0.0; n]).collect(),
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one update and then the KDAC slope floor.
    pub fn step(&mut self, model: &mut MlpModel, grads: &MlpGrads, cfg: &TrainConfig) -> Result<()> {
        let grad_slices = grads.slices();
        let mut params = model.params_mut();
        if params.len() != grad_slices.len() || params.len() != self.m.len() {
            return shape("adam: parameter, gradient and state layouts differ");
        }
        for (i, g) in grad_slices.iter().enumerate() {
            if params[i].len() != g.len() || self.m[i].len() != g.len() {
                return shape(format!("adam: slice {i} has mismatched lengths"));
            }
        }
        self.step += 1;
        for (i, g) in grad_slices.iter().enumerate() {
            adam_update(params[i], g, &mut self.m[i], &mut self.v[i], self.step, cfg);
        }
        drop(params);
        model.enforce_constraints();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::activations::ActivationKind;
    use crate::kdac::MIN_BETA;

    #[test]
    fn zero_gradient_leaves_params() {
        let cfg = TrainConfig::default();
        let mut p = vec![0.3, -1.0];
        let (mut m, mut v) = (vec![0.0; 2], vec![0.0; 2]);
        adam_update(&mut p, &[0.0, 0.0], &mut m, &mut v, 1, &cfg);
        assert_eq!(p, vec![0.3, -1.0]);

        let mut model = MlpModel::zeros(&[1, 2, 1], ActivationKind::Tanh).unwrap();
        let before = model.clone();
        let mut opt = Adam::new(&mut model);
        let grads = MlpGrads {
            weights: vec![crate::Tensor::zeros(vec![1, 2]), crate::Tensor::zeros(vec![2, 1])],
            biases: vec![vec![0.0; 2], vec![0.0]],
            kdac_beta1: vec![],
            kdac_beta2: vec![],
        };
        opt.step(&mut model, &grads, &cfg).unwrap();
        assert_eq!(model, before);
        assert_eq!(opt.steps_taken(), 1);
    }

    #[test]
    fn first_step_is_bounded_by_lr() {
        let cfg = TrainConfig::default();
        let grads = [3.0, -1e-4, 250.0, -7.5];
        let mut p = vec![0.0; 4];
        let (mut m, mut v) = (vec![0.0; 4], vec![0.0; 4]);
        adam_update(&mut p, &grads, &mut m, &mut v, 1, &cfg);
        for (dp, g) in p.iter().zip(grads) {
            // m̂/√v̂ = sign(g) on the first step, up to eps
            assert!(dp.abs() <= cfg.learning_rate * (1.0 + 1e-6));
            assert!((dp + cfg.learning_rate * g.signum()).abs() < cfg.learning_rate * 1e-3);
        }
    }

    #[test]
    fn slope_floor_holds() {
        let kdac = ActivationKind::Kdac {
            beta1: MIN_BETA,
            beta2: MIN_BETA,
            mu: 0.01,
        };
        let mut model = MlpModel::zeros(&[1, 1, 1], kdac).unwrap();
        let mut opt = Adam::new(&mut model);
        let grads = MlpGrads {
            weights: vec![crate::Tensor::zeros(vec![1, 1]), crate::Tensor::zeros(vec![1, 1])],
            biases: vec![vec![0.0], vec![0.0]],
            kdac_beta1: vec![vec![5.0]],
            kdac_beta2: vec![vec![5.0]],
        };
        let cfg = TrainConfig {
            learning_rate: 0.1,
            ..TrainConfig::default()
        };
        opt.step(&mut model, &grads, &cfg).unwrap();
        assert_eq!(model.kdac[0].beta1, vec![MIN_BETA]);
        assert_eq!(model.kdac[0].beta2, vec![MIN_BETA]);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig {
            learning_rate: 0.0,
            ..Default::default()
        }
        .validate()
        .is_ok());
        assert!(TrainConfig {
            learning_rate: -1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            epochs: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
