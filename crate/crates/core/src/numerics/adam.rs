use serde::{Deserialize, Serialize};

use super::mlp::{Gradients, MlpParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moments for one network. Moment shapes mirror the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step_count: u64,
    pub first_moment: Gradients,
    pub second_moment: Gradients,
    pub config: AdamConfig,
}

impl AdamState {
    pub fn new(params: &MlpParams, config: AdamConfig) -> Self {
        Self {
            step_count: 0,
            first_moment: Gradients::zeros_like(params),
            second_moment: Gradients::zeros_like(params),
            config,
        }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.config.lr = lr;
    }

    /// One bias-corrected Adam update of `params` in place.
    pub fn step(&mut self, params: &mut MlpParams, grads: &Gradients) -> Result<()> {
        if !grads.matches(params) || !self.first_moment.matches(params) {
            return Err(Error::Shape(
                "gradient or moment shapes do not match parameters".into(),
            ));
        }
        self.step_count += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        let update = |w: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *w -= lr * m_hat / (v_hat.sqrt() + epsilon);
        };
        for k in 0..grads.weights.len() {
            ndarray::Zip::from(&mut params.weights_mut()[k])
                .and(&grads.weights[k])
                .and(&mut self.first_moment.weights[k])
                .and(&mut self.second_moment.weights[k])
                .for_each(|w, &g, m, v| update(w, g, m, v));
            ndarray::Zip::from(&mut params.biases_mut()[k])
                .and(&grads.biases[k])
                .and(&mut self.first_moment.biases[k])
                .and(&mut self.second_moment.biases[k])
                .for_each(|w, &g, m, v| update(w, g, m, v));
        }
        Ok(())
    }
}
