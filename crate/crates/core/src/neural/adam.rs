//! Adam with L2 weight decay folded into the gradient.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::layers::Params;
use super::tensor::Tensor;
use crate::error::{check_len, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    /// Gradients whose global ℓ₂ norm exceeds this are rescaled to it;
    /// infinite disables clipping.
    pub max_grad_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 2e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-5,
            max_grad_norm: f64::INFINITY,
        }
    }
}

/// Moment accumulators for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: Vec<Tensor>,
    pub second_moment: Vec<Tensor>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &Params) -> Self {
        let zeros = || {
            params
                .values()
                .iter()
                .map(|p| Tensor::zeros(p.rows(), p.cols()))
                .collect::<Vec<_>>()
        };
        AdamState {
            config,
            step: 0,
            first_moment: zeros(),
            second_moment: zeros(),
        }
    }

    /// One bias-corrected update of every parameter.
    pub fn update(&mut self, params: &mut Params, grads: &[Tensor]) -> Result<()> {
        check_len("gradient count", params.len(), grads.len())?;
        check_len("moment count", params.len(), self.first_moment.len())?;
        for (p, g) in params.values().iter().zip(grads) {
            check_len("gradient size", p.len(), g.len())?;
        }
        let c = self.config;
        let norm = grads.iter().flat_map(|g| g.data()).map(|v| v * v).sum::<f64>().sqrt();
        let clip = if norm > c.max_grad_norm { c.max_grad_norm / norm } else { 1.0 };
        self.step += 1;
        let t = self.step as f64;
        let correction1 = 1.0 - c.beta1.powf(t);
        let correction2 = 1.0 - c.beta2.powf(t);
        for (((p, g), m), v) in params
            .values_mut()
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            for (((theta, &grad), m), v) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                let grad = clip * grad + c.weight_decay * *theta;
                *m = c.beta1 * *m + (1.0 - c.beta1) * grad;
                *v = c.beta2 * *v + (1.0 - c.beta2) * grad * grad;
                let m_hat = *m / correction1;
                let v_hat = *v / correction2;
                *theta -= c.lr * m_hat / (v_hat.sqrt() + c.eps);
            }
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::update`].
pub fn adam_step(params: &mut Params, grads: &[Tensor], state: &mut AdamState) -> Result<()> {
    state.update(params, grads)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_params(v: f64) -> Params {
        let mut p = Params::new();
        p.add("theta", Tensor::scalar(v));
        p
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut params = scalar_params(0.7);
        let config = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(config, &params);
        for _ in 0..5 {
            adam_step(&mut params, &[Tensor::scalar(0.0)], &mut state).unwrap();
        }
        assert_eq!(params.values()[0].item(), 0.7);
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut params = scalar_params(1.0);
        let config = AdamConfig {
            weight_decay: 0.0,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(config, &params);
        adam_step(&mut params, &[Tensor::scalar(1.0)], &mut state).unwrap();
        let expected = 1.0 - 2e-4 / (1.0 + 1e-8);
        assert!((params.values()[0].item() - expected).abs() < 1e-15);
    }

    #[test]
    fn quadratic_bowl_decreases() {
        let mut params = Params::new();
        params.add("x", Tensor::row_vector(&[2.0, -3.0, 1.5]));
        let config = AdamConfig {
            lr: 0.01,
            ..AdamConfig::default()
        };
        let mut state = AdamState::new(config, &params);
        let loss = |p: &Params| p.values()[0].data().iter().map(|v| v * v).sum::<f64>();
        let mut previous = loss(&params);
        for step in 0..100 {
            let grad = params.values()[0].map(|v| 2.0 * v);
            adam_step(&mut params, &[grad], &mut state).unwrap();
            let current = loss(&params);
            if step >= 5 {
                assert!(current < previous, "step {step}: {current} >= {previous}");
            }
            previous = current;
        }
        assert!(previous < 6.0);
    }

    #[test]
    fn clipping_rescales_the_global_norm() {
        let mut params = Params::new();
        params.add("a", Tensor::row_vector(&[0.0, 0.0]));
        params.add("b", Tensor::scalar(0.0));
        let config = AdamConfig {
            weight_decay: 0.0,
            max_grad_norm: 1.0,
            ..AdamConfig::default()
        };
        let mut clipped = AdamState::new(config, &params);
        let mut p = params.clone();
        clipped
            .update(&mut p, &[Tensor::row_vector(&[30.0, 0.0]), Tensor::scalar(40.0)])
            .unwrap();
        assert!((clipped.first_moment[0].data()[0] - 0.1 * 0.6).abs() < 1e-15);
        assert!((clipped.first_moment[1].data()[0] - 0.1 * 0.8).abs() < 1e-15);
        let mut small = AdamState::new(config, &params);
        small.update(&mut params, &[Tensor::row_vector(&[0.3, 0.0]), Tensor::scalar(0.4)]).unwrap();
        assert!((small.first_moment[1].data()[0] - 0.1 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut params = scalar_params(1.0);
        let mut state = AdamState::new(AdamConfig::default(), &params);
        assert!(state.update(&mut params, &[Tensor::zeros(1, 2)]).is_err());
        assert!(state.update(&mut params, &[]).is_err());
    }
}
