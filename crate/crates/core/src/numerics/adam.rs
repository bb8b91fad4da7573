use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment accumulators for one parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub config: AdamConfig,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(len: usize, config: AdamConfig) -> Self {
        AdamState {
            step: 0,
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            config,
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<T: Scalar>(params: &mut [T], grads: &[T], state: &mut AdamState<T>) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Dimension {
            op: "adam_step",
            left: (params.len(), 1),
            right: (grads.len(), state.m.len()),
        });
    }
    state.step += 1;
    let c = state.config;
    let b1 = T::of(c.beta1);
    let b2 = T::of(c.beta2);
    let one = T::one();
    let t = state.step.min(i32::MAX as u64) as i32;
    let m_corr = T::of(1.0 - c.beta1.powi(t));
    let v_corr = T::of(1.0 - c.beta2.powi(t));
    let lr = T::of(c.learning_rate);
    let eps = T::of(c.epsilon);
    for (((p, &g), m), v) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut())
        .zip(state.v.iter_mut())
    {
        *m = b1 * *m + (one - b1) * g;
        *v = b2 * *v + (one - b2) * g * g;
        let m_hat = *m / m_corr;
        let v_hat = *v / v_corr;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}
