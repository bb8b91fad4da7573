use crate::corpus::Window;
use crate::error::{Error, Result};
use crate::network::{backward_batch, forward_batch, Dropout, ModelConfig, ModelParams};
use crate::numerics::{adam_step, AdamConfig, AdamState, Rng};
use crate::scalar::Scalar;

/// One [`AdamState`] per parameter tensor, in canonical tensor order.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimizer<T> {
    pub states: Vec<AdamState<T>>,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(params: &ModelParams<T>, config: AdamConfig) -> Self {
        Optimizer {
            states: params
                .tensors()
                .iter()
                .map(|t| AdamState::new(t.len(), config))
                .collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.states.first().map_or(0, |s| s.step)
    }

    /// Applies one Adam update per tensor.
    pub fn apply(&mut self, params: &mut ModelParams<T>, grads: &ModelParams<T>) -> Result<()> {
        let gs = grads.tensors();
        for ((p, g), st) in params.tensors_mut().into_iter().zip(gs).zip(&mut self.states) {
            adam_step(p, g, st)?;
        }
        Ok(())
    }
}

/// Loss and mean gradient of a batch without updating anything.
pub fn batch_gradients<T: Scalar>(
    params: &ModelParams<T>,
    config: &ModelConfig,
    batch: &[&Window],
    dropout: Dropout<'_, T>,
) -> Result<(ModelParams<T>, T)> {
    if batch.is_empty() {
        return Err(Error::Input("empty training batch".into()));
    }
    let ids: Vec<&[u32]> = batch.iter().map(|w| w.char_ids.as_slice()).collect();
    let gold: Vec<&[u32]> = batch.iter().map(|w| w.gold.as_slice()).collect();
    let mask: Vec<&[bool]> = batch.iter().map(|w| w.loss_mask.as_slice()).collect();
    let trace = forward_batch(params, config, &ids, dropout)?;
    backward_batch(params, &trace, &gold, &mask)
}

/// Forward, backward and one optimizer update on a batch of windows.
/// Returns the mean batch loss before the update.
pub fn train_step<T: Scalar>(
    params: &mut ModelParams<T>,
    config: &ModelConfig,
    batch: &[&Window],
    optimizer: &mut Optimizer<T>,
    rng: &mut Rng,
) -> Result<T> {
    let dropout = if config.keep_prob < 1.0 {
        Dropout::Sample {
            rng,
            keep_prob: config.keep_prob,
        }
    } else {
        Dropout::Off
    };
    let (grads, loss) = batch_gradients(params, config, batch, dropout)?;
    if !loss.is_finite() {
        return Err(Error::Invariant(format!("non-finite training loss {loss}")));
    }
    optimizer.apply(params, &grads)?;
    Ok(loss)
}
