//! Character embeddings, a bidirectional GRU and a per-timestep softmax
//! output layer, with an analytic backward pass through time.

mod backward;
mod forward;
mod gru;
mod params;
mod train;

pub use backward::backward_batch;
pub use forward::{forward_batch, forward_window, DirectionTrace, Dropout, ForwardTrace};
pub use gru::gru_step;
pub use params::{tensor_layout, GruBlock, ModelConfig, ModelParams};
pub use train::{batch_gradients, train_step, Optimizer};

use crate::error::Result;
use crate::scalar::Scalar;

/// Loss and gradients for one window traced by [`forward_window`].
pub fn backward_window<T: Scalar>(
    params: &ModelParams<T>,
    trace: &ForwardTrace<T>,
    gold: &[u32],
    loss_mask: &[bool],
) -> Result<(ModelParams<T>, T)> {
    backward_batch(params, trace, &[gold], &[loss_mask])
}
