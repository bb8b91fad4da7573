//! Dense linear algebra, activations, loss, optimizer and seeded randomness.

mod adam;
mod matrix;
mod ops;
mod rng;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use matrix::{dot, gemm, MatMut, MatRef, Matrix, Vector};
pub use ops::{argmax, cross_entropy, sigmoid, softmax, LOG_FLOOR};
pub(crate) use ops::softmax_in_place;
pub use rng::{dropout_mask, Rng};
pub(crate) use rng::fill_dropout_mask;
