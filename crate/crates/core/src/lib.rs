//! Per-character language identification with a bidirectional GRU tagger.

pub mod commands;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod model_file;
pub mod network;
pub mod numerics;
pub mod records;
pub mod scalar;
pub mod tasks;

pub use error::{Error, Result};
pub use model::Model;
pub use scalar::Scalar;

pub type Model32 = Model<f32>;
pub type Model64 = Model<f64>;
pub type Params32 = network::ModelParams<f32>;
pub type Params64 = network::ModelParams<f64>;
