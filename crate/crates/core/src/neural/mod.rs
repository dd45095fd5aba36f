//! From-scratch dense neural network core: forward pass, backpropagation,
//! RMSprop, and the conditional WGAN training loop with weight clipping.

mod matrix;
mod mlp;
mod train;

pub use matrix::Matrix;
pub use mlp::{Activation, ForwardCache, Gradients, Mlp, RmsProp};
pub use train::{train_cwgan, CwganModel, EpochLog, TrainError, TrainLog, WganConfig};
