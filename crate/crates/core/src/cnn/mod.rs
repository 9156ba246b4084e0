//! A desk-scale convolutional network with exact backpropagation.
//!
//! The stack is two conv/ReLU/max-pool blocks, flatten, inverted dropout and
//! a dense layer feeding a four-way softmax. The loss is categorical
//! cross-entropy and training is plain minibatch SGD. All randomness
//! (initialization, shuffling, dropout) comes from seeded ChaCha streams.

mod layers;
mod model_io;
mod network;
mod tensor;
mod train;

pub use layers::{
    apply_mask, conv_backward, conv_forward, cross_entropy, dense_backward, dense_forward, dropout,
    maxpool2, maxpool2_backward, relu, relu_backward, softmax, softmax_cross_entropy_grad,
    ConvParams, DenseParams, Mode, Pooled, PROB_FLOOR,
};
pub use model_io::{load_model, model_from_str, model_to_string, save_model, FORMAT_VERSION};
pub use network::{argmax, sgd_step, CnnShape, ForwardTrace, MicroCnn, Parameters, KERNEL_SIZE, NUM_CLASSES};
pub use tensor::Tensor3;
pub use train::{evaluate, train, write_trace_csv, EpochStats, TrainConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CnnError {
    #[error("input has {got} channels, layer expects {expected}")]
    ChannelMismatch { expected: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("max pooling needs even dimensions, got {height}x{width}")]
    OddDimension { height: usize, width: usize },
    #[error("dropout rate must be in [0, 1), got {0}")]
    InvalidRate(f64),
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
    #[error("forward trace is from parameter version {trace}, network is at {network}")]
    StaleIntermediates { trace: u64, network: u64 },
    #[error("training set is empty")]
    EmptyDataset,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("i/o: {0}")]
    Io(String),
}
