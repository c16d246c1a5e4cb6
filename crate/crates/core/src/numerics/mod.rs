//! Tensor container and the hand-differentiated primitives the networks are
//! built from. Every forward op has a matching backward op; none of them
//! keep state between calls.

mod activation;
mod batchnorm;
mod conv;
mod dense;
mod gemm;
pub mod gradcheck;
mod loss;
mod pool;
mod tensor;

use serde::{Deserialize, Serialize};

pub use activation::{dropout_backward, dropout_forward, relu_backward, relu_forward, DropoutMask};
pub use batchnorm::{
    batchnorm_backward, batchnorm_forward, update_running_stats, BatchNormCache, BatchNormConfig,
    BatchNormGrads, BatchNormOutput,
};
pub use conv::{conv1d_backward, conv1d_forward, same_padding, ConvGrads};
pub use dense::{dense_backward, dense_forward, DenseGrads};
pub use loss::{add_forward, softmax, softmax_cross_entropy};
pub use pool::{global_avg_pool_backward, global_avg_pool_forward};
pub use tensor::Tensor;

/// Train mode uses batch statistics and live dropout; infer mode uses
/// running statistics and skips dropout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Infer,
}
