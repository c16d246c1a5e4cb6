//! The three baseline architectures as ordered layer lists, and their
//! forward and backward passes.

mod build;
mod exec;
pub mod model_file;
mod params;
mod spec;

pub use build::{
    build, build_fcn, build_fcn_with, build_mlp, build_mlp_with, build_resnet, build_resnet_with,
    FcnConfig, MlpConfig, ResnetConfig,
};
pub use exec::{
    apply_running_updates, argmax, backward, forward, infer_logits, predict, predict_proba,
    ActivationCache, ForwardPass, RunningUpdate,
};
pub use params::{slot_shapes, Gradients, ParameterSet, SlotMap};
pub use spec::{
    Architecture, BatchNormParams, ConvParams, DenseParams, Extent, LayerSpec, NetworkSpec,
    Projection, Shortcut,
};
