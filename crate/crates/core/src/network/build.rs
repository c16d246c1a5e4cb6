use serde::{Deserialize, Serialize};

use super::spec::{
    Architecture, BatchNormParams, ConvParams, DenseParams, LayerSpec, NetworkSpec, Projection,
    Shortcut,
};
use crate::error::Result;
use crate::numerics::BatchNormConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden_units: usize,
    pub hidden_layers: usize,
    pub input_dropout: f64,
    pub hidden_dropout: f64,
    pub head_dropout: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden_units: 500,
            hidden_layers: 3,
            input_dropout: 0.1,
            hidden_dropout: 0.2,
            head_dropout: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FcnConfig {
    pub filters: Vec<usize>,
    pub kernels: Vec<usize>,
}

impl Default for FcnConfig {
    fn default() -> Self {
        FcnConfig {
            filters: vec![128, 256, 128],
            kernels: vec![8, 5, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResnetConfig {
    /// Filter count shared by the three conv blocks of each residual block.
    pub block_filters: Vec<usize>,
    pub kernels: Vec<usize>,
}

impl Default for ResnetConfig {
    fn default() -> Self {
        ResnetConfig {
            block_filters: vec![64, 128, 128],
            kernels: vec![8, 5, 3],
        }
    }
}

fn dense(name: &str, inputs: usize, units: usize) -> LayerSpec {
    LayerSpec::Dense(DenseParams {
        inputs,
        units,
        weight: format!("{name}.weight"),
        bias: format!("{name}.bias"),
    })
}

fn conv_params(name: &str, in_channels: usize, filters: usize, kernel: usize) -> ConvParams {
    ConvParams {
        in_channels,
        filters,
        kernel,
        weight: format!("{name}.weight"),
        bias: format!("{name}.bias"),
    }
}

fn bn_params(name: &str, channels: usize) -> BatchNormParams {
    BatchNormParams {
        channels,
        gamma: format!("{name}.gamma"),
        beta: format!("{name}.beta"),
        running_mean: format!("{name}.running_mean"),
        running_var: format!("{name}.running_var"),
    }
}

/// conv -> batchnorm -> relu
fn conv_block(layers: &mut Vec<LayerSpec>, name: &str, in_ch: usize, filters: usize, kernel: usize) {
    layers.push(LayerSpec::Conv(conv_params(&format!("{name}.conv"), in_ch, filters, kernel)));
    layers.push(LayerSpec::BatchNorm(bn_params(&format!("{name}.bn"), filters)));
    layers.push(LayerSpec::Relu);
}

fn gap_head(layers: &mut Vec<LayerSpec>, features: usize, classes: usize) {
    layers.push(LayerSpec::GlobalAvgPool);
    layers.push(dense("head", features, classes));
    layers.push(LayerSpec::SoftmaxHead);
}

pub fn build_mlp(input_len: usize, classes: usize) -> Result<NetworkSpec> {
    build_mlp_with(input_len, classes, &MlpConfig::default())
}

/// Dropout precedes every dense layer: the input rate before the first,
/// the hidden rate before the remaining hidden layers, the head rate
/// before the output layer.
pub fn build_mlp_with(input_len: usize, classes: usize, cfg: &MlpConfig) -> Result<NetworkSpec> {
    let mut layers = Vec::new();
    let mut width = input_len;
    for i in 0..cfg.hidden_layers {
        let rate = if i == 0 { cfg.input_dropout } else { cfg.hidden_dropout };
        layers.push(LayerSpec::Dropout { rate });
        layers.push(dense(&format!("dense{}", i + 1), width, cfg.hidden_units));
        layers.push(LayerSpec::Relu);
        width = cfg.hidden_units;
    }
    layers.push(LayerSpec::Dropout {
        rate: cfg.head_dropout,
    });
    layers.push(dense("head", width, classes));
    layers.push(LayerSpec::SoftmaxHead);
    finish(Architecture::Mlp, input_len, classes, layers, Vec::new())
}

pub fn build_fcn(input_len: usize, classes: usize) -> Result<NetworkSpec> {
    build_fcn_with(input_len, classes, &FcnConfig::default())
}

pub fn build_fcn_with(input_len: usize, classes: usize, cfg: &FcnConfig) -> Result<NetworkSpec> {
    if cfg.filters.len() != cfg.kernels.len() || cfg.filters.is_empty() {
        return Err(crate::Error::invalid("fcn: filters and kernels must be non-empty and equal length"));
    }
    let mut layers = Vec::new();
    let mut ch = 1;
    for (i, (&f, &k)) in cfg.filters.iter().zip(&cfg.kernels).enumerate() {
        conv_block(&mut layers, &format!("block{}", i + 1), ch, f, k);
        ch = f;
    }
    gap_head(&mut layers, ch, classes);
    finish(Architecture::Fcn, input_len, classes, layers, Vec::new())
}

pub fn build_resnet(input_len: usize, classes: usize) -> Result<NetworkSpec> {
    build_resnet_with(input_len, classes, &ResnetConfig::default())
}

/// Each residual block stacks one conv block per kernel size, all with the
/// block's filter count, adds the block input (projected by 1x1 conv + BN
/// when the channel count changes) and applies ReLU after the sum.
pub fn build_resnet_with(input_len: usize, classes: usize, cfg: &ResnetConfig) -> Result<NetworkSpec> {
    if cfg.block_filters.is_empty() || cfg.kernels.is_empty() {
        return Err(crate::Error::invalid("resnet: needs at least one block and one kernel"));
    }
    let mut layers: Vec<LayerSpec> = Vec::new();
    let mut shortcuts = Vec::new();
    let mut ch = 1;
    for (b, &filters) in cfg.block_filters.iter().enumerate() {
        let name = format!("res{}", b + 1);
        let source = layers.len().checked_sub(1);
        let mut in_ch = ch;
        for (j, &k) in cfg.kernels.iter().enumerate() {
            conv_block(&mut layers, &format!("{name}.block{}", j + 1), in_ch, filters, k);
            in_ch = filters;
        }
        let projection = (ch != filters).then(|| Projection {
            conv: conv_params(&format!("{name}.shortcut.conv"), ch, filters, 1),
            batchnorm: bn_params(&format!("{name}.shortcut.bn"), filters),
        });
        shortcuts.push(Shortcut {
            source,
            sink: layers.len(),
            projection,
        });
        layers.push(LayerSpec::AddShortcut {
            shortcut: shortcuts.len() - 1,
        });
        layers.push(LayerSpec::Relu);
        ch = filters;
    }
    gap_head(&mut layers, ch, classes);
    finish(Architecture::Resnet, input_len, classes, layers, shortcuts)
}

fn finish(
    architecture: Architecture,
    input_len: usize,
    classes: usize,
    layers: Vec<LayerSpec>,
    shortcuts: Vec<Shortcut>,
) -> Result<NetworkSpec> {
    let spec = NetworkSpec {
        architecture,
        input_len,
        classes,
        layers,
        shortcuts,
        batchnorm: BatchNormConfig::default(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Full-sized network of the given kind.
pub fn build(architecture: Architecture, input_len: usize, classes: usize) -> Result<NetworkSpec> {
    match architecture {
        Architecture::Mlp => build_mlp(input_len, classes),
        Architecture::Fcn => build_fcn(input_len, classes),
        Architecture::Resnet => build_resnet(input_len, classes),
    }
}
