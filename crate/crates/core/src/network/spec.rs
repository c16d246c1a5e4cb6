use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::BatchNormConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Mlp,
    Fcn,
    Resnet,
}

impl Architecture {
    pub fn name(self) -> &'static str {
        match self {
            Architecture::Mlp => "mlp",
            Architecture::Fcn => "fcn",
            Architecture::Resnet => "resnet",
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mlp" => Ok(Architecture::Mlp),
            "fcn" => Ok(Architecture::Fcn),
            "resnet" => Ok(Architecture::Resnet),
            other => Err(Error::invalid(format!(
                "unknown model '{other}' (expected mlp, fcn or resnet)"
            ))),
        }
    }
}

impl std::fmt::Display for Architecture {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvParams {
    pub in_channels: usize,
    pub filters: usize,
    pub kernel: usize,
    pub weight: String,
    pub bias: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    pub inputs: usize,
    pub units: usize,
    pub weight: String,
    pub bias: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchNormParams {
    pub channels: usize,
    pub gamma: String,
    pub beta: String,
    pub running_mean: String,
    pub running_var: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Dropout { rate: f64 },
    Dense(DenseParams),
    Conv(ConvParams),
    BatchNorm(BatchNormParams),
    Relu,
    GlobalAvgPool,
    /// Adds the shortcut `spec.shortcuts[shortcut]` to the previous output.
    AddShortcut { shortcut: usize },
    /// Marks the logits; softmax is applied by the loss or by `predict_proba`.
    SoftmaxHead,
}

/// 1x1 convolution followed by batch normalization, used when a shortcut
/// has to change the channel count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub conv: ConvParams,
    pub batchnorm: BatchNormParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shortcut {
    /// Layer whose output feeds the shortcut; `None` is the network input.
    pub source: Option<usize>,
    /// Index of the `AddShortcut` layer.
    pub sink: usize,
    pub projection: Option<Projection>,
}

/// Activation extent after a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extent {
    Sequence { channels: usize, len: usize },
    Flat { features: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub architecture: Architecture,
    pub input_len: usize,
    pub classes: usize,
    pub layers: Vec<LayerSpec>,
    pub shortcuts: Vec<Shortcut>,
    pub batchnorm: BatchNormConfig,
}

impl NetworkSpec {
    /// Extent of the network input as the first layer sees it.
    pub fn input_extent(&self) -> Extent {
        match self.architecture {
            Architecture::Mlp => Extent::Flat {
                features: self.input_len,
            },
            Architecture::Fcn | Architecture::Resnet => Extent::Sequence {
                channels: 1,
                len: self.input_len,
            },
        }
    }

    /// Walks the layer list and returns each layer's output extent, checking
    /// channel agreement, shortcut operand equality and the acyclic shortcut
    /// topology.
    pub fn extents(&self) -> Result<Vec<Extent>> {
        if self.input_len == 0 || self.classes < 2 {
            return Err(Error::invalid(format!(
                "network needs input length >= 1 and >= 2 classes, got T={} C={}",
                self.input_len, self.classes
            )));
        }
        let mut out: Vec<Extent> = Vec::with_capacity(self.layers.len());
        let mut cur = self.input_extent();
        for (i, layer) in self.layers.iter().enumerate() {
            let bad = |msg: String| Error::shape(format!("layer {i}: {msg}"));
            cur = match (layer, cur) {
                (LayerSpec::Dropout { rate }, e) => {
                    if !(0.0..1.0).contains(rate) {
                        return Err(bad(format!("dropout rate {rate} not in [0,1)")));
                    }
                    e
                }
                (LayerSpec::Relu, e) => e,
                (LayerSpec::Dense(d), Extent::Flat { features }) => {
                    if d.inputs != features {
                        return Err(bad(format!("dense expects {} inputs, got {features}", d.inputs)));
                    }
                    Extent::Flat { features: d.units }
                }
                (LayerSpec::Conv(c), Extent::Sequence { channels, len }) => {
                    if c.in_channels != channels || c.kernel == 0 {
                        return Err(bad(format!(
                            "conv expects {} channels (K={}), got {channels}",
                            c.in_channels, c.kernel
                        )));
                    }
                    Extent::Sequence {
                        channels: c.filters,
                        len,
                    }
                }
                (LayerSpec::BatchNorm(b), e) => {
                    let ch = match e {
                        Extent::Sequence { channels, .. } => channels,
                        Extent::Flat { features } => features,
                    };
                    if b.channels != ch {
                        return Err(bad(format!("batchnorm over {} channels, got {ch}", b.channels)));
                    }
                    e
                }
                (LayerSpec::GlobalAvgPool, Extent::Sequence { channels, .. }) => {
                    Extent::Flat { features: channels }
                }
                (LayerSpec::AddShortcut { shortcut }, e) => {
                    let sc = self
                        .shortcuts
                        .get(*shortcut)
                        .ok_or_else(|| bad(format!("unknown shortcut {shortcut}")))?;
                    if sc.sink != i {
                        return Err(bad(format!("shortcut {shortcut} sinks at {}", sc.sink)));
                    }
                    let src = match sc.source {
                        None => self.input_extent(),
                        Some(s) if s < i => out[s],
                        Some(s) => return Err(bad(format!("shortcut source {s} is not upstream"))),
                    };
                    let src = match (&sc.projection, src) {
                        (None, s) => s,
                        (Some(p), Extent::Sequence { channels, len }) => {
                            if p.conv.in_channels != channels
                                || p.conv.kernel != 1
                                || p.batchnorm.channels != p.conv.filters
                            {
                                return Err(bad("malformed shortcut projection".into()));
                            }
                            Extent::Sequence {
                                channels: p.conv.filters,
                                len,
                            }
                        }
                        (Some(_), Extent::Flat { .. }) => {
                            return Err(bad("projection needs a sequence source".into()))
                        }
                    };
                    if src != e {
                        return Err(bad(format!("shortcut operands differ: {src:?} vs {e:?}")));
                    }
                    e
                }
                (LayerSpec::SoftmaxHead, Extent::Flat { features }) => {
                    if features != self.classes {
                        return Err(bad(format!("head sees {features} logits for {} classes", self.classes)));
                    }
                    Extent::Flat { features }
                }
                (layer, e) => return Err(bad(format!("{layer:?} cannot follow {e:?}"))),
            };
            out.push(cur);
        }
        if !matches!(self.layers.last(), Some(LayerSpec::SoftmaxHead)) {
            return Err(Error::shape("network must end with a softmax head"));
        }
        for (k, sc) in self.shortcuts.iter().enumerate() {
            if !matches!(self.layers.get(sc.sink), Some(LayerSpec::AddShortcut { shortcut }) if *shortcut == k) {
                return Err(Error::shape(format!("shortcut {k} has no matching add layer")));
            }
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.extents().map(|_| ())
    }

    /// Index of the last layer that outputs a sequence before global
    /// average pooling, i.e. the activation maps a CAM is built from.
    pub fn feature_layer(&self) -> Option<usize> {
        let gap = self
            .layers
            .iter()
            .position(|l| matches!(l, LayerSpec::GlobalAvgPool))?;
        gap.checked_sub(1)
    }

    pub fn conv_layers(&self) -> impl Iterator<Item = &ConvParams> {
        self.layers.iter().filter_map(|l| match l {
            LayerSpec::Conv(c) => Some(c),
            _ => None,
        })
    }
}
