use std::collections::HashMap;

use rand::Rng;

use super::params::{Gradients, ParameterSet};
use super::spec::{BatchNormParams, ConvParams, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::numerics::{
    add_forward, batchnorm_backward, batchnorm_forward, conv1d_backward, conv1d_forward,
    dense_backward, dense_forward, dropout_backward, dropout_forward, global_avg_pool_backward,
    global_avg_pool_forward, relu_backward, relu_forward, softmax, update_running_stats,
    BatchNormCache, DropoutMask, Mode, Tensor,
};

enum LayerCache {
    None,
    Dropout(Option<DropoutMask>),
    BatchNorm(BatchNormCache),
    Gap(usize),
    Projection(BatchNormCache),
}

/// Intermediate values retained by [`forward`] for [`backward`].
pub struct ActivationCache {
    input: Tensor,
    outputs: Vec<Tensor>,
    layers: Vec<LayerCache>,
}

impl ActivationCache {
    /// Output of layer `index`.
    pub fn output(&self, index: usize) -> &Tensor {
        &self.outputs[index]
    }

    fn layer_input(&self, index: usize) -> &Tensor {
        if index == 0 {
            &self.input
        } else {
            &self.outputs[index - 1]
        }
    }

    fn source(&self, source: Option<usize>) -> &Tensor {
        match source {
            None => &self.input,
            Some(s) => &self.outputs[s],
        }
    }
}

/// Batch statistics a train-mode forward pass wants folded into the
/// running statistics.
#[derive(Debug, Clone)]
pub struct RunningUpdate {
    pub mean_slot: String,
    pub var_slot: String,
    pub batch_mean: Vec<f64>,
    pub batch_var: Vec<f64>,
}

pub struct ForwardPass {
    pub logits: Tensor,
    pub cache: ActivationCache,
    pub running_updates: Vec<RunningUpdate>,
}

/// Reshapes `[B, T]` series into whatever the first layer consumes.
fn network_input(spec: &NetworkSpec, series: &Tensor) -> Result<Tensor> {
    let &[batch, len] = series.expect_rank(2, "network input [B,T]")? else {
        unreachable!()
    };
    if len != spec.input_len {
        return Err(Error::shape(format!(
            "network expects series of length {}, got {len}",
            spec.input_len
        )));
    }
    match spec.input_extent() {
        super::spec::Extent::Flat { .. } => Ok(series.clone()),
        super::spec::Extent::Sequence { .. } => series.clone().reshape(vec![batch, 1, len]),
    }
}

fn conv(params: &ParameterSet, c: &ConvParams, x: &Tensor) -> Result<Tensor> {
    conv1d_forward(x, params.trainable(&c.weight)?, params.trainable(&c.bias)?)
}

fn batchnorm(
    spec: &NetworkSpec,
    params: &ParameterSet,
    b: &BatchNormParams,
    x: &Tensor,
    mode: Mode,
    updates: &mut Vec<RunningUpdate>,
) -> Result<(Tensor, BatchNormCache)> {
    let out = batchnorm_forward(
        x,
        params.trainable(&b.gamma)?,
        params.trainable(&b.beta)?,
        params.running(&b.running_mean)?,
        params.running(&b.running_var)?,
        mode,
        &spec.batchnorm,
    )?;
    if let Some((batch_mean, batch_var)) = out.batch_stats {
        updates.push(RunningUpdate {
            mean_slot: b.running_mean.clone(),
            var_slot: b.running_var.clone(),
            batch_mean,
            batch_var,
        });
    }
    Ok((out.output, out.cache))
}

/// Runs the network on `series` (`[B, T]`) and returns the logits together
/// with everything `backward` needs. Infer mode uses running batch-norm
/// statistics and identity dropout, so it never draws from `rng`.
pub fn forward(
    spec: &NetworkSpec,
    params: &ParameterSet,
    series: &Tensor,
    mode: Mode,
    rng: &mut impl Rng,
) -> Result<ForwardPass> {
    let input = network_input(spec, series)?;
    let mut outputs: Vec<Tensor> = Vec::with_capacity(spec.layers.len());
    let mut caches = Vec::with_capacity(spec.layers.len());
    let mut updates = Vec::new();
    for (i, layer) in spec.layers.iter().enumerate() {
        let x = if i == 0 { &input } else { &outputs[i - 1] };
        let (y, cache) = match layer {
            LayerSpec::Dropout { rate } => {
                let (y, mask) = dropout_forward(x, *rate, rng, mode)?;
                (y, LayerCache::Dropout(mask))
            }
            LayerSpec::Dense(d) => (
                dense_forward(x, params.trainable(&d.weight)?, params.trainable(&d.bias)?)?,
                LayerCache::None,
            ),
            LayerSpec::Conv(c) => (conv(params, c, x)?, LayerCache::None),
            LayerSpec::BatchNorm(b) => {
                let (y, c) = batchnorm(spec, params, b, x, mode, &mut updates)?;
                (y, LayerCache::BatchNorm(c))
            }
            LayerSpec::Relu => (relu_forward(x), LayerCache::None),
            LayerSpec::GlobalAvgPool => (global_avg_pool_forward(x)?, LayerCache::Gap(x.shape()[2])),
            LayerSpec::AddShortcut { shortcut } => {
                let sc = &spec.shortcuts[*shortcut];
                let src = match sc.source {
                    None => &input,
                    Some(s) => &outputs[s],
                };
                match &sc.projection {
                    None => (add_forward(x, src)?, LayerCache::None),
                    Some(p) => {
                        let projected = conv(params, &p.conv, src)?;
                        let (normed, c) =
                            batchnorm(spec, params, &p.batchnorm, &projected, mode, &mut updates)?;
                        (add_forward(x, &normed)?, LayerCache::Projection(c))
                    }
                }
            }
            LayerSpec::SoftmaxHead => (x.clone(), LayerCache::None),
        };
        outputs.push(y);
        caches.push(cache);
    }
    let logits = outputs
        .last()
        .cloned()
        .ok_or_else(|| Error::shape("network has no layers"))?;
    Ok(ForwardPass {
        logits,
        cache: ActivationCache {
            input,
            outputs,
            layers: caches,
        },
        running_updates: updates,
    })
}

/// Folds the batch statistics of a train-mode pass into `params`.
pub fn apply_running_updates(
    params: &mut ParameterSet,
    updates: &[RunningUpdate],
    momentum: f64,
) -> Result<()> {
    for u in updates {
        let mut mean = params.running(&u.mean_slot)?.clone();
        let mut var = params.running(&u.var_slot)?.clone();
        update_running_stats(&mut mean, &mut var, &u.batch_mean, &u.batch_var, momentum);
        params.running.insert(u.mean_slot.clone(), mean);
        params.running.insert(u.var_slot.clone(), var);
    }
    Ok(())
}

/// Gradient of a scalar loss with respect to every trainable slot, given
/// the loss gradient at the logits.
pub fn backward(
    spec: &NetworkSpec,
    params: &ParameterSet,
    cache: &ActivationCache,
    grad_logits: &Tensor,
) -> Result<Gradients> {
    let mut grads = Gradients::default();
    let mut pending: HashMap<usize, Tensor> = HashMap::new();
    let mut grad = grad_logits.clone();
    grad.check_same_shape(cache.outputs.last().expect("non-empty"), "backward grad_logits")?;

    for (i, layer) in spec.layers.iter().enumerate().rev() {
        if let Some(extra) = pending.remove(&i) {
            grad.add_assign(&extra)?;
        }
        let x = cache.layer_input(i);
        grad = match (layer, &cache.layers[i]) {
            (LayerSpec::Dropout { .. }, LayerCache::Dropout(mask)) => {
                dropout_backward(&grad, mask.as_ref())?
            }
            (LayerSpec::Dense(d), _) => {
                let g = dense_backward(&grad, x, params.trainable(&d.weight)?)?;
                grads.accumulate(&d.weight, g.weights)?;
                grads.accumulate(&d.bias, g.bias)?;
                g.input
            }
            (LayerSpec::Conv(c), _) => {
                let g = conv1d_backward(&grad, x, params.trainable(&c.weight)?)?;
                grads.accumulate(&c.weight, g.kernels)?;
                grads.accumulate(&c.bias, g.bias)?;
                g.input
            }
            (LayerSpec::BatchNorm(b), LayerCache::BatchNorm(bc)) => {
                let g = batchnorm_backward(&grad, bc, params.trainable(&b.gamma)?)?;
                grads.accumulate(&b.gamma, g.gamma)?;
                grads.accumulate(&b.beta, g.beta)?;
                g.input
            }
            (LayerSpec::Relu, _) => relu_backward(&grad, x)?,
            (LayerSpec::GlobalAvgPool, LayerCache::Gap(len)) => global_avg_pool_backward(&grad, *len)?,
            (LayerSpec::AddShortcut { shortcut }, lc) => {
                let sc = &spec.shortcuts[*shortcut];
                let branch = match (&sc.projection, lc) {
                    (None, _) => grad.clone(),
                    (Some(p), LayerCache::Projection(bc)) => {
                        let g_bn = batchnorm_backward(&grad, bc, params.trainable(&p.batchnorm.gamma)?)?;
                        grads.accumulate(&p.batchnorm.gamma, g_bn.gamma)?;
                        grads.accumulate(&p.batchnorm.beta, g_bn.beta)?;
                        let src = cache.source(sc.source);
                        let g_conv = conv1d_backward(&g_bn.input, src, params.trainable(&p.conv.weight)?)?;
                        grads.accumulate(&p.conv.weight, g_conv.kernels)?;
                        grads.accumulate(&p.conv.bias, g_conv.bias)?;
                        g_conv.input
                    }
                    _ => return Err(Error::shape("cache does not match spec at shortcut")),
                };
                if let Some(s) = sc.source {
                    match pending.get_mut(&s) {
                        Some(acc) => acc.add_assign(&branch)?,
                        None => {
                            pending.insert(s, branch);
                        }
                    }
                }
                grad
            }
            (LayerSpec::SoftmaxHead, _) => grad,
            _ => return Err(Error::shape(format!("cache does not match spec at layer {i}"))),
        };
    }
    Ok(grads)
}

/// Infer-mode logits.
pub fn infer_logits(spec: &NetworkSpec, params: &ParameterSet, series: &Tensor) -> Result<Tensor> {
    // Infer mode draws nothing, so any generator will do.
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    Ok(forward(spec, params, series, Mode::Infer, &mut rng)?.logits)
}

/// Infer-mode class probabilities, one row per series.
pub fn predict_proba(spec: &NetworkSpec, params: &ParameterSet, series: &Tensor) -> Result<Tensor> {
    softmax(&infer_logits(spec, params, series)?)
}

/// Index of the largest entry, ties going to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Infer-mode predicted class per series.
pub fn predict(spec: &NetworkSpec, params: &ParameterSet, series: &Tensor) -> Result<Vec<usize>> {
    let logits = infer_logits(spec, params, series)?;
    Ok(logits.data().chunks(spec.classes).map(argmax).collect())
}
