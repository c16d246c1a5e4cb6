use serde::{Deserialize, Serialize};

use super::{Mode, Tensor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchNormConfig {
    pub epsilon: f64,
    /// Weight kept on the old running statistic at each update.
    pub momentum: f64,
}

impl Default for BatchNormConfig {
    fn default() -> Self {
        BatchNormConfig {
            epsilon: 1e-5,
            momentum: 0.99,
        }
    }
}

/// What the backward pass needs from a forward call.
#[derive(Debug, Clone)]
pub struct BatchNormCache {
    normalized: Tensor,
    inv_std: Vec<f64>,
    mode: Mode,
}

#[derive(Debug, Clone)]
pub struct BatchNormOutput {
    pub output: Tensor,
    pub cache: BatchNormCache,
    /// Per-channel batch mean and (biased) variance; `None` in infer mode.
    pub batch_stats: Option<(Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone)]
pub struct BatchNormGrads {
    pub input: Tensor,
    pub gamma: Tensor,
    pub beta: Tensor,
}

/// `(batch, channels, time)` with dense `[B,F]` input read as `T = 1`.
fn layout(input: &Tensor) -> Result<(usize, usize, usize)> {
    match *input.shape() {
        [b, c, t] => Ok((b, c, t)),
        [b, f] => Ok((b, f, 1)),
        _ => Err(Error::shape(format!(
            "batchnorm: expected [B,C,T] or [B,F], got {:?}",
            input.shape()
        ))),
    }
}

fn check_channel_vec(t: &Tensor, channels: usize, what: &str) -> Result<()> {
    if t.shape() != [channels] {
        return Err(Error::shape(format!(
            "batchnorm: {what} shape {:?} != [{channels}]",
            t.shape()
        )));
    }
    Ok(())
}

/// Per-channel normalization over batch and time followed by the affine map.
///
/// Train mode normalizes with batch statistics and reports them so the
/// caller can fold them into the running statistics with
/// [`update_running_stats`]; infer mode reads the running statistics only.
pub fn batchnorm_forward(
    input: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    running_mean: &Tensor,
    running_var: &Tensor,
    mode: Mode,
    config: &BatchNormConfig,
) -> Result<BatchNormOutput> {
    let (batch, channels, len) = layout(input)?;
    for (t, what) in [
        (gamma, "gamma"),
        (beta, "beta"),
        (running_mean, "running_mean"),
        (running_var, "running_var"),
    ] {
        check_channel_vec(t, channels, what)?;
    }
    let x = input.data();
    let at = |b: usize, c: usize, t: usize| (b * channels + c) * len + t;

    let (mean, var, batch_stats) = match mode {
        Mode::Train => {
            let population = batch * len;
            if population < 2 {
                return Err(Error::invalid(format!(
                    "batchnorm: train mode needs at least 2 values per channel, got {population}"
                )));
            }
            let n = population as f64;
            let mut mean = vec![0.0; channels];
            let mut var = vec![0.0; channels];
            for c in 0..channels {
                let mut s = 0.0;
                for b in 0..batch {
                    for t in 0..len {
                        s += x[at(b, c, t)];
                    }
                }
                let m = s / n;
                let mut ss = 0.0;
                for b in 0..batch {
                    for t in 0..len {
                        let d = x[at(b, c, t)] - m;
                        ss += d * d;
                    }
                }
                mean[c] = m;
                var[c] = ss / n;
            }
            (mean.clone(), var.clone(), Some((mean, var)))
        }
        Mode::Infer => {
            if let Some(v) = running_var.data().iter().find(|v| **v < 0.0) {
                return Err(Error::Numeric(format!(
                    "batchnorm: negative running variance {v}"
                )));
            }
            (
                running_mean.data().to_vec(),
                running_var.data().to_vec(),
                None,
            )
        }
    };

    let inv_std: Vec<f64> = var
        .iter()
        .map(|v| 1.0 / (v + config.epsilon).sqrt())
        .collect();
    let mut normalized = vec![0.0; x.len()];
    let mut out = vec![0.0; x.len()];
    for b in 0..batch {
        for c in 0..channels {
            let (g, be) = (gamma.data()[c], beta.data()[c]);
            for t in 0..len {
                let i = at(b, c, t);
                let xh = (x[i] - mean[c]) * inv_std[c];
                normalized[i] = xh;
                out[i] = g * xh + be;
            }
        }
    }
    Ok(BatchNormOutput {
        output: Tensor::new(input.shape().to_vec(), out)?,
        cache: BatchNormCache {
            normalized: Tensor::new(input.shape().to_vec(), normalized)?,
            inv_std,
            mode,
        },
        batch_stats,
    })
}

/// `running = momentum * running + (1 - momentum) * batch`.
pub fn update_running_stats(
    running_mean: &mut Tensor,
    running_var: &mut Tensor,
    batch_mean: &[f64],
    batch_var: &[f64],
    momentum: f64,
) {
    for (r, b) in running_mean.data_mut().iter_mut().zip(batch_mean) {
        *r = momentum * *r + (1.0 - momentum) * b;
    }
    for (r, b) in running_var.data_mut().iter_mut().zip(batch_var) {
        *r = momentum * *r + (1.0 - momentum) * b;
    }
}

pub fn batchnorm_backward(
    grad_out: &Tensor,
    cache: &BatchNormCache,
    gamma: &Tensor,
) -> Result<BatchNormGrads> {
    grad_out.check_same_shape(&cache.normalized, "batchnorm_backward")?;
    let (batch, channels, len) = layout(grad_out)?;
    let gy = grad_out.data();
    let xh = cache.normalized.data();
    let at = |b: usize, c: usize, t: usize| (b * channels + c) * len + t;
    let n = (batch * len) as f64;

    let mut g_gamma = vec![0.0; channels];
    let mut g_beta = vec![0.0; channels];
    for b in 0..batch {
        for c in 0..channels {
            for t in 0..len {
                let i = at(b, c, t);
                g_gamma[c] += gy[i] * xh[i];
                g_beta[c] += gy[i];
            }
        }
    }

    let mut g_x = vec![0.0; gy.len()];
    for c in 0..channels {
        let g = gamma.data()[c];
        let inv = cache.inv_std[c];
        match cache.mode {
            Mode::Train => {
                // d xhat = gy * gamma; sums of d xhat and d xhat * xhat are g*g_beta and g*g_gamma
                let sum_dxh = g * g_beta[c];
                let sum_dxh_xh = g * g_gamma[c];
                for b in 0..batch {
                    for t in 0..len {
                        let i = at(b, c, t);
                        let dxh = gy[i] * g;
                        g_x[i] = inv / n * (n * dxh - sum_dxh - xh[i] * sum_dxh_xh);
                    }
                }
            }
            Mode::Infer => {
                for b in 0..batch {
                    for t in 0..len {
                        let i = at(b, c, t);
                        g_x[i] = gy[i] * g * inv;
                    }
                }
            }
        }
    }
    Ok(BatchNormGrads {
        input: Tensor::new(grad_out.shape().to_vec(), g_x)?,
        gamma: Tensor::new(vec![channels], g_gamma)?,
        beta: Tensor::new(vec![channels], g_beta)?,
    })
}
