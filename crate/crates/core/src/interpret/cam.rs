use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{forward, Architecture, DenseParams, LayerSpec, NetworkSpec, ParameterSet};
use crate::numerics::{softmax, Mode, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CamTrace {
    pub class: usize,
    /// `M_c` at every input position.
    pub values: Vec<f64>,
    /// Softmax likelihood of every class for this series.
    pub likelihoods: Vec<f64>,
}

/// Linear interpolation of `values` onto `len` evenly spaced positions with
/// both endpoints aligned.
pub fn upsample_linear(values: &[f64], len: usize) -> Vec<f64> {
    let n = values.len();
    if n == len || n == 0 {
        return values.to_vec();
    }
    if n == 1 || len == 1 {
        return vec![values[0]; len];
    }
    let scale = (n - 1) as f64 / (len - 1) as f64;
    (0..len)
        .map(|i| {
            if i == len - 1 {
                return values[n - 1];
            }
            let x = i as f64 * scale;
            let lo = x.floor() as usize;
            let frac = x - lo as f64;
            if frac == 0.0 {
                values[lo]
            } else {
                values[lo] * (1.0 - frac) + values[lo + 1] * frac
            }
        })
        .collect()
}

fn head(spec: &NetworkSpec) -> Result<(usize, &DenseParams)> {
    let unsupported = || {
        Error::Unsupported(format!(
            "class activation maps need a global-average-pooling head; {} has none (unsupported architecture)",
            spec.architecture
        ))
    };
    if spec.architecture == Architecture::Mlp {
        return Err(unsupported());
    }
    let feature = spec.feature_layer().ok_or_else(unsupported)?;
    let dense = spec.layers[feature + 1..]
        .iter()
        .find_map(|l| match l {
            LayerSpec::Dense(d) => Some(d),
            _ => None,
        })
        .ok_or_else(unsupported)?;
    Ok((feature, dense))
}

/// Class activation maps of one series for every class.
pub fn cam_all(spec: &NetworkSpec, params: &ParameterSet, series: &[f64]) -> Result<Vec<CamTrace>> {
    let (feature, dense) = head(spec)?;
    if series.len() != spec.input_len {
        return Err(Error::shape(format!(
            "series has length {}, network expects {}",
            series.len(),
            spec.input_len
        )));
    }
    let x = Tensor::new(vec![1, series.len()], series.to_vec())?;
    let pass = forward(spec, params, &x, Mode::Infer, &mut ChaCha8Rng::seed_from_u64(0))?;
    let likelihoods = softmax(&pass.logits)?.into_data();
    let maps = pass.cache.output(feature);
    let &[_, filters, len] = maps.shape() else {
        return Err(Error::shape("feature layer output is not [1, K, T]"));
    };
    let w = params.trainable(&dense.weight)?;
    let classes = spec.classes;
    (0..classes)
        .map(|c| {
            let mut m = vec![0.0; len];
            for k in 0..filters {
                let wk = w.data()[k * classes + c];
                for (acc, s) in m.iter_mut().zip(&maps.data()[k * len..(k + 1) * len]) {
                    *acc += wk * s;
                }
            }
            let values = upsample_linear(&m, spec.input_len);
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("class activation map for class {c} is not finite")));
            }
            Ok(CamTrace {
                class: c,
                values,
                likelihoods: likelihoods.clone(),
            })
        })
        .collect()
}

/// `M_c(x) = Σ_k w_k^c S_k(x)` over the last pre-pooling activation.
pub fn cam(spec: &NetworkSpec, params: &ParameterSet, series: &[f64], class: usize) -> Result<CamTrace> {
    if class >= spec.classes {
        return Err(Error::invalid(format!("class {class} out of range for {} classes", spec.classes)));
    }
    Ok(cam_all(spec, params, series)?.swap_remove(class))
}

/// Two header rows (likelihoods aligned under each class column, then
/// column names) followed by `t, raw_value, M_0, M_1, ...`.
pub fn cam_csv(series: &[f64], traces: &[CamTrace]) -> String {
    let mut s = String::from("likelihood,");
    for t in traces {
        s.push_str(&format!(",{:.16e}", t.likelihoods[t.class]));
    }
    s.push_str("\nt,raw_value");
    for t in traces {
        s.push_str(&format!(",M_{}", t.class));
    }
    s.push('\n');
    for (i, v) in series.iter().enumerate() {
        s.push_str(&format!("{i},{v:.16e}"));
        for t in traces {
            s.push_str(&format!(",{:.16e}", t.values[i]));
        }
        s.push('\n');
    }
    s
}
