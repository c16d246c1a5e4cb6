use rand::Rng;

use super::{Mode, Tensor};
use crate::error::{Error, Result};

/// NaN passes through (`f64::max` would turn it into 0).
pub fn relu_forward(input: &Tensor) -> Tensor {
    input.map(|x| if x < 0.0 { 0.0 } else { x })
}

/// Passes `grad_out` only where the forward input was strictly positive.
pub fn relu_backward(grad_out: &Tensor, input: &Tensor) -> Result<Tensor> {
    grad_out.check_same_shape(input, "relu_backward")?;
    let data = grad_out
        .data()
        .iter()
        .zip(input.data())
        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

/// Per-element scale applied by inverted dropout: `0` or `1 / (1 - p)`.
#[derive(Debug, Clone)]
pub struct DropoutMask(Tensor);

impl DropoutMask {
    pub fn scales(&self) -> &Tensor {
        &self.0
    }
}

/// Inverted dropout: in train mode each element is zeroed with probability
/// `rate` and survivors are scaled by `1 / (1 - rate)`; infer mode is the
/// identity and returns no mask.
pub fn dropout_forward(
    input: &Tensor,
    rate: f64,
    rng: &mut impl Rng,
    mode: Mode,
) -> Result<(Tensor, Option<DropoutMask>)> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::invalid(format!("dropout rate {rate} not in [0, 1)")));
    }
    if mode == Mode::Infer || rate == 0.0 {
        return Ok((input.clone(), None));
    }
    let keep = 1.0 / (1.0 - rate);
    let scales: Vec<f64> = (0..input.len())
        .map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep })
        .collect();
    let out = input
        .data()
        .iter()
        .zip(&scales)
        .map(|(x, s)| x * s)
        .collect();
    Ok((
        Tensor::new(input.shape().to_vec(), out)?,
        Some(DropoutMask(Tensor::new(input.shape().to_vec(), scales)?)),
    ))
}

pub fn dropout_backward(grad_out: &Tensor, mask: Option<&DropoutMask>) -> Result<Tensor> {
    match mask {
        None => Ok(grad_out.clone()),
        Some(DropoutMask(scales)) => {
            grad_out.check_same_shape(scales, "dropout_backward")?;
            let data = grad_out
                .data()
                .iter()
                .zip(scales.data())
                .map(|(g, s)| g * s)
                .collect();
            Tensor::new(grad_out.shape().to_vec(), data)
        }
    }
}
