use super::gemm::{gemm, Mat};
use super::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub input: Tensor,
    pub weights: Tensor,
    pub bias: Tensor,
}

fn dense_dims(input: &Tensor, weights: &Tensor) -> Result<(usize, usize, usize)> {
    let x = input.expect_rank(2, "dense input [B,F]")?;
    let w = weights.expect_rank(2, "dense weights [F,U]")?;
    if x[1] != w[0] {
        return Err(Error::shape(format!(
            "dense: input has {} features, weights expect {}",
            x[1], w[0]
        )));
    }
    Ok((x[0], x[1], w[1]))
}

/// `y = x W + b` for `x: [B,F]`, `W: [F,U]`, `b: [U]`.
pub fn dense_forward(input: &Tensor, weights: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (batch, feat, units) = dense_dims(input, weights)?;
    if bias.shape() != [units] {
        return Err(Error::shape(format!(
            "dense: bias shape {:?} != [{units}]",
            bias.shape()
        )));
    }
    let mut out = Vec::with_capacity(batch * units);
    for _ in 0..batch {
        out.extend_from_slice(bias.data());
    }
    gemm(
        Mat::new(input.data(), batch, feat),
        Mat::new(weights.data(), feat, units),
        1.0,
        &mut out,
    );
    Tensor::new(vec![batch, units], out)
}

pub fn dense_backward(grad_out: &Tensor, input: &Tensor, weights: &Tensor) -> Result<DenseGrads> {
    let (batch, feat, units) = dense_dims(input, weights)?;
    if grad_out.shape() != [batch, units] {
        return Err(Error::shape(format!(
            "dense_backward: grad_out {:?} != [{batch}, {units}]",
            grad_out.shape()
        )));
    }
    let gy = Mat::new(grad_out.data(), batch, units);
    let mut g_w = vec![0.0; feat * units];
    gemm(Mat::new(input.data(), batch, feat).t(), gy, 0.0, &mut g_w);
    let mut g_x = vec![0.0; batch * feat];
    gemm(gy, Mat::new(weights.data(), feat, units).t(), 0.0, &mut g_x);
    let mut g_b = vec![0.0; units];
    for row in grad_out.data().chunks(units) {
        for (acc, g) in g_b.iter_mut().zip(row) {
            *acc += g;
        }
    }
    Ok(DenseGrads {
        input: Tensor::new(vec![batch, feat], g_x)?,
        weights: Tensor::new(vec![feat, units], g_w)?,
        bias: Tensor::new(vec![units], g_b)?,
    })
}
