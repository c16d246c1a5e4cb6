use super::gemm::{gemm, Mat};
use super::Tensor;
use crate::error::{Error, Result};

/// Zero padding on each side of the time axis for a same-length convolution.
/// Even kernels put the extra zero on the right.
pub fn same_padding(kernel: usize) -> (usize, usize) {
    let total = kernel - 1;
    (total / 2, total - total / 2)
}

/// Gradients of a convolution with respect to its three inputs.
#[derive(Debug, Clone)]
pub struct ConvGrads {
    pub input: Tensor,
    pub kernels: Tensor,
    pub bias: Tensor,
}

struct ConvDims {
    batch: usize,
    in_ch: usize,
    out_ch: usize,
    len: usize,
    kernel: usize,
}

fn conv_dims(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<ConvDims> {
    let x = input.expect_rank(3, "conv1d input [B,Cin,T]")?;
    let w = kernels.expect_rank(3, "conv1d kernels [Cout,Cin,K]")?;
    let b = bias.expect_rank(1, "conv1d bias [Cout]")?;
    if x[1] != w[1] {
        return Err(Error::shape(format!(
            "conv1d: input has {} channels, kernels expect {}",
            x[1], w[1]
        )));
    }
    if b[0] != w[0] {
        return Err(Error::shape(format!(
            "conv1d: bias length {} != filter count {}",
            b[0], w[0]
        )));
    }
    Ok(ConvDims {
        batch: x[0],
        in_ch: x[1],
        out_ch: w[0],
        len: x[2],
        kernel: w[2],
    })
}

/// Unfolds one batch item `[Cin, T]` into `[Cin*K, T]` columns.
fn im2col(x: &[f64], d: &ConvDims, cols: &mut [f64]) {
    let (pad_left, _) = same_padding(d.kernel);
    let t_len = d.len;
    for ci in 0..d.in_ch {
        let src = &x[ci * t_len..(ci + 1) * t_len];
        for j in 0..d.kernel {
            let row = &mut cols[(ci * d.kernel + j) * t_len..(ci * d.kernel + j + 1) * t_len];
            // out[t] reads src[t + j - pad_left]
            let shift = j as isize - pad_left as isize;
            for (t, slot) in row.iter_mut().enumerate() {
                let s = t as isize + shift;
                *slot = if s >= 0 && (s as usize) < t_len {
                    src[s as usize]
                } else {
                    0.0
                };
            }
        }
    }
}

fn col2im_add(cols: &[f64], d: &ConvDims, gx: &mut [f64]) {
    let (pad_left, _) = same_padding(d.kernel);
    let t_len = d.len;
    for ci in 0..d.in_ch {
        let dst = &mut gx[ci * t_len..(ci + 1) * t_len];
        for j in 0..d.kernel {
            let row = &cols[(ci * d.kernel + j) * t_len..(ci * d.kernel + j + 1) * t_len];
            let shift = j as isize - pad_left as isize;
            for (t, &g) in row.iter().enumerate() {
                let s = t as isize + shift;
                if s >= 0 && (s as usize) < t_len {
                    dst[s as usize] += g;
                }
            }
        }
    }
}

/// Stride-1, same-padded 1-D convolution (cross-correlation).
///
/// `input` is `[B, Cin, T]`, `kernels` is `[Cout, Cin, K]`, `bias` is
/// `[Cout]`; the result is `[B, Cout, T]`.
pub fn conv1d_forward(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let d = conv_dims(input, kernels, bias)?;
    let ck = d.in_ch * d.kernel;
    let mut out = vec![0.0; d.batch * d.out_ch * d.len];
    let mut cols = vec![0.0; ck * d.len];
    let w = Mat::new(kernels.data(), d.out_ch, ck);
    for b in 0..d.batch {
        let x = &input.data()[b * d.in_ch * d.len..(b + 1) * d.in_ch * d.len];
        im2col(x, &d, &mut cols);
        let y = &mut out[b * d.out_ch * d.len..(b + 1) * d.out_ch * d.len];
        for (co, row) in y.chunks_mut(d.len).enumerate() {
            row.fill(bias.data()[co]);
        }
        gemm(w, Mat::new(&cols, ck, d.len), 1.0, y);
    }
    Tensor::new(vec![d.batch, d.out_ch, d.len], out)
}

pub fn conv1d_backward(
    grad_out: &Tensor,
    input: &Tensor,
    kernels: &Tensor,
) -> Result<ConvGrads> {
    let w_shape = kernels.expect_rank(3, "conv1d kernels [Cout,Cin,K]")?;
    let bias_stub = Tensor::zeros(&[w_shape[0]]);
    let d = conv_dims(input, kernels, &bias_stub)?;
    let go = grad_out.expect_rank(3, "conv1d grad_out")?;
    if go != [d.batch, d.out_ch, d.len] {
        return Err(Error::shape(format!(
            "conv1d_backward: grad_out {go:?} does not match forward output [{}, {}, {}]",
            d.batch, d.out_ch, d.len
        )));
    }
    let ck = d.in_ch * d.kernel;
    let mut g_w = vec![0.0; d.out_ch * ck];
    let mut g_b = vec![0.0; d.out_ch];
    let mut g_x = vec![0.0; input.len()];
    let mut cols = vec![0.0; ck * d.len];
    let mut g_cols = vec![0.0; ck * d.len];
    let w = Mat::new(kernels.data(), d.out_ch, ck);
    for b in 0..d.batch {
        let x = &input.data()[b * d.in_ch * d.len..(b + 1) * d.in_ch * d.len];
        let gy = &grad_out.data()[b * d.out_ch * d.len..(b + 1) * d.out_ch * d.len];
        im2col(x, &d, &mut cols);
        let gy_mat = Mat::new(gy, d.out_ch, d.len);
        gemm(gy_mat, Mat::new(&cols, ck, d.len).t(), 1.0, &mut g_w);
        for (co, row) in gy.chunks(d.len).enumerate() {
            g_b[co] += row.iter().sum::<f64>();
        }
        gemm(w.t(), gy_mat, 0.0, &mut g_cols);
        col2im_add(
            &g_cols,
            &d,
            &mut g_x[b * d.in_ch * d.len..(b + 1) * d.in_ch * d.len],
        );
    }
    Ok(ConvGrads {
        input: Tensor::new(input.shape().to_vec(), g_x)?,
        kernels: Tensor::new(kernels.shape().to_vec(), g_w)?,
        bias: Tensor::new(vec![d.out_ch], g_b)?,
    })
}
