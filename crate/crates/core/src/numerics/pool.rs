use super::Tensor;
use crate::error::{Error, Result};

/// Temporal mean per channel: `[B,C,T] -> [B,C]`.
pub fn global_avg_pool_forward(input: &Tensor) -> Result<Tensor> {
    let &[batch, channels, len] = input.expect_rank(3, "global_avg_pool input [B,C,T]")? else {
        unreachable!()
    };
    let data = input
        .data()
        .chunks(len)
        .map(|row| row.iter().sum::<f64>() / len as f64)
        .collect();
    Tensor::new(vec![batch, channels], data)
}

/// Spreads each pooled gradient evenly (`grad / T`) over the time axis.
pub fn global_avg_pool_backward(grad_out: &Tensor, input_len: usize) -> Result<Tensor> {
    let &[batch, channels] = grad_out.expect_rank(2, "global_avg_pool grad_out [B,C]")? else {
        unreachable!()
    };
    if input_len == 0 {
        return Err(Error::shape("global_avg_pool_backward: zero time length"));
    }
    let scale = 1.0 / input_len as f64;
    let mut data = Vec::with_capacity(batch * channels * input_len);
    for &g in grad_out.data() {
        data.extend(std::iter::repeat_n(g * scale, input_len));
    }
    Tensor::new(vec![batch, channels, input_len], data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::{check_gradient, random_tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn means() {
        let x = Tensor::new(vec![1, 2, 3], vec![1., 2., 3., 4., 4., 4.]).unwrap();
        let y = global_avg_pool_forward(&x).unwrap();
        assert_eq!(y.shape(), &[1, 2]);
        assert_eq!(y.data(), &[2.0, 4.0]);
    }

    #[test]
    fn rejects_rank_two() {
        assert!(global_avg_pool_forward(&Tensor::zeros(&[2, 3])).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let x = random_tensor(&[2, 3, 5], &mut rng);
        let probe = random_tensor(&[2, 3], &mut rng);
        let g = global_avg_pool_backward(&probe, 5).unwrap();
        check_gradient(&x, &g, |v| {
            let y = global_avg_pool_forward(v).unwrap();
            y.data().iter().zip(probe.data()).map(|(a, p)| a * p).sum()
        })
        .assert_below(1e-4);
    }
}
