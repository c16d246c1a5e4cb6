use super::Tensor;
use crate::error::{Error, Result};

/// Row-wise softmax with max subtraction.
pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    let &[_, classes] = logits.expect_rank(2, "softmax logits [B,C]")? else {
        unreachable!()
    };
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.data().chunks(classes) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|z| (z - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        out.extend(exps.into_iter().map(|e| e / total));
    }
    Tensor::new(logits.shape().to_vec(), out)
}

/// Mean categorical cross-entropy over the batch and its logit gradient
/// `(softmax - target) / B`.
pub fn softmax_cross_entropy(logits: &Tensor, targets: &Tensor) -> Result<(f64, Tensor)> {
    logits.check_same_shape(targets, "softmax_cross_entropy")?;
    let &[batch, classes] = logits.expect_rank(2, "softmax_cross_entropy logits [B,C]")? else {
        unreachable!()
    };
    if classes == 0 {
        return Err(Error::shape("softmax_cross_entropy: no classes"));
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (row, target) in logits.data().chunks(classes).zip(targets.data().chunks(classes)) {
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        for (&z, &t) in row.iter().zip(target) {
            let log_p = z - max - log_sum;
            loss -= t * log_p;
            grad.push((log_p.exp() - t) / batch as f64);
        }
    }
    Ok((loss / batch as f64, Tensor::new(logits.shape().to_vec(), grad)?))
}

/// Elementwise sum for residual shortcuts. The backward pass hands the
/// upstream gradient unchanged to both operands.
pub fn add_forward(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    a.check_same_shape(b, "add")?;
    let mut out = a.clone();
    out.add_assign(b)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gradcheck::{check_gradient, random_tensor};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one_hot_rows(labels: &[usize], c: usize) -> Tensor {
        let mut t = Tensor::zeros(&[labels.len(), c]);
        for (i, &l) in labels.iter().enumerate() {
            t.data_mut()[i * c + l] = 1.0;
        }
        t
    }

    #[test]
    fn uniform_logits_give_log_c() {
        for c in [2usize, 3, 7] {
            let logits = Tensor::full(&[2, c], 0.3);
            let (loss, _) = softmax_cross_entropy(&logits, &one_hot_rows(&[0, c - 1], c)).unwrap();
            assert!((loss - (c as f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_falls_monotonically_as_true_logit_grows() {
        let target = one_hot_rows(&[1], 3);
        let mut prev = f64::INFINITY;
        for z in [0.0, 1.0, 5.0, 20.0, 100.0, 800.0] {
            let logits = Tensor::new(vec![1, 3], vec![0.0, z, 0.0]).unwrap();
            let (loss, g) = softmax_cross_entropy(&logits, &target).unwrap();
            assert!(loss >= 0.0 && loss.is_finite());
            assert!(loss < prev || (loss == 0.0 && prev == 0.0));
            assert!(g.is_finite());
            prev = loss;
        }
        assert!(prev < 1e-12);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = softmax(&random_tensor(&[5, 4], &mut rng).scale(30.0)).unwrap();
        for row in p.data().chunks(4) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let logits = random_tensor(&[4, 3], &mut rng);
        let target = one_hot_rows(&[0, 2, 1, 1], 3);
        let (_, g) = softmax_cross_entropy(&logits, &target).unwrap();
        check_gradient(&logits, &g, |v| softmax_cross_entropy(v, &target).unwrap().0)
            .assert_below(1e-4);
    }

    #[test]
    fn add_is_commutative_with_zero_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let a = random_tensor(&[2, 3, 4], &mut rng);
        let b = random_tensor(&[2, 3, 4], &mut rng);
        assert_eq!(add_forward(&a, &Tensor::zeros(&[2, 3, 4])).unwrap(), a);
        assert_eq!(add_forward(&a, &b).unwrap(), add_forward(&b, &a).unwrap());
        assert!(add_forward(&a, &Tensor::zeros(&[2, 3, 5])).is_err());
    }
}
