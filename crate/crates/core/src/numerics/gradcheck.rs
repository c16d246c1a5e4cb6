//! Central finite-difference oracle for hand-written backward passes.
//!
//! The oracle only ever calls the forward closure, so it stays independent
//! of the backward code it checks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::Tensor;

/// Perturbation used by [`check_gradient`].
pub const STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct GradCheck {
    /// `||analytic - numeric|| / max(||analytic||, ||numeric||)`.
    pub relative_error: f64,
    pub max_abs_error: f64,
}

impl GradCheck {
    pub fn assert_below(&self, tolerance: f64) {
        assert!(
            self.relative_error < tolerance,
            "gradient check failed: relative error {:.3e} (max abs {:.3e}) >= {tolerance:.0e}",
            self.relative_error,
            self.max_abs_error
        );
    }
}

/// Numerically differentiates `loss` at `point` and compares to `analytic`.
pub fn check_gradient(point: &Tensor, analytic: &Tensor, mut loss: impl FnMut(&Tensor) -> f64) -> GradCheck {
    let numeric = numeric_gradient(point, &mut loss);
    compare(analytic.data(), &numeric)
}

pub fn numeric_gradient(point: &Tensor, loss: &mut impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    let mut probe = point.clone();
    let mut grad = vec![0.0; point.len()];
    for i in 0..point.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + STEP;
        let up = loss(&probe);
        probe.data_mut()[i] = orig - STEP;
        let down = loss(&probe);
        probe.data_mut()[i] = orig;
        grad[i] = (up - down) / (2.0 * STEP);
    }
    grad
}

pub fn compare(analytic: &[f64], numeric: &[f64]) -> GradCheck {
    assert_eq!(analytic.len(), numeric.len(), "gradient lengths differ");
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, n)| a - n).collect();
    let scale = norm(analytic).max(norm(numeric)).max(1e-12);
    GradCheck {
        relative_error: norm(&diff) / scale,
        max_abs_error: diff.iter().fold(0.0, |m, d| m.max(d.abs())),
    }
}

/// Standard-normal tensor for property and gradient tests.
pub fn random_tensor(shape: &[usize], rng: &mut impl Rng) -> Tensor {
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    Tensor::new(shape.to_vec(), data).expect("shape is non-empty")
}
