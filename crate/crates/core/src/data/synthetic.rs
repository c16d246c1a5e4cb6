use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{DatasetSplit, Labeled};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntheticKind {
    /// Class 0: sine, class 1: square wave; three periods, phase drawn from
    /// `[0, π/4)` so that noiseless classes are 1-NN separable.
    SineVsSquare,
    /// Cylinder-bell-funnel shapes. Class 0: bell (ramp up, sharp drop),
    /// class 1: funnel (sharp rise, ramp down), class 2: cylinder (plateau).
    CbfLike,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::SineVsSquare => "sine-vs-square",
            SyntheticKind::CbfLike => "cbf-like",
        }
    }

    pub fn classes(self) -> usize {
        match self {
            SyntheticKind::SineVsSquare => 2,
            SyntheticKind::CbfLike => 3,
        }
    }
}

impl std::str::FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine-vs-square" => Ok(SyntheticKind::SineVsSquare),
            "cbf-like" | "cbf" => Ok(SyntheticKind::CbfLike),
            other => Err(Error::invalid(format!("unknown synthetic kind '{other}'"))),
        }
    }
}

const PERIODS: f64 = 3.0;

fn sine_or_square(class: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let phase = rng.random_range(0.0..PI / 4.0);
    (0..len)
        .map(|t| {
            let s = (2.0 * PI * PERIODS * t as f64 / len as f64 + phase).sin();
            if class == 0 {
                s
            } else if s >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect()
}

fn cbf(class: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = len as f64;
    let a = rng.random_range(n / 8.0..=n / 4.0).floor();
    let b = (a + rng.random_range(n / 4.0..=3.0 * n / 4.0)).floor().min(n - 1.0);
    let amp = 6.0 + rng.sample::<f64, _>(StandardNormal);
    (0..len)
        .map(|t| {
            let t = t as f64;
            if t < a || t > b {
                return 0.0;
            }
            match class {
                0 => amp * (t - a) / (b - a),
                1 => amp * (b - t) / (b - a),
                _ => amp,
            }
        })
        .collect()
}

fn make_part(kind: SyntheticKind, per_class: usize, len: usize, noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> Labeled {
    let classes = kind.classes();
    let mut values = Vec::with_capacity(per_class * classes * len);
    let mut labels = Vec::with_capacity(per_class * classes);
    for i in 0..per_class * classes {
        let class = i % classes;
        let clean = match kind {
            SyntheticKind::SineVsSquare => sine_or_square(class, len, rng),
            SyntheticKind::CbfLike => cbf(class, len, rng),
        };
        values.extend(clean.into_iter().map(|v| v + noise.sample(rng)));
        labels.push(class);
    }
    Labeled {
        series: Tensor::new(vec![labels.len(), len], values).expect("non-empty"),
        labels,
    }
}

/// Generates a labelled corpus with `per_class` series of length `len` per
/// class in each split, plus Gaussian noise of standard deviation `noise`.
/// The same seed always produces the same corpus.
pub fn make_synthetic(
    kind: SyntheticKind,
    per_class: usize,
    len: usize,
    noise: f64,
    seed: u64,
) -> Result<DatasetSplit> {
    if per_class == 0 {
        return Err(Error::invalid("synthetic corpus needs at least one series per class"));
    }
    if len < 4 {
        return Err(Error::invalid("synthetic series need length >= 4"));
    }
    let noise = Normal::new(0.0, noise).map_err(|e| Error::invalid(format!("noise level: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train = make_part(kind, per_class, len, &noise, &mut rng);
    let test = make_part(kind, per_class, len, &noise, &mut rng);
    Ok(DatasetSplit {
        name: kind.name().to_string(),
        train,
        test,
        classes: kind.classes(),
        label_values: (0..kind.classes()).map(|c| c as f64).collect(),
        normalization: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force 1-nearest-neighbour test error under Euclidean distance.
    fn one_nn_error(split: &DatasetSplit) -> f64 {
        let mut wrong = 0;
        for i in 0..split.test.len() {
            let q = split.test.series.row(i);
            let mut best = (f64::INFINITY, 0);
            for j in 0..split.train.len() {
                let d: f64 = q.iter().zip(split.train.series.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
                if d < best.0 {
                    best = (d, split.train.labels[j]);
                }
            }
            if best.1 != split.test.labels[i] {
                wrong += 1;
            }
        }
        wrong as f64 / split.test.len() as f64
    }

    #[test]
    fn noiseless_sine_vs_square_is_one_nn_separable() {
        for seed in [0, 1, 2] {
            let s = make_synthetic(SyntheticKind::SineVsSquare, 50, 64, 0.0, seed).unwrap();
            assert_eq!(one_nn_error(&s), 0.0, "seed {seed}");
        }
    }

    #[test]
    fn seeded_corpus_is_bit_identical() {
        let a = make_synthetic(SyntheticKind::CbfLike, 5, 32, 0.1, 9).unwrap();
        let b = make_synthetic(SyntheticKind::CbfLike, 5, 32, 0.1, 9).unwrap();
        assert_eq!(a, b);
        let c = make_synthetic(SyntheticKind::CbfLike, 5, 32, 0.1, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn shapes_and_balance() {
        let s = make_synthetic(SyntheticKind::CbfLike, 4, 40, 0.0, 1).unwrap();
        assert_eq!(s.train.series.shape(), &[12, 40]);
        assert_eq!(s.test.len(), 12);
        for c in 0..3 {
            assert_eq!(s.train.labels.iter().filter(|&&l| l == c).count(), 4);
        }
        // bell rises to its peak then drops, funnel the reverse
        let bell = s.train.series.row(0);
        let peak = bell.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(bell[peak + 1] == 0.0 || peak == 39);
    }

    #[test]
    fn zero_per_class_is_an_error() {
        assert!(make_synthetic(SyntheticKind::SineVsSquare, 0, 64, 0.0, 0).is_err());
    }
}
