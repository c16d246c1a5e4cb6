//! UCR-format loading, training-split z-normalization, label handling and
//! synthetic corpora.

mod synthetic;
mod ucr;

use serde::{Deserialize, Serialize};

pub use synthetic::{make_synthetic, SyntheticKind};
pub use ucr::{load_ucr, parse_ucr, save_ucr, ucr_paths};

use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Series matrix `[N, T]` with one class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Labeled {
    pub series: Tensor,
    pub labels: Vec<usize>,
}

impl Labeled {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn series_len(&self) -> usize {
        self.series.shape()[1]
    }

    pub fn subset(&self, rows: &[usize]) -> Labeled {
        Labeled {
            series: self.series.select_rows(rows),
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub mean: f64,
    pub std: f64,
}

/// A dataset's fixed train/test split.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub name: String,
    pub train: Labeled,
    pub test: Labeled,
    pub classes: usize,
    /// Original label value of each class index, ascending.
    pub label_values: Vec<f64>,
    /// Training-split statistics once [`znormalize`] has been applied.
    pub normalization: Option<Normalization>,
}

impl DatasetSplit {
    pub fn series_len(&self) -> usize {
        self.train.series_len()
    }
}

/// Z-normalizes both splits with the scalar mean and (population) standard
/// deviation of all training values.
pub fn znormalize(split: &DatasetSplit) -> Result<DatasetSplit> {
    let values = split.train.series.data();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if !(std > 0.0) || !std.is_finite() {
        return Err(Error::data(format!(
            "{}: training values have zero spread, cannot z-normalize",
            split.name
        )));
    }
    let apply = |l: &Labeled| Labeled {
        series: l.series.map(|v| (v - mean) / std),
        labels: l.labels.clone(),
    };
    Ok(DatasetSplit {
        name: split.name.clone(),
        train: apply(&split.train),
        test: apply(&split.test),
        classes: split.classes,
        label_values: split.label_values.clone(),
        normalization: Some(Normalization { mean, std }),
    })
}

/// `[N, C]` indicator rows.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Tensor> {
    if labels.is_empty() || classes == 0 {
        return Err(Error::invalid("one_hot needs labels and at least one class"));
    }
    let mut t = Tensor::zeros(&[labels.len(), classes]);
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::invalid(format!("label {l} out of range for {classes} classes")));
        }
        t.data_mut()[i * classes + l] = 1.0;
    }
    Ok(t)
}
