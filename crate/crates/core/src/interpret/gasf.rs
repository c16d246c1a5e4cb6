use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{LayerSpec, NetworkSpec, ParameterSet};

/// Rescaled values may overshoot [0, 1] by this much from round-off.
const RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasfMatrix {
    pub size: usize,
    /// Row-major `size × size`.
    pub values: Vec<f64>,
    /// The rescaled series the field was built from.
    pub source: Vec<f64>,
}

impl GasfMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    /// Square CSV, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in self.values.chunks(self.size) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    /// Reads back a square CSV matrix; the source series is recovered from
    /// the diagonal.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        let mut size = 0;
        for (i, line) in text.lines().filter(|l| !l.trim().is_empty()).enumerate() {
            let row = line
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| Error::Parse {
                        source_name: "gasf csv".into(),
                        line: i + 1,
                        message: format!("non-numeric cell '{f}'"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if i == 0 {
                size = row.len();
            } else if row.len() != size {
                return Err(Error::Parse {
                    source_name: "gasf csv".into(),
                    line: i + 1,
                    message: format!("{} cells, expected {size}", row.len()),
                });
            }
            values.extend(row);
        }
        if size == 0 || values.len() != size * size {
            return Err(Error::data("gasf csv is not a square matrix"));
        }
        let source = (0..size).map(|i| ((values[i * size + i] + 1.0) / 2.0).max(0.0).sqrt()).collect();
        Ok(GasfMatrix { size, values, source })
    }
}

/// `(x − min) / (max − min)`.
pub fn rescale01(series: &[f64]) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::invalid("cannot rescale an empty series"));
    }
    let (lo, hi) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::data("series contains non-finite values"));
    }
    if hi == lo {
        return Err(Error::data("series has zero range, cannot rescale to [0, 1]"));
    }
    Ok(series.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

fn check_unit(x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("empty series"));
    }
    match x.iter().find(|v| !(**v >= -RANGE_SLACK && **v <= 1.0 + RANGE_SLACK)) {
        Some(v) => Err(Error::invalid(format!("value {v} outside [0, 1]; rescale first"))),
        None => Ok(()),
    }
}

/// `G_ij = cos(φ_i + φ_j)` with `φ = arccos(x̃)`.
pub fn gasf(x: &[f64]) -> Result<GasfMatrix> {
    check_unit(x)?;
    let phi: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0).acos()).collect();
    let n = x.len();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let g = (phi[i] + phi[j]).cos();
            values[i * n + j] = g;
            values[j * n + i] = g;
        }
    }
    Ok(GasfMatrix { size: n, values, source: x.to_vec() })
}

/// `G = x̃ x̃ᵀ − √(1 − x̃²) √(1 − x̃²)ᵀ`.
pub fn gasf_algebraic(x: &[f64]) -> Result<GasfMatrix> {
    check_unit(x)?;
    let x: Vec<f64> = x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let s: Vec<f64> = x.iter().map(|v| (1.0 - v * v).sqrt()).collect();
    let n = x.len();
    let values = (0..n * n).map(|k| x[k / n] * x[k % n] - s[k / n] * s[k % n]).collect();
    Ok(GasfMatrix { size: n, values, source: x })
}

/// GASF of every filter of a convolution layer (flattened over input
/// channels) or every unit's incoming weights of a dense layer. A failure on
/// one filter does not stop the others.
pub fn weight_gasf(spec: &NetworkSpec, params: &ParameterSet, layer: usize) -> Result<Vec<Result<GasfMatrix>>> {
    let rows: Vec<Vec<f64>> = match spec.layers.get(layer) {
        Some(LayerSpec::Conv(c)) => {
            let w = params.trainable(&c.weight)?;
            w.data().chunks(c.in_channels * c.kernel).map(<[f64]>::to_vec).collect()
        }
        Some(LayerSpec::Dense(d)) => {
            let w = params.trainable(&d.weight)?;
            (0..d.units)
                .map(|u| (0..d.inputs).map(|f| w.data()[f * d.units + u]).collect())
                .collect()
        }
        Some(_) => return Err(Error::invalid(format!("layer {layer} has no weights"))),
        None => return Err(Error::invalid(format!("layer {layer} out of range ({} layers)", spec.layers.len()))),
    };
    Ok(rows
        .iter()
        .map(|r| {
            if r.len() == 1 {
                // a single weight has no range; treat it as the top of the scale
                return gasf(&[1.0]);
            }
            gasf(&rescale01(r)?)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale01(&[-2.0, 0.0, 2.0]).unwrap(), vec![0.0, 0.5, 1.0]);
        let unit = [0.0, 0.3, 1.0, 0.7];
        assert_eq!(rescale01(&unit).unwrap(), unit.to_vec());
        assert!(rescale01(&[3.0, 3.0]).is_err());
    }

    #[test]
    fn gasf_examples() {
        let g = gasf(&[0.0, 1.0]).unwrap();
        let want = [-1.0, 0.0, 0.0, 1.0];
        for (a, b) in g.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((gasf(&[0.5]).unwrap().values[0] + 0.5).abs() < 1e-15);
        assert!(gasf(&[1.5]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = gasf(&[0.1, 0.9, 0.0, 1.0, 0.33]).unwrap();
        let back = GasfMatrix::from_csv(&g.to_csv()).unwrap();
        assert_eq!(back.size, 5);
        for (a, b) in g.values.iter().zip(&back.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(GasfMatrix::from_csv("1,2\n3\n").is_err());
    }
}
