use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// One row of `dims` coordinates per input vector.
    pub coords: Vec<Vec<f64>>,
    /// Unit principal axes, `dims × P`. The largest-magnitude entry of each
    /// axis is positive.
    pub components: Vec<Vec<f64>>,
    /// All covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub mean: Vec<f64>,
}

/// Projects `N` vectors of length `P` onto the top `dims` eigenvectors of
/// their sample covariance (denominator `N − 1`).
pub fn pca_project(vectors: &[Vec<f64>], dims: usize) -> Result<Pca> {
    let n = vectors.len();
    if n < 2 {
        return Err(Error::invalid("PCA needs at least two vectors"));
    }
    let p = vectors[0].len();
    if p == 0 || vectors.iter().any(|v| v.len() != p) {
        return Err(Error::shape("PCA vectors must share a non-zero length"));
    }
    if dims == 0 || dims > p {
        return Err(Error::invalid(format!("cannot project {p}-dimensional data onto {dims} axes")));
    }
    let mean: Vec<f64> = (0..p).map(|j| vectors.iter().map(|v| v[j]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n, p, |i, j| vectors[i][j] - mean[j]);
    let cov = x.transpose() * &x / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let components: Vec<Vec<f64>> = order[..dims]
        .iter()
        .map(|&k| {
            let mut axis: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let lead = axis
                .iter()
                .copied()
                .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
            if lead < 0.0 {
                axis.iter_mut().for_each(|v| *v = -*v);
            }
            axis
        })
        .collect();
    let coords = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|axis| axis.iter().enumerate().map(|(j, a)| a * x[(i, j)]).sum())
                .collect()
        })
        .collect();
    Ok(Pca { coords, components, eigenvalues, mean })
}
