use serde::{Deserialize, Serialize};

use super::ResultsTable;

/// Per-class error: `pce[d][m] = e / c_d`.
pub fn pce(table: &ResultsTable) -> Vec<Vec<f64>> {
    table
        .errors
        .iter()
        .zip(&table.classes)
        .map(|(row, &c)| row.iter().map(|e| e / c as f64).collect())
        .collect()
}

/// Mean per-class error of each model over all datasets.
pub fn mpce(table: &ResultsTable) -> Vec<f64> {
    let p = pce(table);
    let k = p.len() as f64;
    (0..table.models.len())
        .map(|m| p.iter().map(|row| row[m]).sum::<f64>() / k)
        .collect()
}

/// Datasets on which each model attains the row minimum; ties count for
/// every tied model.
pub fn win_counts(table: &ResultsTable) -> Vec<usize> {
    let mut wins = vec![0; table.models.len()];
    for row in &table.errors {
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        for (m, &e) in row.iter().enumerate() {
            if e == min {
                wins[m] += 1;
            }
        }
    }
    wins
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieRule {
    /// Tied entries all get the lowest rank of their run (1, 1, 3).
    #[default]
    Min,
    /// Tied entries share the mean of their run (1.5, 1.5, 3).
    Average,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMean {
    Arithmetic,
    Geometric,
}

/// Ascending ranks starting at 1.
pub fn rank(values: &[f64], rule: TieRule) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = match rule {
            TieRule::Min => (i + 1) as f64,
            TieRule::Average => (i + j + 2) as f64 / 2.0,
        };
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn mean_ranks(table: &ResultsTable, mean: RankMean, rule: TieRule) -> Vec<f64> {
    let ranks: Vec<Vec<f64>> = table.errors.iter().map(|row| rank(row, rule)).collect();
    let k = ranks.len() as f64;
    (0..table.models.len())
        .map(|m| match mean {
            RankMean::Arithmetic => ranks.iter().map(|r| r[m]).sum::<f64>() / k,
            RankMean::Geometric => (ranks.iter().map(|r| r[m].ln()).sum::<f64>() / k).exp(),
        })
        .collect()
}
