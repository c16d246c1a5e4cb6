use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::hypothesis::{paired_t_test, significance_groups, wilcoxon_rank_sum, Tail};
use super::pca::pca_project;
use super::scores::{mean_ranks, mpce, pce, win_counts, RankMean, TieRule};
use super::ResultsTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportOptions {
    pub tie_rule: TieRule,
    /// Which paired t-test tail feeds the p matrix and the grouping.
    pub t_tail: Tail,
    pub alpha: f64,
    /// Continuity correction in the rank-sum normal approximation.
    pub continuity: bool,
    /// Z-score PCE across models within each dataset before the t-tests,
    /// grouping and PCA.
    pub normalize: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            tie_rule: TieRule::Min,
            t_tail: Tail::OneSided,
            alpha: 0.05,
            continuity: false,
            normalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub models: Vec<String>,
    pub datasets: usize,
    pub options: ReportOptions,
    pub mpce: Vec<f64>,
    pub wins: Vec<usize>,
    pub arithmetic_rank: Vec<f64>,
    pub geometric_rank: Vec<f64>,
    /// Rank-sum p-values between PCE columns; diagonal is 1.
    pub ranksum_p: Vec<Vec<f64>>,
    /// Paired t-test p-values on PCE; diagonal is 1.
    pub ttest_p: Vec<Vec<f64>>,
    pub groups: Vec<Vec<String>>,
    /// First two principal coordinates of each model's PCE vector.
    pub pca: Vec<Vec<f64>>,
}

/// Z-scores each row; constant rows become zero.
fn zscore_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| {
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let sd = (r.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            r.iter().map(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 }).collect()
        })
        .collect()
}

fn columns(rows: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
}

impl ComparisonReport {
    pub fn compute(table: &ResultsTable, options: ReportOptions) -> Result<Self> {
        if !(options.alpha > 0.0 && options.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {} not in (0, 1)", options.alpha)));
        }
        let m = table.models.len();
        let per_class = pce(table);
        let raw_cols = columns(&per_class, m);
        let test_cols = if options.normalize {
            columns(&zscore_rows(&per_class), m)
        } else {
            raw_cols.clone()
        };

        // One dataset gives nothing to test: off-diagonal p-values stay NaN.
        let testable = table.datasets.len() >= 2;
        let fill = if testable { 1.0 } else { f64::NAN };
        let mut ranksum_p: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { fill }).collect()).collect();
        let mut ttest_p = ranksum_p.clone();
        for i in (0..m).filter(|_| testable) {
            for j in i + 1..m {
                let r = wilcoxon_rank_sum(&raw_cols[i], &raw_cols[j], options.continuity)?.p;
                let t = paired_t_test(&test_cols[i], &test_cols[j])?.p(options.t_tail);
                ranksum_p[i][j] = r;
                ranksum_p[j][i] = r;
                ttest_p[i][j] = t;
                ttest_p[j][i] = t;
            }
        }
        let groups = significance_groups(&ttest_p, options.alpha)
            .into_iter()
            .map(|g| g.into_iter().map(|i| table.models[i].clone()).collect())
            .collect();
        let pca = if m >= 2 && testable {
            pca_project(&test_cols, 2.min(table.datasets.len()))?.coords
        } else {
            vec![vec![0.0; 2]; m]
        };
        Ok(ComparisonReport {
            models: table.models.clone(),
            datasets: table.datasets.len(),
            options,
            mpce: mpce(table),
            wins: win_counts(table),
            arithmetic_rank: mean_ranks(table, RankMean::Arithmetic, options.tie_rule),
            geometric_rank: mean_ranks(table, RankMean::Geometric, options.tie_rule),
            ranksum_p,
            ttest_p,
            groups,
            pca,
        })
    }

    fn matrix_csv(&self, matrix: &[Vec<f64>]) -> String {
        let mut s = format!("model,{}\n", self.models.join(","));
        for (name, row) in self.models.iter().zip(matrix) {
            s.push_str(name);
            for v in row {
                s.push_str(&format!(",{v:.6e}"));
            }
            s.push('\n');
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("model,mpce,wins,arithmetic_rank,geometric_rank,pc1,pc2,group\n");
        for (i, name) in self.models.iter().enumerate() {
            let group = self.groups.iter().position(|g| g.contains(name)).unwrap_or(0);
            let pc = |d: usize| self.pca[i].get(d).copied().unwrap_or(0.0);
            s.push_str(&format!(
                "{name},{:.6},{},{:.4},{:.4},{:.6},{:.6},{group}\n",
                self.mpce[i],
                self.wins[i],
                self.arithmetic_rank[i],
                self.geometric_rank[i],
                pc(0),
                pc(1)
            ));
        }
        s
    }

    /// Writes `report.json`, `summary.csv`, `ranksum_p.csv` and
    /// `ttest_p.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("report.json", serde_json::to_string_pretty(self)?),
            ("summary.csv", self.summary_csv()),
            ("ranksum_p.csv", self.matrix_csv(&self.ranksum_p)),
            ("ttest_p.csv", self.matrix_csv(&self.ttest_p)),
        ];
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrices_are_symmetric_probabilities() {
        let r = ComparisonReport::compute(&ResultsTable::bundled(), ReportOptions::default()).unwrap();
        for i in 0..11 {
            for j in 0..11 {
                assert_eq!(r.ranksum_p[i][j], r.ranksum_p[j][i]);
                assert_eq!(r.ttest_p[i][j], r.ttest_p[j][i]);
                assert!((0.0..=1.0).contains(&r.ttest_p[i][j]));
                assert!((0.0..=1.0).contains(&r.ranksum_p[i][j]));
            }
        }
        let members: usize = r.groups.iter().map(Vec::len).sum();
        assert_eq!(members, 11);
    }

    #[test]
    fn normalized_variant_runs() {
        let opts = ReportOptions { normalize: true, ..Default::default() };
        let r = ComparisonReport::compute(&ResultsTable::bundled(), opts).unwrap();
        assert_eq!(r.pca.len(), 11);
        assert!(r.summary_csv().lines().count() == 12);
    }
}
