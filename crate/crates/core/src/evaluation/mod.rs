//! Multi-model, multi-dataset comparison statistics.

mod hypothesis;
mod pca;
mod report;
mod scores;
mod table;

pub use hypothesis::{
    paired_t_test, significance_groups, student_t_two_sided, wilcoxon_rank_sum, PairedTTest,
    RankSumTest, Tail,
};
pub use pca::{pca_project, Pca};
pub use report::{ComparisonReport, ReportOptions};
pub use scores::{mean_ranks, mpce, pce, rank, win_counts, RankMean, TieRule};
pub use table::{parse_class_counts, ResultsTable};

/// Test error of 11 classifiers on 44 UCR datasets.
pub const BUNDLED_RESULTS_CSV: &str = include_str!("../../fixtures/bundled_results.csv");
/// Class count per dataset for [`BUNDLED_RESULTS_CSV`].
pub const UCR_CLASSES_CSV: &str = include_str!("../../fixtures/ucr_classes.csv");
/// Published rank-sum p-values (`model_a,model_b,p`).
pub const REFERENCE_RANKSUM_CSV: &str = include_str!("../../fixtures/reference_ranksum.csv");
/// Published paired t-test p-values on PCE (`model_a,model_b,p`).
pub const REFERENCE_TTEST_CSV: &str = include_str!("../../fixtures/reference_ttest.csv");

/// Parses a `model_a,model_b,p` listing.
pub fn parse_pairs(text: &str) -> crate::Result<Vec<(String, String, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let p = record.get(2).unwrap_or("").parse().map_err(|_| crate::Error::Parse {
            source_name: "pairs".into(),
            line,
            message: format!("bad p-value '{}'", record.get(2).unwrap_or("")),
        })?;
        out.push((record[0].to_string(), record[1].to_string(), p));
    }
    Ok(out)
}
