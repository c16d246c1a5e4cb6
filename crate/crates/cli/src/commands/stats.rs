use tsc_core::evaluation::{
    ComparisonReport, ReportOptions, ResultsTable, Tail, TieRule,
};

use crate::cli::{StatsArgs, TailArg, TieArg};
use crate::failure::CliResult;
use crate::manifest::{ensure_dir, ManifestBuilder};

pub fn stats(args: &StatsArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("stats");
    let table = match (&args.results, &args.meta) {
        (Some(results), Some(meta)) if !args.bundled => ResultsTable::load(results, meta)?,
        _ => ResultsTable::bundled(),
    };
    let options = ReportOptions {
        tie_rule: match args.tie_rule {
            TieArg::Min => TieRule::Min,
            TieArg::Average => TieRule::Average,
        },
        t_tail: match args.t_tail {
            TailArg::OneSided => Tail::OneSided,
            TailArg::TwoSided => Tail::TwoSided,
        },
        alpha: args.alpha,
        continuity: args.continuity,
        normalize: args.normalize,
    };
    if table.models.len() < 2 {
        eprintln!("notice: only one model in the results table; pairwise rank and t tests skipped");
    }
    if table.datasets.len() < 2 {
        eprintln!("notice: only one dataset in the results table; p-values left undefined");
    }
    let report = ComparisonReport::compute(&table, options)?;
    ensure_dir(&args.out)?;
    let artifacts = report.write(&args.out)?;
    print!("{}", report.summary_csv());
    let config = serde_json::json!({
        "results": args.results,
        "meta": args.meta,
        "bundled": args.bundled,
        "options": options,
    });
    manifest.finish(&args.out, config, None, artifacts)?;
    Ok(())
}
