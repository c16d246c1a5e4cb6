mod bench;
mod inspect;
mod stats;
mod train;

use tsc_core::data::{load_ucr, make_synthetic, znormalize, DatasetSplit, SyntheticKind};

use crate::cli::{DataArgs, SplitArg, SynthArgs};
use crate::config::FileConfig;
use crate::failure::{CliResult, Failure};
use crate::manifest::{ensure_dir, ManifestBuilder};

pub use bench::bench;
pub use inspect::{cam, gasf};
pub use stats::stats;
pub use train::train;

/// Loads (or generates) the dataset and z-normalizes it with training
/// statistics.
pub fn load_data(args: &DataArgs, file: &FileConfig) -> CliResult<DatasetSplit> {
    let raw = if let Some(kind) = &args.synthetic {
        let kind: SyntheticKind = kind.parse()?;
        make_synthetic(kind, args.per_class, args.length, args.noise, args.data_seed)?
    } else {
        let dir = args
            .data_dir
            .clone()
            .or(file.data_dir.clone())
            .ok_or_else(|| Failure::usage("need --data-dir and --dataset, or --synthetic"))?;
        let name = args
            .dataset
            .clone()
            .or(file.dataset.clone())
            .ok_or_else(|| Failure::usage("need --dataset"))?;
        load_ucr(&dir, &name)?
    };
    Ok(znormalize(&raw)?)
}

pub fn pick_series(split: &DatasetSplit, which: SplitArg, index: usize) -> CliResult<(Vec<f64>, usize)> {
    let part = match which {
        SplitArg::Train => &split.train,
        SplitArg::Test => &split.test,
    };
    if index >= part.len() {
        return Err(Failure::usage(format!(
            "--index {index} out of range: split has {} series",
            part.len()
        )));
    }
    Ok((part.series.row(index).to_vec(), part.labels[index]))
}

pub fn synth(args: &SynthArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("synth");
    let kind: SyntheticKind = args.kind.parse()?;
    let split = make_synthetic(kind, args.per_class, args.length, args.noise, args.seed)?;
    ensure_dir(&args.out)?;
    let (train, test) = tsc_core::data::save_ucr(&split, &args.out)?;
    let config = serde_json::json!({
        "kind": kind,
        "per_class": args.per_class,
        "length": args.length,
        "noise": args.noise,
    });
    manifest.finish(&args.out, config, Some(args.seed), vec![train, test])?;
    println!("wrote {} in {}", split.name, args.out.display());
    Ok(())
}
