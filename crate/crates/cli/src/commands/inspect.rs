use tsc_core::interpret::{cam_all, cam_csv, gasf as gasf_of, rescale01, weight_gasf};
use tsc_core::trainer::load_checkpoint;

use super::{load_data, pick_series};
use crate::cli::{CamArgs, GasfArgs};
use crate::config::FileConfig;
use crate::failure::{CliResult, Failure};
use crate::manifest::{ensure_dir, write_text, ManifestBuilder};

pub fn cam(args: &CamArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("cam");
    let model = load_checkpoint(&args.checkpoint)?;
    let split = load_data(&args.data, &FileConfig::default())?;
    let (series, label) = pick_series(&split, args.split, args.index)?;
    let traces = cam_all(&model.spec, &model.params, &series)?;
    ensure_dir(&args.out)?;
    let path = args.out.join("cam.csv");
    write_text(&path, &cam_csv(&series, &traces))?;
    let likelihoods = &traces[0].likelihoods;
    println!(
        "series {} (label {label}): likelihoods {:?} -> {}",
        args.index,
        likelihoods,
        path.display()
    );
    let config = serde_json::json!({
        "checkpoint": args.checkpoint,
        "data": args.data,
        "split": args.split,
        "index": args.index,
    });
    manifest.finish(&args.out, config, None, vec![path])?;
    Ok(())
}

pub fn gasf(args: &GasfArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("gasf");
    ensure_dir(&args.out)?;
    let mut artifacts = Vec::new();
    let config;
    if let Some(dir) = &args.checkpoint {
        let layer = args.layer.ok_or_else(|| Failure::usage("--checkpoint needs --layer"))?;
        let model = load_checkpoint(dir)?;
        let mut failed = 0;
        for (k, g) in weight_gasf(&model.spec, &model.params, layer)?.into_iter().enumerate() {
            match g {
                Ok(g) => {
                    let path = args.out.join(format!("filter_{k}.csv"));
                    write_text(&path, &g.to_csv())?;
                    artifacts.push(path);
                }
                Err(e) => {
                    failed += 1;
                    eprintln!("filter {k}: {e}");
                }
            }
        }
        println!("layer {layer}: {} filters written, {failed} skipped", artifacts.len());
        config = serde_json::json!({ "checkpoint": dir, "layer": layer, "skipped": failed });
    } else {
        let split = load_data(&args.data, &FileConfig::default())?;
        let (series, _) = pick_series(&split, args.split, args.index)?;
        let g = gasf_of(&rescale01(&series)?)?;
        let path = args.out.join("gasf.csv");
        write_text(&path, &g.to_csv())?;
        println!("{}x{} field -> {}", g.size, g.size, path.display());
        artifacts.push(path);
        config = serde_json::json!({ "data": args.data, "split": args.split, "index": args.index });
    }
    manifest.finish(&args.out, config, None, artifacts)?;
    Ok(())
}
