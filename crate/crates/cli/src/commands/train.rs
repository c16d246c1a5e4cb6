use tsc_core::trainer::{self, MODEL_FILE, OPTIMIZER_FILE, RECORD_FILE};

use super::load_data;
use crate::cli::TrainArgs;
use crate::config::{parse_model, resolve_training, FileConfig};
use crate::failure::{CliResult, Failure};
use crate::manifest::{ensure_dir, ManifestBuilder};

pub fn train(args: &TrainArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("train");
    let file = FileConfig::load(args.training.config.as_deref())?;
    let model = args
        .model
        .clone()
        .or(file.model.clone())
        .ok_or_else(|| Failure::usage("need --model (mlp, fcn or resnet)"))?;
    let mut cfg = resolve_training(parse_model(&model)?, &args.training, &file)?;
    let split = load_data(&args.data, &file)?;
    ensure_dir(&args.out)?;
    cfg.checkpoint = Some(args.out.clone());

    let trained = trainer::train(&split, &cfg)?;
    let r = &trained.record;
    println!(
        "{} {}: best epoch {} loss {:.6e}, test error {:.4} ({:.1}s)",
        r.dataset, r.architecture, r.best_epoch, r.best_loss, r.test_error, r.wall_seconds
    );
    let config = serde_json::json!({
        "training": cfg,
        "data": args.data,
        "normalization": split.normalization,
    });
    let artifacts = [MODEL_FILE, OPTIMIZER_FILE, RECORD_FILE]
        .iter()
        .map(|f| args.out.join(f))
        .collect();
    manifest.finish(&args.out, config, Some(cfg.seed), artifacts)?;
    Ok(())
}
