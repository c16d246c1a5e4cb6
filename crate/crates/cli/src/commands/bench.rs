use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use tsc_core::data::{load_ucr, make_synthetic, znormalize, DatasetSplit, SyntheticKind};
use tsc_core::network::Architecture;
use tsc_core::trainer::{self, RunRecord, TrainingConfig, RECORD_FILE};

use crate::cli::BenchArgs;
use crate::config::{parse_model, resolve_training, FileConfig};
use crate::failure::{CliResult, Failure};
use crate::manifest::{ensure_dir, write_text, ManifestBuilder};

struct Cell {
    dataset: usize,
    model: usize,
    config: TrainingConfig,
    dir: PathBuf,
}

fn read_record(dir: &Path) -> Option<RunRecord> {
    let text = std::fs::read_to_string(dir.join(RECORD_FILE)).ok()?;
    serde_json::from_str(&text).ok()
}

fn load_all(args: &BenchArgs, file: &FileConfig) -> CliResult<Vec<DatasetSplit>> {
    if let Some(kind) = &args.synthetic {
        let kind: SyntheticKind = kind.parse()?;
        let split = make_synthetic(kind, args.per_class, args.length, args.noise, args.data_seed)?;
        return Ok(vec![znormalize(&split)?]);
    }
    let dir = args
        .data_dir
        .clone()
        .or(file.data_dir.clone())
        .ok_or_else(|| Failure::usage("need --data-dir with --datasets, or --synthetic"))?;
    if args.datasets.is_empty() {
        return Err(Failure::usage("need at least one name in --datasets"));
    }
    args.datasets
        .iter()
        .map(|name| Ok(znormalize(&load_ucr(&dir, name)?)?))
        .collect()
}

pub fn bench(args: &BenchArgs) -> CliResult<()> {
    let manifest = ManifestBuilder::start("bench");
    let file = FileConfig::load(args.training.config.as_deref())?;
    let archs: Vec<Architecture> = args.models.iter().map(|m| parse_model(m)).collect::<CliResult<_>>()?;
    if archs.is_empty() {
        return Err(Failure::usage("need at least one model in --models"));
    }
    if args.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    let splits = load_all(args, &file)?;

    let mut records: Vec<Vec<Option<RunRecord>>> = vec![vec![None; archs.len()]; splits.len()];
    let mut pending = Vec::new();
    for (d, split) in splits.iter().enumerate() {
        for (m, &arch) in archs.iter().enumerate() {
            let dir = args.out.join("cells").join(&split.name).join(arch.name());
            if let Some(record) = read_record(&dir) {
                log::info!("{} {}: already done, skipping", split.name, arch);
                records[d][m] = Some(record);
                continue;
            }
            let mut config = resolve_training(arch, &args.training, &file)?;
            config.checkpoint = Some(dir.clone());
            pending.push(Cell { dataset: d, model: m, config, dir });
        }
    }
    ensure_dir(&args.out)?;

    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::new());
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.min(pending.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(cell) = pending.get(i) else { break };
                let split = &splits[cell.dataset];
                match trainer::train(split, &cell.config) {
                    Ok(t) => {
                        println!(
                            "{} {}: test error {:.4} ({:.1}s)",
                            split.name, cell.config.architecture, t.record.test_error, t.record.wall_seconds
                        );
                        done.lock().unwrap().push((cell.dataset, cell.model, t.record));
                    }
                    Err(e) => {
                        eprintln!("{} {}: {e}", split.name, cell.config.architecture);
                        failures.lock().unwrap().push((cell.dir.clone(), e));
                    }
                }
            });
        }
    });
    for (d, m, record) in done.into_inner().unwrap() {
        records[d][m] = Some(record);
    }
    let failures = failures.into_inner().unwrap();
    if let Some((dir, e)) = failures.into_iter().next() {
        let mut f = Failure::from(e);
        f.message = format!("cell {} failed: {}; rerun to resume", dir.display(), f.message);
        return Err(f);
    }

    let mut results = String::from("dataset");
    for arch in &archs {
        results.push(',');
        results.push_str(arch.name());
    }
    results.push('\n');
    let mut classes = String::from("dataset,classes\n");
    for (d, split) in splits.iter().enumerate() {
        results.push_str(&split.name);
        for record in &records[d] {
            let record = record.as_ref().expect("every cell finished");
            results.push_str(&format!(",{:.16e}", record.test_error));
        }
        results.push('\n');
        classes.push_str(&format!("{},{}\n", split.name, split.classes));
    }
    let results_path = args.out.join("results.csv");
    let classes_path = args.out.join("classes.csv");
    write_text(&results_path, &results)?;
    write_text(&classes_path, &classes)?;

    let mut artifacts = vec![results_path, classes_path];
    for split in &splits {
        for arch in &archs {
            artifacts.push(args.out.join("cells").join(&split.name).join(arch.name()));
        }
    }
    let config = serde_json::json!({
        "datasets": splits.iter().map(|s| &s.name).collect::<Vec<_>>(),
        "models": args.models,
        "training": args.training,
        "jobs": args.jobs,
    });
    manifest.finish(&args.out, config, args.training.seed, artifacts)?;
    Ok(())
}
