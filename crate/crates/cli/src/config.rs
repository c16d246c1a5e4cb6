use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tsc_core::network::Architecture;
use tsc_core::optim::OptimizerKind;
use tsc_core::trainer::TrainingConfig;

use crate::cli::TrainingArgs;
use crate::failure::{CliResult, Failure};

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub epochs: Option<usize>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
    pub optimizer: Option<String>,
    pub plateau: Option<bool>,
    pub paper_protocol: Option<bool>,
    pub schedule_factor: Option<f64>,
    pub schedule_patience: Option<usize>,
    pub schedule_floor: Option<f64>,
    pub data_dir: Option<PathBuf>,
    pub dataset: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::data(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
    }
}

pub fn parse_model(name: &str) -> CliResult<Architecture> {
    name.parse().map_err(|e: tsc_core::Error| Failure::usage(e.to_string()))
}

fn parse_optimizer(name: &str) -> CliResult<OptimizerKind> {
    match name {
        "adam" => Ok(OptimizerKind::Adam),
        "adadelta" => Ok(OptimizerKind::Adadelta),
        other => Err(Failure::usage(format!("unknown optimizer '{other}' (expected adam or adadelta)"))),
    }
}

/// Merges flags over the config file over the defaults for `arch`.
pub fn resolve_training(arch: Architecture, args: &TrainingArgs, file: &FileConfig) -> CliResult<TrainingConfig> {
    let mut cfg = TrainingConfig::new(arch);
    cfg.seed = args.seed.or(file.seed).unwrap_or(0);
    let paper = args.paper_protocol || file.paper_protocol.unwrap_or(false);
    let epochs = args.epochs.or(file.epochs);
    let batch = args.batch.or(file.batch);
    let optimizer = args.optimizer.clone().or(file.optimizer.clone());
    if paper {
        let pinned = [
            ("epochs", epochs.is_some()),
            ("batch", batch.is_some()),
            ("optimizer", optimizer.is_some()),
            ("plateau", args.no_plateau || file.plateau.is_some()),
        ];
        if let Some((name, _)) = pinned.iter().find(|(_, set)| *set) {
            return Err(Failure::usage(format!("--paper-protocol pins {name}; drop the explicit value")));
        }
        cfg.schedule.enabled = false;
        return Ok(cfg);
    }
    if let Some(e) = epochs {
        cfg.epochs = e;
    }
    if let Some(b) = batch {
        cfg.batch_size = b;
    }
    if let Some(o) = optimizer {
        cfg.optimizer = parse_optimizer(&o)?;
    }
    cfg.schedule.enabled = !args.no_plateau && file.plateau.unwrap_or(true);
    if let Some(f) = file.schedule_factor {
        cfg.schedule.factor = f;
    }
    if let Some(p) = file.schedule_patience {
        cfg.schedule.patience = p;
    }
    if let Some(f) = file.schedule_floor {
        cfg.schedule.floor = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> TrainingArgs {
        TrainingArgs {
            epochs: None,
            batch: None,
            seed: None,
            optimizer: None,
            no_plateau: false,
            paper_protocol: false,
            config: None,
        }
    }

    #[test]
    fn flags_win_over_file() {
        let file: FileConfig = toml::from_str("epochs = 30\nbatch = 4\nseed = 9\n").unwrap();
        let mut a = args();
        a.epochs = Some(12);
        let cfg = resolve_training(Architecture::Fcn, &a, &file).unwrap();
        assert_eq!((cfg.epochs, cfg.batch_size, cfg.seed), (12, 4, 9));
        assert!(cfg.schedule.enabled);
    }

    #[test]
    fn paper_protocol_pins_defaults() {
        let mut a = args();
        a.paper_protocol = true;
        let cfg = resolve_training(Architecture::Mlp, &a, &FileConfig::default()).unwrap();
        assert_eq!(cfg.epochs, 5000);
        assert_eq!(cfg.optimizer, OptimizerKind::Adadelta);
        assert!(!cfg.schedule.enabled);
        a.epochs = Some(3);
        assert!(resolve_training(Architecture::Mlp, &a, &FileConfig::default()).is_err());
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("epoch = 3\n").is_err());
    }
}
