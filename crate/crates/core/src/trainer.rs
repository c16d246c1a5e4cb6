//! Epoch loop over shuffled mini-batches with model selection by minimum
//! epoch-mean training loss.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{one_hot, DatasetSplit, Labeled};
use crate::error::{Error, Result};
use crate::network::{
    apply_running_updates, argmax, backward, build, forward, predict, Architecture,
    NetworkSpec, ParameterSet,
};
use crate::numerics::{softmax_cross_entropy, Mode};
use crate::network::model_file::{load_model, save_model};
use crate::optim::{Optimizer, OptimizerKind};

/// Rows per forward pass when evaluating.
const EVAL_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlateauSchedule {
    pub enabled: bool,
    pub factor: f64,
    /// Epochs without a new minimum loss before the rate is reduced.
    pub patience: usize,
    pub floor: f64,
}

impl Default for PlateauSchedule {
    fn default() -> Self {
        PlateauSchedule {
            enabled: true,
            factor: 0.5,
            patience: 50,
            floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub architecture: Architecture,
    pub optimizer: OptimizerKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub schedule: PlateauSchedule,
    /// Directory the best checkpoint is written to when training ends.
    pub checkpoint: Option<PathBuf>,
}

pub fn default_optimizer(arch: Architecture) -> OptimizerKind {
    match arch {
        Architecture::Mlp => OptimizerKind::Adadelta,
        Architecture::Fcn | Architecture::Resnet => OptimizerKind::Adam,
    }
}

pub fn default_epochs(arch: Architecture) -> usize {
    match arch {
        Architecture::Mlp => 5000,
        Architecture::Fcn | Architecture::Resnet => 2000,
    }
}

impl TrainingConfig {
    pub fn new(architecture: Architecture) -> Self {
        TrainingConfig {
            architecture,
            optimizer: default_optimizer(architecture),
            epochs: default_epochs(architecture),
            batch_size: 16,
            seed: 0,
            schedule: PlateauSchedule::default(),
            checkpoint: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        let s = &self.schedule;
        if !(s.factor > 0.0 && s.factor < 1.0) {
            return Err(Error::invalid(format!("schedule factor {} not in (0, 1)", s.factor)));
        }
        if s.enabled && s.patience == 0 {
            return Err(Error::invalid("schedule patience must be at least 1"));
        }
        if !(s.floor >= 0.0) {
            return Err(Error::invalid("schedule floor must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub architecture: Architecture,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Batch size actually used, after clamping to the training set size.
    pub batch_size: usize,
    /// Epoch-mean training loss, train mode.
    pub losses: Vec<f64>,
    /// Fraction of training rows classified correctly during each epoch's
    /// train-mode passes.
    pub train_accuracy: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub best_epoch: usize,
    pub best_loss: f64,
    pub schedule_enabled: bool,
    pub wall_seconds: f64,
    /// Test error of the best checkpoint, infer mode.
    pub test_error: f64,
}

impl RunRecord {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &RunRecord) -> bool {
        let mut a = self.clone();
        a.wall_seconds = other.wall_seconds;
        &a == other
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub spec: NetworkSpec,
    pub params: ParameterSet,
    pub optimizer: Optimizer,
    pub record: RunRecord,
}

/// Misclassified fraction of `part` under infer-mode argmax.
pub fn error_rate(spec: &NetworkSpec, params: &ParameterSet, part: &Labeled) -> Result<f64> {
    if part.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty split"));
    }
    let mut wrong = 0usize;
    let rows: Vec<usize> = (0..part.len()).collect();
    for chunk in rows.chunks(EVAL_CHUNK) {
        let predicted = predict(spec, params, &part.series.select_rows(chunk))?;
        wrong += chunk
            .iter()
            .zip(predicted)
            .filter(|(&r, p)| part.labels[r] != *p)
            .count();
    }
    Ok(wrong as f64 / part.len() as f64)
}

/// Test-split error rate.
pub fn evaluate(spec: &NetworkSpec, params: &ParameterSet, split: &DatasetSplit) -> Result<f64> {
    error_rate(spec, params, &split.test)
}

pub fn train(split: &DatasetSplit, config: &TrainingConfig) -> Result<TrainedModel> {
    config.validate()?;
    if split.classes < 2 {
        return Err(Error::data(format!("{}: need at least two classes", split.name)));
    }
    let n = split.train.len();
    let mut batch = config.batch_size;
    if batch > n {
        log::warn!("{}: batch size {batch} exceeds {n} training series, using {n}", split.name);
        batch = n;
    }
    let started = Instant::now();
    let spec = build(config.architecture, split.series_len(), split.classes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = ParameterSet::init(&spec, &mut rng)?;
    let mut optimizer = Optimizer::new(config.optimizer);
    let momentum = spec.batchnorm.momentum;
    let targets = one_hot(&split.train.labels, split.classes)?;

    let mut losses = Vec::with_capacity(config.epochs);
    let mut accuracy = Vec::with_capacity(config.epochs);
    let mut rates = Vec::with_capacity(config.epochs);
    let mut best: Option<(usize, f64, ParameterSet, Optimizer)> = None;
    let mut stale = 0usize;
    let mut order: Vec<usize> = (0..n).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        rates.push(optimizer.learning_rate());
        for rows in order.chunks(batch) {
            let x = split.train.series.select_rows(rows);
            let y = targets.select_rows(rows);
            let pass = forward(&spec, &params, &x, Mode::Train, &mut rng)?;
            let (loss, grad) = softmax_cross_entropy(&pass.logits, &y)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "{}: non-finite training loss at epoch {epoch} (learning rate {}); training diverged",
                    split.name,
                    optimizer.learning_rate()
                )));
            }
            loss_sum += loss * rows.len() as f64;
            correct += rows
                .iter()
                .enumerate()
                .filter(|(i, &r)| argmax(pass.logits.row(*i)) == split.train.labels[r])
                .count();
            let grads = backward(&spec, &params, &pass.cache, &grad)?;
            apply_running_updates(&mut params, &pass.running_updates, momentum)?;
            optimizer.step(&mut params.trainable, &grads)?;
        }
        let epoch_loss = loss_sum / n as f64;
        losses.push(epoch_loss);
        accuracy.push(correct as f64 / n as f64);

        if best.as_ref().is_none_or(|b| epoch_loss < b.1) {
            best = Some((epoch, epoch_loss, params.clone(), optimizer.clone()));
            stale = 0;
        } else {
            stale += 1;
        }
        let s = &config.schedule;
        if s.enabled && stale >= s.patience {
            let lr = optimizer.learning_rate();
            let next = (lr * s.factor).max(s.floor);
            if next < lr {
                log::debug!("{}: epoch {epoch}, learning rate {lr} -> {next}", split.name);
                optimizer.set_learning_rate(next);
            }
            stale = 0;
        }
        if (epoch + 1) % 100 == 0 {
            log::info!(
                "{} {}: epoch {} loss {epoch_loss:.6} train acc {:.4}",
                split.name,
                config.architecture,
                epoch + 1,
                correct as f64 / n as f64
            );
        }
    }

    let (best_epoch, best_loss, best_params, best_optimizer) = best.expect("at least one epoch");
    let test_error = evaluate(&spec, &best_params, split)?;
    let record = RunRecord {
        dataset: split.name.clone(),
        architecture: config.architecture,
        optimizer: config.optimizer,
        seed: config.seed,
        batch_size: batch,
        losses,
        train_accuracy: accuracy,
        learning_rates: rates,
        best_epoch,
        best_loss,
        schedule_enabled: config.schedule.enabled,
        wall_seconds: started.elapsed().as_secs_f64(),
        test_error,
    };
    let model = TrainedModel {
        spec,
        params: best_params,
        optimizer: best_optimizer,
        record,
    };
    if let Some(dir) = &config.checkpoint {
        save_checkpoint(dir, &model)?;
    }
    Ok(model)
}

pub const MODEL_FILE: &str = "model.tscm";
pub const OPTIMIZER_FILE: &str = "optimizer.tscm";
pub const RECORD_FILE: &str = "run.json";

pub fn save_checkpoint(dir: &Path, model: &TrainedModel) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_model(&dir.join(MODEL_FILE), &model.spec, &model.params)?;
    model.optimizer.save(&dir.join(OPTIMIZER_FILE))?;
    let path = dir.join(RECORD_FILE);
    let json = serde_json::to_string_pretty(&model.record)?;
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

pub fn load_checkpoint(dir: &Path) -> Result<TrainedModel> {
    let (spec, params) = load_model(&dir.join(MODEL_FILE))?;
    let optimizer = Optimizer::load(&dir.join(OPTIMIZER_FILE))?;
    let path = dir.join(RECORD_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Ok(TrainedModel {
        spec,
        params,
        optimizer,
        record: serde_json::from_str(&text)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_mlp_with, MlpConfig};
    use crate::numerics::Tensor;

    fn toy() -> (NetworkSpec, ParameterSet, Labeled) {
        // two inputs, two classes; weights chosen so logits are hand-computable
        let spec = build_mlp_with(2, 2, &MlpConfig { hidden_units: 2, ..Default::default() }).unwrap();
        let mut params = ParameterSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let eye = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        for slot in ["dense1.weight", "dense2.weight", "dense3.weight", "head.weight"] {
            params.trainable.insert(slot.into(), eye.clone());
        }
        let part = Labeled {
            // relu passes positives through; logits equal the clamped input
            series: Tensor::new(vec![4, 2], vec![1.0, 0.0, 0.0, 2.0, 3.0, 1.0, 1.0, 1.0]).unwrap(),
            labels: vec![0, 1, 1, 1],
        };
        (spec, params, part)
    }

    #[test]
    fn hand_counted_error() {
        let (spec, params, part) = toy();
        // predictions 0, 1, 0, 0 (tie goes to class 0); two of four wrong
        assert_eq!(error_rate(&spec, &params, &part).unwrap(), 0.5);
        let perfect = Labeled { labels: vec![0, 1, 0, 0], ..part.clone() };
        assert_eq!(error_rate(&spec, &params, &perfect).unwrap(), 0.0);
        let all_wrong = Labeled { labels: vec![1, 0, 1, 1], ..part };
        assert_eq!(error_rate(&spec, &params, &all_wrong).unwrap(), 1.0);
    }

    #[test]
    fn config_validation() {
        let mut c = TrainingConfig::new(Architecture::Fcn);
        assert_eq!(c.optimizer, OptimizerKind::Adam);
        assert_eq!(TrainingConfig::new(Architecture::Mlp).epochs, 5000);
        assert!(c.validate().is_ok());
        c.schedule.factor = 1.0;
        assert!(c.validate().is_err());
        c.schedule.factor = 0.5;
        c.epochs = 0;
        assert!(c.validate().is_err());
    }
}
