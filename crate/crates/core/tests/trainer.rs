use tsc_core::data::{make_synthetic, znormalize, DatasetSplit, SyntheticKind};
use tsc_core::network::{infer_logits, Architecture};
use tsc_core::trainer::{error_rate, evaluate, load_checkpoint, train, TrainingConfig};
use tsc_core::Error;

fn sine_square(per_class: usize, len: usize, seed: u64) -> DatasetSplit {
    znormalize(&make_synthetic(SyntheticKind::SineVsSquare, per_class, len, 0.05, seed).unwrap()).unwrap()
}

fn config(arch: Architecture, epochs: usize, seed: u64) -> TrainingConfig {
    TrainingConfig {
        epochs,
        seed,
        ..TrainingConfig::new(arch)
    }
}

#[test]
fn single_epoch_record() {
    let split = sine_square(4, 16, 0);
    for arch in [Architecture::Mlp, Architecture::Fcn, Architecture::Resnet] {
        let m = train(&split, &config(arch, 1, 3)).unwrap();
        assert_eq!(m.record.losses.len(), 1);
        assert_eq!(m.record.best_epoch, 0);
        assert_eq!(m.record.best_loss, m.record.losses[0]);
    }
}

#[test]
fn same_seed_same_curves() {
    let split = sine_square(5, 24, 1);
    for arch in [Architecture::Mlp, Architecture::Fcn] {
        let a = train(&split, &config(arch, 4, 7)).unwrap().record;
        let b = train(&split, &config(arch, 4, 7)).unwrap().record;
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.losses), bits(&b.losses));
        assert!(a.same_outcome(&b));
        let c = train(&split, &config(arch, 4, 8)).unwrap().record;
        assert_ne!(bits(&a.losses), bits(&c.losses));
    }
}

#[test]
fn best_epoch_has_minimum_loss_and_checkpoint_reproduces_error() {
    let split = sine_square(6, 32, 2);
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(Architecture::Mlp, 40, 5);
    cfg.checkpoint = Some(dir.path().to_path_buf());
    let m = train(&split, &cfg).unwrap();
    let r = &m.record;
    assert!(r.losses.iter().all(|l| r.best_loss <= *l));
    assert_eq!(r.losses[r.best_epoch], r.best_loss);

    let back = load_checkpoint(dir.path()).unwrap();
    assert_eq!(evaluate(&back.spec, &back.params, &split).unwrap(), r.test_error);
    assert!(back.record.same_outcome(r));
    assert_eq!(back.optimizer, m.optimizer);
    let a = infer_logits(&m.spec, &m.params, &split.test.series).unwrap();
    let b = infer_logits(&back.spec, &back.params, &split.test.series).unwrap();
    assert_eq!(a.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
}

#[test]
fn batch_is_clamped_to_training_size() {
    let split = sine_square(3, 16, 0);
    let mut cfg = config(Architecture::Mlp, 2, 0);
    cfg.batch_size = 500;
    assert_eq!(train(&split, &cfg).unwrap().record.batch_size, 6);
}

#[test]
fn schedule_halves_and_respects_floor() {
    let split = sine_square(4, 16, 3);
    let mut cfg = config(Architecture::Mlp, 60, 1);
    cfg.schedule.patience = 1;
    cfg.schedule.floor = 0.02;
    let r = train(&split, &cfg).unwrap().record;
    assert!(r.learning_rates.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.learning_rates.iter().all(|lr| *lr >= 0.02));
    assert!(r.learning_rates.last().unwrap() < &r.learning_rates[0]);

    cfg.schedule.enabled = false;
    let r = train(&split, &cfg).unwrap().record;
    assert!(!r.schedule_enabled);
    assert!(r.learning_rates.iter().all(|lr| *lr == r.learning_rates[0]));
}

#[test]
fn divergence_is_reported() {
    let mut split = make_synthetic(SyntheticKind::SineVsSquare, 3, 16, 0.0, 0).unwrap();
    split.train.series.data_mut()[5] = f64::NAN;
    match train(&split, &config(Architecture::Mlp, 3, 0)) {
        Err(Error::Numeric(msg)) => assert!(msg.contains("diverged"), "{msg}"),
        Err(other) => panic!("unexpected error {other}"),
        Ok(m) => panic!("training finished with losses {:?}", m.record.losses),
    }
}

// Held-out accuracy is only reliable once the running batch-norm statistics
// have caught up; the full-length run lives in the acceptance suite.
#[test]
fn fcn_fits_sine_vs_square_across_seeds() {
    for seed in [1, 2, 3] {
        let split = sine_square(50, 64, seed);
        let m = train(&split, &config(Architecture::Fcn, 60, seed)).unwrap();
        let r = &m.record;
        assert!(r.train_accuracy.iter().any(|&a| a == 1.0), "seed {seed}");
        assert!(r.best_loss < 0.01 * r.losses[0], "seed {seed}: {} vs {}", r.best_loss, r.losses[0]);
        assert_eq!(error_rate(&m.spec, &m.params, &split.test).unwrap(), r.test_error);
    }
}
