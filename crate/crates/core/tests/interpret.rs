use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsc_core::interpret::{cam, cam_all, gasf, gasf_algebraic, rescale01, weight_gasf};
use tsc_core::network::{
    build_fcn_with, build_mlp, build_resnet_with, infer_logits, FcnConfig, LayerSpec, NetworkSpec,
    ParameterSet, ResnetConfig,
};
use tsc_core::numerics::gradcheck::random_tensor;
use tsc_core::numerics::Tensor;
use tsc_core::Error;

fn randomized(spec: &NetworkSpec, seed: u64) -> ParameterSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParameterSet::init(spec, &mut rng).unwrap();
    for (slot, t) in params.trainable.iter_mut() {
        if slot.ends_with(".bias") || slot.ends_with(".beta") {
            *t = random_tensor(t.shape(), &mut rng).scale(0.3);
        }
    }
    for (slot, t) in params.running.iter_mut() {
        let shape = t.shape().to_vec();
        *t = if slot.ends_with("running_var") {
            Tensor::new(shape.clone(), (0..t.len()).map(|_| rng.random_range(0.5..2.0)).collect()).unwrap()
        } else {
            random_tensor(&shape, &mut rng).scale(0.2)
        };
    }
    params
}

fn head_bias(params: &ParameterSet) -> Vec<f64> {
    params.trainable("head.bias").unwrap().data().to_vec()
}

#[test]
fn cam_mean_equals_logit_minus_bias() {
    let fcn = build_fcn_with(20, 3, &FcnConfig { filters: vec![4, 5, 6], kernels: vec![8, 5, 3] }).unwrap();
    let resnet = build_resnet_with(16, 2, &ResnetConfig { block_filters: vec![3, 4], kernels: vec![5, 3, 2] }).unwrap();
    for (spec, seed) in [(&fcn, 1), (&fcn, 2), (&resnet, 3), (&resnet, 4)] {
        let params = randomized(spec, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
        for _ in 0..5 {
            let x = random_tensor(&[1, spec.input_len], &mut rng);
            let logits = infer_logits(spec, &params, &x).unwrap();
            let bias = head_bias(&params);
            for trace in cam_all(spec, &params, x.data()).unwrap() {
                assert_eq!(trace.values.len(), spec.input_len);
                let mean = trace.values.iter().sum::<f64>() / spec.input_len as f64;
                let want = logits.data()[trace.class] - bias[trace.class];
                assert!((mean - want).abs() < 1e-9, "{mean} vs {want}");
                assert!((trace.likelihoods.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn single_unit_weight_returns_that_filter() {
    let spec = build_fcn_with(12, 2, &FcnConfig { filters: vec![3, 3, 3], kernels: vec![8, 5, 3] }).unwrap();
    let mut params = randomized(&spec, 7);
    // head weight [K=3, C=2]: class 1 reads only filter 2
    params
        .trainable
        .insert("head.weight".into(), Tensor::new(vec![3, 2], vec![0.4, 0.0, -1.0, 0.0, 0.2, 1.0]).unwrap());
    let x: Vec<f64> = (0..12).map(|t| (t as f64 * 0.7).sin()).collect();
    let trace = cam(&spec, &params, &x, 1).unwrap();
    let full = cam_all(&spec, &params, &x).unwrap();
    assert_eq!(trace, full[1]);

    // scaling the class weights scales the map
    let mut scaled = params.clone();
    let w = scaled.trainable.get_mut("head.weight").unwrap();
    for k in 0..3 {
        w.data_mut()[k * 2 + 1] *= 2.5;
    }
    let twice = cam(&spec, &scaled, &x, 1).unwrap();
    for (a, b) in twice.values.iter().zip(&trace.values) {
        assert!((a - 2.5 * b).abs() <= 1e-12 * b.abs().max(1.0));
    }
    // the map is filter 2's activation: non-negative after the final relu
    assert!(trace.values.iter().all(|v| *v >= 0.0));
}

#[test]
fn mlp_has_no_cam() {
    let spec = build_mlp(10, 2).unwrap();
    let params = ParameterSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let err = cam(&spec, &params, &[0.0; 10], 0).unwrap_err();
    assert!(matches!(err, Error::Unsupported(_)), "{err}");
}

#[test]
fn class_and_length_checks() {
    let spec = build_fcn_with(12, 2, &FcnConfig { filters: vec![2, 2, 2], kernels: vec![8, 5, 3] }).unwrap();
    let params = randomized(&spec, 1);
    assert!(cam(&spec, &params, &[0.0; 12], 2).is_err());
    assert!(cam(&spec, &params, &[0.0; 11], 0).is_err());
}

#[test]
fn gasf_dual_forms_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n = rng.random_range(2..60);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = rescale01(&raw).unwrap();
        let g = gasf(&x).unwrap();
        let a = gasf_algebraic(&x).unwrap();
        for i in 0..n {
            assert!((g.get(i, i) - (2.0 * x[i] * x[i] - 1.0)).abs() < 1e-12);
            for j in 0..n {
                assert!((g.get(i, j) - a.get(i, j)).abs() < 1e-9);
                assert_eq!(g.get(i, j), g.get(j, i));
                assert!(g.get(i, j).abs() <= 1.0 + 1e-15);
            }
        }
    }
}

#[test]
fn weight_gasf_reports_per_filter() {
    let spec = build_fcn_with(10, 2, &FcnConfig { filters: vec![3, 2, 2], kernels: vec![4, 1, 3] }).unwrap();
    let mut params = randomized(&spec, 5);
    let conv0 = spec.layers.iter().position(|l| matches!(l, LayerSpec::Conv(_))).unwrap();
    // flatten filter 1 of the first conv
    let w = params.trainable.get_mut("block1.conv.weight").unwrap();
    for v in &mut w.data_mut()[4..8] {
        *v = 0.25;
    }
    let out = weight_gasf(&spec, &params, conv0).unwrap();
    assert_eq!(out.len(), 3);
    assert!(out[0].is_ok() && out[2].is_ok());
    assert!(out[1].is_err());
    assert_eq!(out[0].as_ref().unwrap().size, 4);

    // second block: kernel 1 over 3 input channels -> length-3 rows
    let conv1 = spec.layers.iter().enumerate().filter(|(_, l)| matches!(l, LayerSpec::Conv(_))).nth(1).unwrap().0;
    let out = weight_gasf(&spec, &params, conv1).unwrap();
    assert_eq!(out[0].as_ref().unwrap().size, 3);
    assert!(weight_gasf(&spec, &params, 999).is_err());
}

#[test]
fn length_one_filter_gives_unit_matrix() {
    // first conv: kernel 1 over a single input channel
    let spec = build_fcn_with(8, 2, &FcnConfig { filters: vec![3, 2, 2], kernels: vec![1, 3, 3] }).unwrap();
    let params = randomized(&spec, 2);
    let conv0 = spec.layers.iter().position(|l| matches!(l, LayerSpec::Conv(_))).unwrap();
    let out = weight_gasf(&spec, &params, conv0).unwrap();
    assert_eq!(out.len(), 3);
    for g in out {
        let g = g.unwrap();
        assert_eq!((g.size, g.values), (1, vec![1.0]));
    }
}

#[test]
fn rescaled_input_is_a_fixed_point() {
    let x = [0.0, 0.2, 1.0, 0.6];
    assert_eq!(rescale01(&x).unwrap(), x.to_vec());
    assert_eq!(gasf(&rescale01(&x).unwrap()).unwrap(), gasf(&x).unwrap());
}
