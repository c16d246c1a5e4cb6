//! Adam and Adadelta parameter updates over named slots.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::model_file::{decode, encode};
use crate::network::{Gradients, SlotMap};
use crate::numerics::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdadeltaConfig {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for AdadeltaConfig {
    fn default() -> Self {
        AdadeltaConfig {
            learning_rate: 0.1,
            rho: 0.95,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdamState {
    pub step: u64,
    pub first_moment: SlotMap,
    pub second_moment: SlotMap,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdadeltaState {
    /// Running mean of squared gradients.
    pub sq_grad: SlotMap,
    /// Running mean of squared (pre-learning-rate) updates.
    pub sq_update: SlotMap,
}

fn grad_for<'a>(grads: &'a Gradients, slot: &str, param: &Tensor) -> Result<&'a Tensor> {
    let g = grads
        .get(slot)
        .ok_or_else(|| Error::shape(format!("no gradient for slot '{slot}'")))?;
    g.check_same_shape(param, slot)?;
    Ok(g)
}

fn zeros_like(map: &mut SlotMap, slot: &str, shape: &[usize]) {
    if !map.contains_key(slot) {
        map.insert(slot.to_string(), Tensor::zeros(shape));
    }
}

/// Bias-corrected Adam: `p -= lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(
    params: &mut SlotMap,
    grads: &Gradients,
    state: &mut AdamState,
    cfg: &AdamConfig,
) -> Result<()> {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (slot, param) in params.iter_mut() {
        let g = grad_for(grads, slot, param)?;
        zeros_like(&mut state.first_moment, slot, param.shape());
        zeros_like(&mut state.second_moment, slot, param.shape());
        let m = state.first_moment.get_mut(slot).expect("inserted above");
        let v = state.second_moment.get_mut(slot).expect("inserted above");
        for (((p, &gi), mi), vi) in param
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
            *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
            let m_hat = *mi / c1;
            let v_hat = *vi / c2;
            *p -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
    Ok(())
}

/// Adadelta with the learning rate scaling the computed update:
/// `delta = -sqrt(E[d^2] + eps) / sqrt(E[g^2] + eps) * g`, `p += lr * delta`.
pub fn adadelta_step(
    params: &mut SlotMap,
    grads: &Gradients,
    state: &mut AdadeltaState,
    cfg: &AdadeltaConfig,
) -> Result<()> {
    for (slot, param) in params.iter_mut() {
        let g = grad_for(grads, slot, param)?;
        zeros_like(&mut state.sq_grad, slot, param.shape());
        zeros_like(&mut state.sq_update, slot, param.shape());
        let eg = state.sq_grad.get_mut(slot).expect("inserted above");
        let ed = state.sq_update.get_mut(slot).expect("inserted above");
        for (((p, &gi), egi), edi) in param
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(eg.data_mut())
            .zip(ed.data_mut())
        {
            *egi = cfg.rho * *egi + (1.0 - cfg.rho) * gi * gi;
            let delta = -((*edi + cfg.epsilon).sqrt() / (*egi + cfg.epsilon).sqrt()) * gi;
            *p += cfg.learning_rate * delta;
            *edi = cfg.rho * *edi + (1.0 - cfg.rho) * delta * delta;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Adam,
    Adadelta,
}

/// An update rule together with its accumulators.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimizer {
    Adam { config: AdamConfig, state: AdamState },
    Adadelta { config: AdadeltaConfig, state: AdadeltaState },
}

pub const OPTIMIZER_KIND: &str = "optimizer";

impl Optimizer {
    pub fn new(kind: OptimizerKind) -> Self {
        match kind {
            OptimizerKind::Adam => Optimizer::Adam {
                config: AdamConfig::default(),
                state: AdamState::default(),
            },
            OptimizerKind::Adadelta => Optimizer::Adadelta {
                config: AdadeltaConfig::default(),
                state: AdadeltaState::default(),
            },
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        match self {
            Optimizer::Adam { .. } => OptimizerKind::Adam,
            Optimizer::Adadelta { .. } => OptimizerKind::Adadelta,
        }
    }

    pub fn step(&mut self, params: &mut SlotMap, grads: &Gradients) -> Result<()> {
        match self {
            Optimizer::Adam { config, state } => adam_step(params, grads, state, config),
            Optimizer::Adadelta { config, state } => adadelta_step(params, grads, state, config),
        }
    }

    pub fn learning_rate(&self) -> f64 {
        match self {
            Optimizer::Adam { config, .. } => config.learning_rate,
            Optimizer::Adadelta { config, .. } => config.learning_rate,
        }
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        match self {
            Optimizer::Adam { config, .. } => config.learning_rate = lr,
            Optimizer::Adadelta { config, .. } => config.learning_rate = lr,
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let mut arrays: Vec<(&str, &str, &Tensor)> = Vec::new();
        let meta = match self {
            Optimizer::Adam { config, state } => {
                arrays.extend(state.first_moment.iter().map(|(n, t)| ("first_moment", n.as_str(), t)));
                arrays.extend(state.second_moment.iter().map(|(n, t)| ("second_moment", n.as_str(), t)));
                serde_json::json!({ "rule": "adam", "config": config, "step": state.step })
            }
            Optimizer::Adadelta { config, state } => {
                arrays.extend(state.sq_grad.iter().map(|(n, t)| ("sq_grad", n.as_str(), t)));
                arrays.extend(state.sq_update.iter().map(|(n, t)| ("sq_update", n.as_str(), t)));
                serde_json::json!({ "rule": "adadelta", "config": config })
            }
        };
        encode(OPTIMIZER_KIND, meta, &arrays)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let c = decode(bytes)?;
        if c.kind != OPTIMIZER_KIND {
            return Err(Error::Format(format!("expected optimizer state, found '{}'", c.kind)));
        }
        let rule = c.meta.get("rule").and_then(|r| r.as_str()).unwrap_or_default();
        let config = c
            .meta
            .get("config")
            .cloned()
            .ok_or_else(|| Error::Format("optimizer header has no config".into()))?;
        match rule {
            "adam" => Ok(Optimizer::Adam {
                config: serde_json::from_value(config)?,
                state: AdamState {
                    step: c.meta.get("step").and_then(|s| s.as_u64()).unwrap_or(0),
                    first_moment: c.group("first_moment"),
                    second_moment: c.group("second_moment"),
                },
            }),
            "adadelta" => Ok(Optimizer::Adadelta {
                config: serde_json::from_value(config)?,
                state: AdadeltaState {
                    sq_grad: c.group("sq_grad"),
                    sq_update: c.group("sq_update"),
                },
            }),
            other => Err(Error::Format(format!("unknown optimizer rule '{other}'"))),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_slot(v: f64) -> SlotMap {
        SlotMap::from([("p".to_string(), Tensor::from_vec(vec![v]))])
    }

    fn grad(v: f64) -> Gradients {
        Gradients(scalar_slot(v))
    }

    fn value(m: &SlotMap) -> f64 {
        m["p"].data()[0]
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let mut p = scalar_slot(0.7);
        let mut adam = AdamState::default();
        for _ in 0..5 {
            adam_step(&mut p, &grad(0.0), &mut adam, &AdamConfig::default()).unwrap();
        }
        assert_eq!(value(&p), 0.7);
        assert!(adam.first_moment["p"].data()[0] == 0.0 && adam.second_moment["p"].data()[0] == 0.0);

        let mut ada = AdadeltaState::default();
        adadelta_step(&mut p, &grad(0.0), &mut ada, &AdadeltaConfig::default()).unwrap();
        assert_eq!(value(&p), 0.7);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        for g in [3.0, -0.02, 150.0] {
            let mut p = scalar_slot(0.0);
            let mut s = AdamState::default();
            adam_step(&mut p, &grad(g), &mut s, &AdamConfig::default()).unwrap();
            let expected = -0.001 * g / (g.abs() + 1e-8);
            assert!((value(&p) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn adam_quadratic_trajectory() {
        // f(p) = p^2 from p = 1; reference values from a 40-digit evaluation
        let expected = [0.999_000_000_005, 0.998_000_026_213_834_4, 0.997_000_096_065_140_9];
        let mut p = scalar_slot(1.0);
        let mut s = AdamState::default();
        for want in expected {
            let g = 2.0 * value(&p);
            adam_step(&mut p, &grad(g), &mut s, &AdamConfig::default()).unwrap();
            assert!((value(&p) - want).abs() < 1e-14, "{} vs {want}", value(&p));
        }
    }

    #[test]
    fn adadelta_first_step() {
        let mut p = scalar_slot(0.0);
        let mut s = AdadeltaState::default();
        adadelta_step(&mut p, &grad(1.0), &mut s, &AdadeltaConfig::default()).unwrap();
        assert!((value(&p) - -4.472_135_507_786_051e-5).abs() < 1e-17);
        let delta = -4.472_135_507_786_051e-4_f64;
        assert!((s.sq_update["p"].data()[0] - 0.05 * delta * delta).abs() < 1e-20);
    }

    #[test]
    fn adadelta_first_step_sign_is_scale_free() {
        let g = vec![0.5, -2.0, 1e-3, -7.0];
        for c in [1e-3, 1.0, 250.0] {
            let mut p = SlotMap::from([("w".to_string(), Tensor::zeros(&[4]))]);
            let grads = Gradients(SlotMap::from([(
                "w".to_string(),
                Tensor::from_vec(g.iter().map(|x| x * c).collect()),
            )]));
            adadelta_step(&mut p, &grads, &mut AdadeltaState::default(), &AdadeltaConfig::default()).unwrap();
            let signs: Vec<bool> = p["w"].data().iter().map(|v| *v > 0.0).collect();
            assert_eq!(signs, vec![false, true, false, true]);
        }
    }

    #[test]
    fn both_rules_descend_a_quadratic() {
        for kind in [OptimizerKind::Adam, OptimizerKind::Adadelta] {
            for start in [-3.0, 0.4, 10.0] {
                let mut opt = Optimizer::new(kind);
                let mut p = scalar_slot(start);
                let mut prev = start * start;
                for _ in 0..100 {
                    let g = 2.0 * value(&p);
                    opt.step(&mut p, &grad(g)).unwrap();
                    let loss = value(&p).powi(2);
                    assert!(loss < prev, "{kind:?} from {start}: {loss} >= {prev}");
                    prev = loss;
                }
            }
        }
    }

    #[test]
    fn missing_gradient_is_an_error() {
        let mut p = scalar_slot(1.0);
        assert!(adam_step(&mut p, &Gradients::default(), &mut AdamState::default(), &AdamConfig::default()).is_err());
    }

    #[test]
    fn state_round_trips_bit_exactly() {
        for kind in [OptimizerKind::Adam, OptimizerKind::Adadelta] {
            let mut opt = Optimizer::new(kind);
            let mut p = SlotMap::from([("a".to_string(), Tensor::from_vec(vec![0.3, -1.1]))]);
            for i in 0..3 {
                let g = Gradients(SlotMap::from([(
                    "a".to_string(),
                    Tensor::from_vec(vec![0.1 * i as f64 + 0.01, -0.7]),
                )]));
                opt.step(&mut p, &g).unwrap();
            }
            opt.set_learning_rate(opt.learning_rate() / 3.0);
            let back = Optimizer::decode(&opt.encode().unwrap()).unwrap();
            assert_eq!(back, opt);
        }
    }
}
