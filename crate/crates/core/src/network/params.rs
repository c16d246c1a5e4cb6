use std::collections::BTreeMap;

use rand::Rng;

use super::spec::{BatchNormParams, ConvParams, DenseParams, LayerSpec, NetworkSpec};
use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Named tensors keyed by parameter slot.
pub type SlotMap = BTreeMap<String, Tensor>;

/// Trainable tensors plus batch-norm running statistics for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub trainable: SlotMap,
    pub running: SlotMap,
}

/// Gradients keyed like [`ParameterSet::trainable`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gradients(pub SlotMap);

impl Gradients {
    pub fn get(&self, slot: &str) -> Option<&Tensor> {
        self.0.get(slot)
    }

    pub(crate) fn accumulate(&mut self, slot: &str, grad: Tensor) -> Result<()> {
        match self.0.get_mut(slot) {
            Some(existing) => existing.add_assign(&grad),
            None => {
                self.0.insert(slot.to_string(), grad);
                Ok(())
            }
        }
    }
}

/// Every trainable and running slot the spec declares, with its shape.
pub fn slot_shapes(spec: &NetworkSpec) -> (Vec<(String, Vec<usize>)>, Vec<(String, Vec<usize>)>) {
    let mut trainable = Vec::new();
    let mut running = Vec::new();
    let conv = |c: &ConvParams, t: &mut Vec<(String, Vec<usize>)>| {
        t.push((c.weight.clone(), vec![c.filters, c.in_channels, c.kernel]));
        t.push((c.bias.clone(), vec![c.filters]));
    };
    let dense = |d: &DenseParams, t: &mut Vec<(String, Vec<usize>)>| {
        t.push((d.weight.clone(), vec![d.inputs, d.units]));
        t.push((d.bias.clone(), vec![d.units]));
    };
    let bn = |b: &BatchNormParams, t: &mut Vec<(String, Vec<usize>)>, r: &mut Vec<(String, Vec<usize>)>| {
        t.push((b.gamma.clone(), vec![b.channels]));
        t.push((b.beta.clone(), vec![b.channels]));
        r.push((b.running_mean.clone(), vec![b.channels]));
        r.push((b.running_var.clone(), vec![b.channels]));
    };
    for layer in &spec.layers {
        match layer {
            LayerSpec::Conv(c) => conv(c, &mut trainable),
            LayerSpec::Dense(d) => dense(d, &mut trainable),
            LayerSpec::BatchNorm(b) => bn(b, &mut trainable, &mut running),
            LayerSpec::AddShortcut { shortcut } => {
                if let Some(p) = &spec.shortcuts[*shortcut].projection {
                    conv(&p.conv, &mut trainable);
                    bn(&p.batchnorm, &mut trainable, &mut running);
                }
            }
            _ => {}
        }
    }
    (trainable, running)
}

impl ParameterSet {
    /// Glorot-uniform weights, zero biases, unit gamma, zero beta, running
    /// mean 0 and running variance 1.
    pub fn init(spec: &NetworkSpec, rng: &mut impl Rng) -> Result<Self> {
        spec.validate()?;
        let (trainable_slots, running_slots) = slot_shapes(spec);
        let mut trainable = SlotMap::new();
        for (name, shape) in trainable_slots {
            let tensor = if name.ends_with(".weight") {
                let (fan_in, fan_out) = match shape.as_slice() {
                    [out, inp, k] => (inp * k, out * k),
                    [inp, out] => (*inp, *out),
                    _ => unreachable!("weights are rank 2 or 3"),
                };
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let n = shape.iter().product();
                let data = (0..n).map(|_| rng.random_range(-limit..limit)).collect();
                Tensor::new(shape, data)?
            } else if name.ends_with(".gamma") {
                Tensor::full(&shape, 1.0)
            } else {
                Tensor::zeros(&shape)
            };
            trainable.insert(name, tensor);
        }
        let running = running_slots
            .into_iter()
            .map(|(name, shape)| {
                let fill = if name.ends_with(".running_var") { 1.0 } else { 0.0 };
                (name, Tensor::full(&shape, fill))
            })
            .collect();
        Ok(ParameterSet { trainable, running })
    }

    pub fn trainable(&self, slot: &str) -> Result<&Tensor> {
        self.trainable
            .get(slot)
            .ok_or_else(|| Error::shape(format!("missing parameter slot '{slot}'")))
    }

    pub fn running(&self, slot: &str) -> Result<&Tensor> {
        self.running
            .get(slot)
            .ok_or_else(|| Error::shape(format!("missing running-statistic slot '{slot}'")))
    }

    pub fn parameter_count(&self) -> usize {
        self.trainable.values().map(Tensor::len).sum()
    }

    /// Checks that every slot the spec declares is present with the right shape.
    pub fn check_against(&self, spec: &NetworkSpec) -> Result<()> {
        let (t, r) = slot_shapes(spec);
        for (slots, map, what) in [(&t, &self.trainable, "trainable"), (&r, &self.running, "running")] {
            if slots.len() != map.len() {
                return Err(Error::shape(format!(
                    "{what} slot count {} != spec's {}",
                    map.len(),
                    slots.len()
                )));
            }
            for (name, shape) in slots {
                match map.get(name) {
                    Some(tensor) if tensor.shape() == shape.as_slice() => {}
                    Some(tensor) => {
                        return Err(Error::shape(format!(
                            "slot '{name}' has shape {:?}, spec wants {shape:?}",
                            tensor.shape()
                        )))
                    }
                    None => return Err(Error::shape(format!("missing {what} slot '{name}'"))),
                }
            }
        }
        Ok(())
    }
}
