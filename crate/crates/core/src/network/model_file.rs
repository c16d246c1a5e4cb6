//! `TSCM/1` container: a text header followed by raw little-endian `f64`
//! arrays.
//!
//! ```text
//! TSCM/1\n
//! header_bytes=<n>\n
//! <n bytes of JSON: {"kind", "meta", "slots": [{"name", "group", "shape"}]}>
//! <f64 LE payload, slots in manifest order>
//! ```
//!
//! Models store the network spec under `meta.spec`; optimizer state uses
//! the same container with its own `kind`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::params::{ParameterSet, SlotMap};
use super::spec::NetworkSpec;
use crate::error::{Error, Result};
use crate::numerics::Tensor;

pub const FORMAT_TAG: &str = "TSCM/1";
pub const MODEL_KIND: &str = "model";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotEntry {
    pub name: String,
    pub group: String,
    pub shape: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    kind: String,
    meta: serde_json::Value,
    slots: Vec<SlotEntry>,
}

/// Decoded container contents.
#[derive(Debug, Clone)]
pub struct Container {
    pub kind: String,
    pub meta: serde_json::Value,
    /// `(group, name, tensor)` in manifest order.
    pub arrays: Vec<(String, String, Tensor)>,
}

impl Container {
    /// Collects the arrays of one group into a slot map.
    pub fn group(&self, group: &str) -> SlotMap {
        self.arrays
            .iter()
            .filter(|(g, _, _)| g == group)
            .map(|(_, n, t)| (n.clone(), t.clone()))
            .collect()
    }
}

pub fn encode(kind: &str, meta: serde_json::Value, arrays: &[(&str, &str, &Tensor)]) -> Result<Vec<u8>> {
    let header = Header {
        kind: kind.to_string(),
        meta,
        slots: arrays
            .iter()
            .map(|(g, n, t)| SlotEntry {
                name: n.to_string(),
                group: g.to_string(),
                shape: t.shape().to_vec(),
            })
            .collect(),
    };
    let json = serde_json::to_vec_pretty(&header)?;
    let mut out = Vec::new();
    writeln!(out, "{FORMAT_TAG}").expect("write to vec");
    writeln!(out, "header_bytes={}", json.len()).expect("write to vec");
    out.extend_from_slice(&json);
    for (_, _, t) in arrays {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn take_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a str> {
    let rest = &bytes[*pos..];
    let end = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Format("truncated header".into()))?;
    *pos += end + 1;
    std::str::from_utf8(&rest[..end]).map_err(|_| Error::Format("header is not UTF-8".into()))
}

pub fn decode(bytes: &[u8]) -> Result<Container> {
    let mut pos = 0;
    let tag = take_line(bytes, &mut pos)?;
    if tag != FORMAT_TAG {
        return Err(Error::Format(format!("expected tag {FORMAT_TAG}, found '{tag}'")));
    }
    let len_line = take_line(bytes, &mut pos)?;
    let header_len: usize = len_line
        .strip_prefix("header_bytes=")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad header length line '{len_line}'")))?;
    let header_end = pos
        .checked_add(header_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::Format("header runs past end of file".into()))?;
    let header: Header = serde_json::from_slice(&bytes[pos..header_end])?;
    pos = header_end;

    let mut arrays = Vec::with_capacity(header.slots.len());
    for slot in header.slots {
        let n: usize = slot.shape.iter().product();
        let end = pos + n * 8;
        if end > bytes.len() {
            return Err(Error::Format(format!("payload truncated in slot '{}'", slot.name)));
        }
        let data = bytes[pos..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        pos = end;
        arrays.push((slot.group, slot.name, Tensor::new(slot.shape, data)?));
    }
    if pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes after payload", bytes.len() - pos)));
    }
    Ok(Container {
        kind: header.kind,
        meta: header.meta,
        arrays,
    })
}

pub fn encode_model(spec: &NetworkSpec, params: &ParameterSet) -> Result<Vec<u8>> {
    params.check_against(spec)?;
    let mut arrays: Vec<(&str, &str, &Tensor)> = Vec::new();
    for (n, t) in &params.trainable {
        arrays.push(("trainable", n, t));
    }
    for (n, t) in &params.running {
        arrays.push(("running", n, t));
    }
    let meta = serde_json::json!({ "spec": spec });
    encode(MODEL_KIND, meta, &arrays)
}

pub fn decode_model(bytes: &[u8]) -> Result<(NetworkSpec, ParameterSet)> {
    let c = decode(bytes)?;
    if c.kind != MODEL_KIND {
        return Err(Error::Format(format!("expected a model container, found '{}'", c.kind)));
    }
    let spec: NetworkSpec = serde_json::from_value(
        c.meta
            .get("spec")
            .cloned()
            .ok_or_else(|| Error::Format("model header has no spec".into()))?,
    )?;
    spec.validate()?;
    let params = ParameterSet {
        trainable: c.group("trainable"),
        running: c.group("running"),
    };
    params.check_against(&spec)?;
    Ok((spec, params))
}

pub fn save_model(path: &Path, spec: &NetworkSpec, params: &ParameterSet) -> Result<()> {
    let bytes = encode_model(spec, params)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(NetworkSpec, ParameterSet)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_resnet_with, ResnetConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let spec = build_resnet_with(
            9,
            3,
            &ResnetConfig {
                block_filters: vec![2, 3],
                kernels: vec![3, 2],
            },
        )
        .unwrap();
        let mut params = ParameterSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        params.running.values_mut().for_each(|t| t.data_mut()[0] = std::f64::consts::PI / 7.0);
        let bytes = encode_model(&spec, &params).unwrap();
        assert!(bytes.starts_with(b"TSCM/1\n"));
        let (spec2, params2) = decode_model(&bytes).unwrap();
        assert_eq!(spec, spec2);
        for (a, b) in params.trainable.values().chain(params.running.values()).zip(
            params2.trainable.values().chain(params2.running.values()),
        ) {
            let bits = |t: &Tensor| t.data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(a), bits(b));
        }
    }

    #[test]
    fn rejects_corruption() {
        let spec = crate::network::build_mlp_with(
            4,
            2,
            &crate::network::MlpConfig {
                hidden_units: 3,
                ..Default::default()
            },
        )
        .unwrap();
        let params = ParameterSet::init(&spec, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        let bytes = encode_model(&spec, &params).unwrap();
        assert!(decode_model(&bytes[..bytes.len() - 3]).is_err());
        let mut bad = bytes.clone();
        bad[5] = b'2';
        assert!(decode_model(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(decode_model(&extra).is_err());
    }
}
