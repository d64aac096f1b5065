//! Ordered, named parameter sets: traversal, gradients, checkpoints.
//!
//! Checkpoint format: a JSON object mapping parameter name to
//! `{"shape": [...], "data": [row-major floats]}`. Loading validates both
//! the name set and every shape against the receiving architecture.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Networks expose their parameters in a stable, documented order; Adam
/// moments, gradient slots and checkpoints all align to that order.
pub trait Parameterized {
    fn param_names(&self) -> Vec<String>;
    fn params(&self) -> Vec<&Tensor>;
    fn params_mut(&mut self) -> Vec<&mut Tensor>;
}

/// Gradient buffers aligned with a network's parameter order.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub slots: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_for<N: Parameterized>(net: &N) -> Self {
        Gradients {
            slots: net.params().iter().map(|p| vec![0.0; p.len()]).collect(),
        }
    }

    pub fn add(&mut self, other: &Gradients) {
        debug_assert_eq!(self.slots.len(), other.slots.len());
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for slot in &mut self.slots {
            for x in slot.iter_mut() {
                *x *= s;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParamEntry {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// An ordered `(name, tensor)` snapshot of a network, serializable to the
/// JSON checkpoint format.
#[derive(Clone, Debug)]
pub struct NetworkParams {
    pub entries: Vec<(String, Tensor)>,
}

impl NetworkParams {
    pub fn from_network<N: Parameterized>(net: &N) -> Self {
        let names = net.param_names();
        let params = net.params();
        NetworkParams {
            entries: names
                .into_iter()
                .zip(params)
                .map(|(n, p)| (n, p.clone()))
                .collect(),
        }
    }

    /// Copies parameters into `net`, requiring an exact match of names and
    /// shapes (no missing and no unexpected entries).
    pub fn apply_to<N: Parameterized>(&self, net: &mut N) -> Result<()> {
        let names = net.param_names();
        let by_name: BTreeMap<&str, &Tensor> = self
            .entries
            .iter()
            .map(|(n, t)| (n.as_str(), t))
            .collect();
        if self.entries.len() != names.len() {
            let expected: BTreeMap<&str, ()> = names.iter().map(|n| (n.as_str(), ())).collect();
            for (name, _) in &self.entries {
                if !expected.contains_key(name.as_str()) {
                    return Err(Error::Config(format!(
                        "checkpoint has unexpected parameter `{name}`"
                    )));
                }
            }
        }
        let mut params = net.params_mut();
        for (name, param) in names.iter().zip(params.iter_mut()) {
            let stored = by_name.get(name.as_str()).ok_or_else(|| {
                Error::Config(format!("checkpoint is missing parameter `{name}`"))
            })?;
            if stored.shape() != param.shape() {
                return Err(Error::Config(format!(
                    "checkpoint parameter `{name}` has shape {:?}, architecture expects {:?}",
                    stored.shape(),
                    param.shape()
                )));
            }
            param.data_mut().copy_from_slice(stored.data());
        }
        Ok(())
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let map: BTreeMap<&str, ParamEntry> = self
            .entries
            .iter()
            .map(|(n, t)| {
                (
                    n.as_str(),
                    ParamEntry {
                        shape: t.shape().to_vec(),
                        data: t.data().to_vec(),
                    },
                )
            })
            .collect();
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &map)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| {
            Error::Config(format!("cannot open checkpoint {}: {e}", path.display()))
        })?;
        let map: BTreeMap<String, ParamEntry> =
            serde_json::from_reader(std::io::BufReader::new(file))?;
        let mut entries = Vec::with_capacity(map.len());
        for (name, entry) in map {
            let tensor = Tensor::new(entry.shape, entry.data).map_err(|_| {
                Error::Config(format!(
                    "checkpoint parameter `{name}` has inconsistent shape/data"
                ))
            })?;
            entries.push((name, tensor));
        }
        Ok(NetworkParams { entries })
    }
}

/// Saves a network's parameters as a JSON checkpoint.
pub fn save_checkpoint<N: Parameterized>(net: &N, path: &Path) -> Result<()> {
    NetworkParams::from_network(net).save_json(path)
}

/// Loads a JSON checkpoint into a network, validating names and shapes.
pub fn load_checkpoint<N: Parameterized>(net: &mut N, path: &Path) -> Result<()> {
    NetworkParams::load_json(path)?.apply_to(net)
}

/// Content hash of the exact parameter values (names, shapes and f64 bit
/// patterns). Used both for the frozen-subnet contract during sequential
/// training and for run metadata.
pub fn param_checksum<N: Parameterized>(net: &N) -> String {
    let mut hasher = Sha256::new();
    for (name, p) in net.param_names().iter().zip(net.params()) {
        hasher.update(name.as_bytes());
        for d in p.shape() {
            hasher.update((*d as u64).to_le_bytes());
        }
        for v in p.data() {
            hasher.update(v.to_le_bytes());
        }
    }
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

impl Parameterized for super::dense::Mlp {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (l, layer) in self.layers.iter().enumerate() {
            names.push(format!("layer{l}.weight"));
            if layer.bias.is_some() {
                names.push(format!("layer{l}.bias"));
            }
        }
        names
    }

    fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.push(&layer.weights);
            if let Some(b) = &layer.bias {
                out.push(b);
            }
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            out.push(&mut layer.weights);
            if let Some(b) = &mut layer.bias {
                out.push(b);
            }
        }
        out
    }
}

impl Parameterized for super::lstm::BiLstmStack {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for l in 0..self.layers.len() {
            for dir in ["fwd", "bwd"] {
                names.push(format!("layer{l}.{dir}.w_ih"));
                names.push(format!("layer{l}.{dir}.w_hh"));
                names.push(format!("layer{l}.{dir}.bias"));
            }
        }
        names
    }

    fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            for cell in [&layer.forward, &layer.backward] {
                out.push(&cell.input_weights);
                out.push(&cell.recurrent_weights);
                out.push(&cell.bias);
            }
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            for cell in [&mut layer.forward, &mut layer.backward] {
                out.push(&mut cell.input_weights);
                out.push(&mut cell.recurrent_weights);
                out.push(&mut cell.bias);
            }
        }
        out
    }
}
