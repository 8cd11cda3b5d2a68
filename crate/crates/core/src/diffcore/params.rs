use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::Tensor;
use super::DiffError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named trainable tensors in registration order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    lookup: HashMap<String, ParamId>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId, DiffError> {
        let name = name.into();
        if self.lookup.contains_key(&name) {
            return Err(DiffError::Snapshot(format!("duplicate parameter name {name}")));
        }
        let id = ParamId(self.tensors.len());
        self.lookup.insert(name.clone(), id);
        self.names.push(name);
        self.tensors.push(value);
        Ok(id)
    }

    /// Glorot-uniform matrix, entries in ±√(6/(rows+cols)).
    pub fn insert_glorot<R: Rng>(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<ParamId, DiffError> {
        self.insert(name, glorot_uniform(rows, cols, rng))
    }

    pub fn insert_zeros(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
    ) -> Result<ParamId, DiffError> {
        self.insert(name, Tensor::zeros(rows, cols))
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.tensors)
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }

    pub fn to_snapshot(&self) -> Vec<NamedTensor> {
        self.iter()
            .map(|(name, t)| NamedTensor {
                name: name.to_string(),
                shape: [t.rows(), t.cols()],
                values: t.data().to_vec(),
            })
            .collect()
    }

    /// Overwrites values from a snapshot. Names and shapes must match
    /// this store exactly.
    pub fn load_snapshot(&mut self, snapshot: &[NamedTensor]) -> Result<(), DiffError> {
        if snapshot.len() != self.len() {
            return Err(DiffError::Snapshot(format!(
                "snapshot holds {} tensors, model expects {}",
                snapshot.len(),
                self.len()
            )));
        }
        for entry in snapshot {
            let id = self.id(&entry.name).ok_or_else(|| {
                DiffError::Snapshot(format!("unknown parameter {}", entry.name))
            })?;
            let t = &mut self.tensors[id.0];
            if [t.rows(), t.cols()] != entry.shape {
                return Err(DiffError::Snapshot(format!(
                    "parameter {} has shape {:?}, expected {:?}",
                    entry.name,
                    entry.shape,
                    t.shape()
                )));
            }
            let loaded = Tensor::from_vec(entry.shape[0], entry.shape[1], entry.values.clone())
                .map_err(|e| DiffError::Snapshot(format!("parameter {}: {e}", entry.name)))?;
            if !loaded.is_finite() {
                return Err(DiffError::Snapshot(format!(
                    "parameter {} holds non-finite values",
                    entry.name
                )));
            }
            *t = loaded;
        }
        Ok(())
    }
}

/// Serialized form of one parameter: name, shape and row-major values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub shape: [usize; 2],
    pub values: Vec<f64>,
}

pub fn glorot_uniform<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Tensor {
    let limit = (6.0 / (rows + cols).max(1) as f64).sqrt();
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-limit..=limit))
        .collect();
    Tensor::from_vec(rows, cols, data).expect("length matches shape")
}
