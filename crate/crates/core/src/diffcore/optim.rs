use serde::{Deserialize, Serialize};

use super::params::ParamStore;
use super::tensor::Tensor;
use super::DiffError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdamState {
    pub config: AdamConfig,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
    step: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, store: &ParamStore) -> Self {
        let zeros: Vec<Tensor> = store
            .iter()
            .map(|(_, t)| Tensor::zeros(t.rows(), t.cols()))
            .collect();
        Self {
            config,
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self, index: usize) -> &Tensor {
        &self.first[index]
    }

    pub fn second_moment(&self, index: usize) -> &Tensor {
        &self.second[index]
    }
}

/// One bias-corrected adaptive-moment update. Nothing is modified when a
/// gradient holds a non-finite entry.
pub fn adam_step(
    store: &mut ParamStore,
    grads: &[Tensor],
    state: &mut AdamState,
) -> Result<(), DiffError> {
    if grads.len() != store.len() || state.first.len() != store.len() {
        return Err(DiffError::Shape(format!(
            "{} gradients and {} moment slots for {} parameters",
            grads.len(),
            state.first.len(),
            store.len()
        )));
    }
    for (id, g) in store.ids().zip(grads) {
        let p = store.get(id);
        if p.shape() != g.shape() {
            return Err(DiffError::Shape(format!(
                "gradient for {} has shape {:?}, parameter {:?}",
                store.name(id),
                g.shape(),
                p.shape()
            )));
        }
        if let Some(pos) = g.data().iter().position(|v| !v.is_finite()) {
            return Err(DiffError::NonFiniteGradient {
                param: store.name(id).to_string(),
                index: pos,
                value: g.data()[pos],
            });
        }
    }

    state.step += 1;
    let AdamConfig {
        learning_rate,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let t = state.step as i32;
    let correct1 = 1.0 - beta1.powi(t);
    let correct2 = 1.0 - beta2.powi(t);
    let ids: Vec<_> = store.ids().collect();
    for (k, id) in ids.into_iter().enumerate() {
        let g = grads[k].data();
        let m = state.first[k].data_mut();
        let v = state.second[k].data_mut();
        let p = store.get_mut(id).data_mut();
        for i in 0..p.len() {
            m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
            v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
            let m_hat = m[i] / correct1;
            let v_hat = v[i] / correct2;
            p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
    }
    Ok(())
}
