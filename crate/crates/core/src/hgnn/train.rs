use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::{adam_step, AdamConfig, AdamState, DiffError};
use crate::relgraph::{EntitySubgraph, RelationalSchema};

use super::batch::Batch;
use super::forward::loss_and_gradients_on;
use super::model::{EncoderConfig, EncoderParams};
use super::HgnnError;

/// Mean reconstruction loss of every epoch, in order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    pub epochs: Vec<f64>,
}

/// Mini-batch Adam on the reconstruction loss over synthetic entities.
///
/// Initialization and shuffling both derive from `config.seed`, so equal
/// inputs give bit-identical parameters.
pub fn train_encoder(
    config: &EncoderConfig,
    schema: &RelationalSchema,
    synthetic: &[EntitySubgraph],
) -> Result<(EncoderParams, LossHistory), HgnnError> {
    if synthetic.len() < 2 {
        return Err(HgnnError::Config(format!(
            "training needs at least 2 synthetic entities, got {}",
            synthetic.len()
        )));
    }
    let mut params = EncoderParams::init(config, schema)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut adam = AdamState::new(
        AdamConfig {
            learning_rate: config.learning_rate,
            ..AdamConfig::default()
        },
        &params.store,
    );
    let mut order: Vec<usize> = (0..synthetic.len()).collect();
    let mut history = LossHistory::default();
    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for (batch_index, chunk) in order.chunks(config.batch_size).enumerate() {
            let members: Vec<&EntitySubgraph> = chunk.iter().map(|&i| &synthetic[i]).collect();
            let batch = Batch::build(&params.layout, &members)?;
            let (loss, grads) = loss_and_gradients_on(&params, &batch)?;
            if !loss.is_finite() {
                return Err(HgnnError::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                    value: loss,
                });
            }
            adam_step(&mut params.store, &grads, &mut adam).map_err(|e| match e {
                DiffError::NonFiniteGradient { param, .. } => HgnnError::NonFiniteGradient {
                    epoch,
                    batch: batch_index,
                    param,
                },
                other => HgnnError::Diff(other),
            })?;
            weighted += loss * chunk.len() as f64;
        }
        let mean = weighted / synthetic.len() as f64;
        log::debug!("epoch {epoch}: reconstruction loss {mean:.6}");
        history.epochs.push(mean);
    }
    Ok((params, history))
}
