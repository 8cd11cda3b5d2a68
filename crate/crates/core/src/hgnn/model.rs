use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffcore::{NamedTensor, ParamId, ParamStore};
use crate::relgraph::RelationalSchema;

use super::HgnnError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    pub hidden_dim: usize,
    pub layers: usize,
    pub heads: usize,
    pub leaky_slope: f64,
    pub lambda_parent: f64,
    pub lambda_context: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        Self {
            hidden_dim: 64,
            layers: 2,
            heads: 1,
            leaky_slope: 0.2,
            lambda_parent: 1.0,
            lambda_context: 1.0,
            learning_rate: 1e-3,
            epochs: 100,
            batch_size: 64,
            seed: 0,
        }
    }
}

const MAX_HIDDEN_DIM: usize = 4096;
const MAX_LAYERS: usize = 64;

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), HgnnError> {
        let bad = |m: &str| Err(HgnnError::Config(m.to_string()));
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be at least 1");
        }
        if self.hidden_dim > MAX_HIDDEN_DIM {
            return bad("hidden_dim exceeds 4096");
        }
        if self.layers == 0 || self.layers > MAX_LAYERS {
            return bad("layers must be between 1 and 64");
        }
        if self.heads == 0 || self.hidden_dim % self.heads != 0 {
            return bad("heads must be positive and divide hidden_dim");
        }
        if !(self.leaky_slope.is_finite() && self.leaky_slope >= 0.0) {
            return bad("leaky_slope must be finite and non-negative");
        }
        if !(self.lambda_parent >= 0.0 && self.lambda_context >= 0.0) {
            return bad("loss weights must be non-negative");
        }
        if self.lambda_parent == 0.0 && self.lambda_context == 0.0 {
            return bad("lambda_parent and lambda_context cannot both be zero");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        Ok(())
    }
}

/// A message-passing relation. Every FK edge type yields a forward
/// relation (child → parent) and a reversed twin (parent → child).
#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub name: String,
    pub src: usize,
    pub dst: usize,
    pub edge_type: usize,
    pub reversed: bool,
}

/// Schema-derived shape information the parameters are laid out against.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemaLayout {
    pub fingerprint: String,
    pub type_names: Vec<String>,
    pub input_dims: Vec<usize>,
    pub root: usize,
    pub relations: Vec<Relation>,
    /// Types pooled into the context vector: every type except the root's.
    pub context_types: Vec<usize>,
    /// Types adjacent to the root type; each gets a context decoder head.
    pub neighbor_types: Vec<usize>,
}

impl SchemaLayout {
    pub fn from_schema(schema: &RelationalSchema) -> Self {
        let type_names: Vec<String> = schema.tables().iter().map(|t| t.name.clone()).collect();
        let input_dims = schema.tables().iter().map(|t| t.feature_count()).collect();
        let root = schema.root_index();
        let mut relations = Vec::new();
        for (e, (table, fk)) in schema.relations().enumerate() {
            let src = schema.table_index(&table.name).expect("validated");
            let dst = schema.table_index(&fk.references).expect("validated");
            let name = format!("{}.{}", table.name, fk.column);
            relations.push(Relation {
                name: name.clone(),
                src,
                dst,
                edge_type: e,
                reversed: false,
            });
            relations.push(Relation {
                name: format!("rev.{name}"),
                src: dst,
                dst: src,
                edge_type: e,
                reversed: true,
            });
        }
        let context_types = (0..type_names.len()).filter(|&t| t != root).collect();
        let mut neighbor_types: Vec<usize> = relations
            .iter()
            .filter(|r| r.dst == root && r.src != root)
            .map(|r| r.src)
            .collect();
        neighbor_types.sort_unstable();
        neighbor_types.dedup();
        Self {
            fingerprint: schema.fingerprint(),
            type_names,
            input_dims,
            root,
            relations,
            context_types,
            neighbor_types,
        }
    }

    /// Number of relations delivering messages into each type.
    pub fn incoming_relations(&self, node_type: usize) -> usize {
        self.relations.iter().filter(|r| r.dst == node_type).count()
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Dense {
    pub weight: ParamId,
    pub bias: ParamId,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Mlp {
    pub hidden: Dense,
    pub out: Dense,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct AttentionHead {
    pub src: ParamId,
    pub dst: ParamId,
    pub att: ParamId,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct PoolParams {
    pub score_proj: ParamId,
    pub score_vec: ParamId,
    pub context_map: ParamId,
}

#[derive(Clone, Debug)]
pub(crate) struct ParamIds {
    pub input: Vec<Dense>,
    /// `[layer][relation][head]`
    pub layers: Vec<Vec<Vec<AttentionHead>>>,
    /// Aligned with `SchemaLayout::context_types`.
    pub pool: Vec<PoolParams>,
    pub gate: Mlp,
    pub phi: Dense,
    pub parent_decoder: Mlp,
    /// Aligned with `SchemaLayout::neighbor_types`.
    pub context_decoders: Vec<Mlp>,
}

/// Every trainable weight of the encoder and its decoder heads.
#[derive(Clone, Debug)]
pub struct EncoderParams {
    pub(crate) config: EncoderConfig,
    pub(crate) layout: SchemaLayout,
    pub(crate) store: ParamStore,
    pub(crate) ids: ParamIds,
}

impl EncoderParams {
    /// Glorot-uniform weights and zero biases drawn from `config.seed`.
    pub fn init(config: &EncoderConfig, schema: &RelationalSchema) -> Result<Self, HgnnError> {
        config.validate()?;
        let layout = SchemaLayout::from_schema(schema);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let d = config.hidden_dim;
        let dh = d / config.heads;
        let mut store = ParamStore::new();
        let dense = |store: &mut ParamStore, name: &str, i: usize, o: usize, rng: &mut ChaCha8Rng| {
            Ok::<_, HgnnError>(Dense {
                weight: store.insert_glorot(format!("{name}.weight"), i, o, rng)?,
                bias: store.insert_zeros(format!("{name}.bias"), 1, o)?,
            })
        };

        let mut input = Vec::new();
        for (t, name) in layout.type_names.iter().enumerate() {
            input.push(dense(&mut store, &format!("input.{name}"), layout.input_dims[t], d, &mut rng)?);
        }
        let mut layers = Vec::new();
        for l in 0..config.layers {
            let mut per_rel = Vec::new();
            for rel in &layout.relations {
                let mut heads = Vec::new();
                for h in 0..config.heads {
                    let prefix = format!("layer{l}.{}.head{h}", rel.name);
                    heads.push(AttentionHead {
                        src: store.insert_glorot(format!("{prefix}.src"), d, dh, &mut rng)?,
                        dst: store.insert_glorot(format!("{prefix}.dst"), d, dh, &mut rng)?,
                        att: store.insert_glorot(format!("{prefix}.att"), dh, 1, &mut rng)?,
                    });
                }
                per_rel.push(heads);
            }
            layers.push(per_rel);
        }
        let mut pool = Vec::new();
        for &t in &layout.context_types {
            let name = &layout.type_names[t];
            pool.push(PoolParams {
                score_proj: store.insert_glorot(format!("pool.{name}.score_proj"), d, d, &mut rng)?,
                score_vec: store.insert_glorot(format!("pool.{name}.score_vec"), d, 1, &mut rng)?,
                context_map: store.insert_glorot(format!("context.{name}.map"), d, d, &mut rng)?,
            });
        }
        let gate = Mlp {
            hidden: dense(&mut store, "gate.hidden", 2 * d, d, &mut rng)?,
            out: dense(&mut store, "gate.out", d, d, &mut rng)?,
        };
        let phi = dense(&mut store, "phi", d, d, &mut rng)?;
        let root_dim = layout.input_dims[layout.root];
        let parent_decoder = Mlp {
            hidden: dense(&mut store, "decoder.parent.hidden", d, d, &mut rng)?,
            out: dense(&mut store, "decoder.parent.out", d, root_dim, &mut rng)?,
        };
        let mut context_decoders = Vec::new();
        for &t in &layout.neighbor_types {
            let name = &layout.type_names[t];
            context_decoders.push(Mlp {
                hidden: dense(&mut store, &format!("decoder.context.{name}.hidden"), d, d, &mut rng)?,
                out: dense(
                    &mut store,
                    &format!("decoder.context.{name}.out"),
                    d,
                    layout.input_dims[t],
                    &mut rng,
                )?,
            });
        }
        Ok(Self {
            config: config.clone(),
            layout,
            store,
            ids: ParamIds {
                input,
                layers,
                pool,
                gate,
                phi,
                parent_decoder,
                context_decoders,
            },
        })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.config
    }

    pub fn layout(&self) -> &SchemaLayout {
        &self.layout
    }

    pub fn store(&self) -> &ParamStore {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    pub fn to_checkpoint(&self) -> EncoderCheckpoint {
        EncoderCheckpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            config: self.config.clone(),
            schema_fingerprint: self.layout.fingerprint.clone(),
            tensors: self.store.to_snapshot(),
        }
    }

    /// Rebuilds parameters from a checkpoint; refuses a checkpoint trained
    /// against a different schema.
    pub fn from_checkpoint(
        checkpoint: &EncoderCheckpoint,
        schema: &RelationalSchema,
    ) -> Result<Self, HgnnError> {
        if checkpoint.format != CHECKPOINT_FORMAT {
            return Err(HgnnError::Checkpoint(format!(
                "unsupported checkpoint format {:?}",
                checkpoint.format
            )));
        }
        let fingerprint = schema.fingerprint();
        if checkpoint.schema_fingerprint != fingerprint {
            return Err(HgnnError::Checkpoint(format!(
                "checkpoint was trained for schema {}, not {}",
                checkpoint.schema_fingerprint, fingerprint
            )));
        }
        let mut params = Self::init(&checkpoint.config, schema)?;
        params
            .store
            .load_snapshot(&checkpoint.tensors)
            .map_err(|e| HgnnError::Checkpoint(e.to_string()))?;
        Ok(params)
    }
}

pub const CHECKPOINT_FORMAT: &str = "mtmia-encoder-v1";

/// Serialized encoder: config, schema fingerprint and named tensors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderCheckpoint {
    pub format: String,
    pub config: EncoderConfig,
    pub schema_fingerprint: String,
    pub tensors: Vec<NamedTensor>,
}

impl EncoderCheckpoint {
    pub fn from_json_str(text: &str) -> Result<Self, HgnnError> {
        serde_json::from_str(text).map_err(|e| HgnnError::Checkpoint(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }
}
