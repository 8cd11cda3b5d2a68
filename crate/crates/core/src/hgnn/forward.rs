use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diffcore::{ParamId, Tape, Tensor, Var};
use crate::relgraph::EntitySubgraph;

use super::batch::Batch;
use super::model::{Dense, EncoderParams, Mlp};
use super::HgnnError;

/// Records parameters on a tape at most once each.
pub(crate) struct Bound<'p> {
    pub params: &'p EncoderParams,
    vars: Vec<Option<Var>>,
}

impl<'p> Bound<'p> {
    pub fn new(params: &'p EncoderParams) -> Self {
        Self {
            params,
            vars: vec![None; params.store.len()],
        }
    }

    pub fn get(&mut self, tape: &mut Tape, id: ParamId) -> Var {
        *self.vars[id.index()].get_or_insert_with(|| tape.param(&self.params.store, id))
    }

    fn dense(&mut self, tape: &mut Tape, x: Var, layer: Dense) -> Result<Var, HgnnError> {
        let w = self.get(tape, layer.weight);
        let b = self.get(tape, layer.bias);
        let xw = tape.matmul(x, w)?;
        Ok(tape.add(xw, b)?)
    }

    fn mlp(&mut self, tape: &mut Tape, x: Var, mlp: Mlp) -> Result<Var, HgnnError> {
        let h = self.dense(tape, x, mlp.hidden)?;
        let h = tape.leaky_relu(h, self.params.config.leaky_slope);
        self.dense(tape, h, mlp.out)
    }
}

/// Tape handles of the four entity-level vectors for a batch.
pub(crate) struct Embeddings {
    pub parent: Var,
    pub context: Var,
    pub gate: Var,
    pub fused: Var,
}

pub(crate) fn input_projection(
    tape: &mut Tape,
    bound: &mut Bound,
    features: &[Tensor],
) -> Result<Vec<Var>, HgnnError> {
    let ids = bound.params.ids.input.clone();
    features
        .iter()
        .zip(ids)
        .map(|(x, dense)| {
            let xv = tape.constant(x.clone());
            bound.dense(tape, xv, dense)
        })
        .collect()
}

/// One attention message-passing layer over a stacked graph.
///
/// For destination `i` under relation `r`, logits are
/// `a_rᵀ · leaky(W_src h_j + W_dst h_i)` softmax-normalized over `j`;
/// the message is `Σ_j α_ij W_src h_j`. Messages are averaged over the
/// relations entering the type, then `h ← leaky(h + message)`.
pub(crate) fn message_layer(
    tape: &mut Tape,
    bound: &mut Bound,
    layer: usize,
    hidden: &[Var],
    node_count: &[usize],
    relation_edges: &[(Arc<[usize]>, Arc<[usize]>)],
) -> Result<Vec<Var>, HgnnError> {
    let params = bound.params;
    let slope = params.config.leaky_slope;
    let layout = &params.layout;
    let mut incoming: Vec<Option<Var>> = vec![None; hidden.len()];
    for (r, rel) in layout.relations.iter().enumerate() {
        let (src, dst) = &relation_edges[r];
        if src.is_empty() {
            continue;
        }
        let mut heads = Vec::with_capacity(params.config.heads);
        for head in params.ids.layers[layer][r].clone() {
            let w_src = bound.get(tape, head.src);
            let w_dst = bound.get(tape, head.dst);
            let att = bound.get(tape, head.att);
            let s = tape.matmul(hidden[rel.src], w_src)?;
            let d = tape.matmul(hidden[rel.dst], w_dst)?;
            let s_edge = tape.gather_rows(s, Arc::clone(src))?;
            let d_edge = tape.gather_rows(d, Arc::clone(dst))?;
            let pre = tape.add(s_edge, d_edge)?;
            let act = tape.leaky_relu(pre, slope);
            let logits = tape.matmul(act, att)?;
            let alpha = tape.segment_softmax(logits, Arc::clone(dst), node_count[rel.dst])?;
            let weighted = tape.mul(s_edge, alpha)?;
            heads.push(tape.segment_sum(weighted, Arc::clone(dst), node_count[rel.dst])?);
        }
        let message = if heads.len() == 1 {
            heads[0]
        } else {
            tape.concat(&heads)?
        };
        incoming[rel.dst] = Some(match incoming[rel.dst] {
            Some(acc) => tape.add(acc, message)?,
            None => message,
        });
    }
    let mut out = Vec::with_capacity(hidden.len());
    for (t, &h) in hidden.iter().enumerate() {
        let pre = match incoming[t] {
            Some(msg) => {
                let mean = tape.scale(msg, 1.0 / layout.incoming_relations(t) as f64);
                tape.add(h, mean)?
            }
            None => h,
        };
        out.push(tape.leaky_relu(pre, slope));
    }
    Ok(out)
}

/// Attention readout of one context type: `s_j = vᵀ tanh(U h_j)`,
/// softmax within each segment, weighted sum of the states.
pub(crate) fn pool_segments(
    tape: &mut Tape,
    bound: &mut Bound,
    slot: usize,
    states: Var,
    segments: Arc<[usize]>,
    segment_count: usize,
) -> Result<Var, HgnnError> {
    let p = bound.params.ids.pool[slot];
    let u = bound.get(tape, p.score_proj);
    let v = bound.get(tape, p.score_vec);
    let proj = tape.matmul(states, u)?;
    let act = tape.tanh(proj);
    let scores = tape.matmul(act, v)?;
    let weights = tape.segment_softmax(scores, Arc::clone(&segments), segment_count)?;
    let weighted = tape.mul(states, weights)?;
    Ok(tape.segment_sum(weighted, segments, segment_count)?)
}

pub(crate) fn embed(
    tape: &mut Tape,
    bound: &mut Bound,
    batch: &Batch,
) -> Result<Embeddings, HgnnError> {
    let params = bound.params;
    let d = params.config.hidden_dim;
    let b = batch.entity_count;
    let layout = &params.layout;

    let mut hidden = input_projection(tape, bound, &batch.features)?;
    for layer in 0..params.config.layers {
        hidden = message_layer(
            tape,
            bound,
            layer,
            &hidden,
            &batch.node_count,
            &batch.relation_edges,
        )?;
    }

    let parent = tape.gather_rows(hidden[layout.root], Arc::clone(&batch.root_rows))?;
    let mut context: Option<Var> = None;
    for (slot, &t) in layout.context_types.iter().enumerate() {
        let (rows, seg) = &batch.pool[slot];
        let states = tape.gather_rows(hidden[t], Arc::clone(rows))?;
        let pooled = pool_segments(tape, bound, slot, states, Arc::clone(seg), b)?;
        let map = bound.get(tape, params.ids.pool[slot].context_map);
        let mapped = tape.matmul(pooled, map)?;
        context = Some(match context {
            Some(acc) => tape.add(acc, mapped)?,
            None => mapped,
        });
    }
    let context = match context {
        Some(c) => c,
        None => tape.constant(Tensor::zeros(b, d)),
    };

    let joint = tape.concat(&[parent, context])?;
    let gate_logits = bound.mlp(tape, joint, params.ids.gate)?;
    let gate = tape.sigmoid(gate_logits);
    let phi_pre = bound.dense(tape, context, params.ids.phi)?;
    let phi = tape.tanh(phi_pre);
    let gated = tape.mul(gate, phi)?;
    let fused = tape.add(parent, gated)?;
    Ok(Embeddings {
        parent,
        context,
        gate,
        fused,
    })
}

/// Composite reconstruction loss of a batch, averaged over entities.
pub(crate) fn batch_loss(
    tape: &mut Tape,
    bound: &mut Bound,
    batch: &Batch,
) -> Result<Var, HgnnError> {
    let params = bound.params;
    let cfg = &params.config;
    let emb = embed(tape, bound, batch)?;
    let mut terms = Vec::new();
    if cfg.lambda_parent > 0.0 {
        let recon = bound.mlp(tape, emb.fused, params.ids.parent_decoder)?;
        let target = tape.constant(batch.parent_target.clone());
        let err = tape.squared_error(recon, target)?;
        terms.push(tape.scale(err, cfg.lambda_parent));
    }
    if cfg.lambda_context > 0.0 {
        for (slot, target) in batch.context_targets.iter().enumerate() {
            let recon = bound.mlp(tape, emb.fused, params.ids.context_decoders[slot])?;
            let target = tape.constant(target.clone());
            let err = tape.squared_error(recon, target)?;
            terms.push(tape.scale(err, cfg.lambda_context));
        }
    }
    let mut total = match terms.first() {
        Some(&t) => t,
        None => tape.constant(Tensor::scalar(0.0)),
    };
    for &t in terms.iter().skip(1) {
        total = tape.add(total, t)?;
    }
    Ok(tape.scale(total, 1.0 / batch.entity_count.max(1) as f64))
}

/// Fixed-size representation of one entity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityEmbedding {
    pub entity_id: String,
    pub z_parent: Vec<f64>,
    pub z_context: Vec<f64>,
    pub gate: Vec<f64>,
    pub z_final: Vec<f64>,
}

impl EntityEmbedding {
    /// Recomputes `z_parent + g ⊙ tanh(φ(z_context))` from the stored parts.
    pub fn recompose(&self, params: &EncoderParams) -> Result<Vec<f64>, HgnnError> {
        let phi = params.ids.phi;
        let zc = Tensor::row_vector(self.z_context.clone());
        let pre = crate::diffcore::matmul(&zc, params.store.get(phi.weight))?;
        let pre = crate::diffcore::add(&pre, params.store.get(phi.bias))?;
        let phi = crate::diffcore::tanh(&pre);
        let g = Tensor::row_vector(self.gate.clone());
        let gated = crate::diffcore::mul(&g, &phi)?;
        let zp = Tensor::row_vector(self.z_parent.clone());
        Ok(crate::diffcore::add(&zp, &gated)?.into_vec())
    }
}

/// Embeds one entity subgraph with frozen parameters.
pub fn encode_subgraph(
    params: &EncoderParams,
    subgraph: &EntitySubgraph,
) -> Result<EntityEmbedding, HgnnError> {
    let mut out = encode_batch(params, &[subgraph])?;
    Ok(out.pop().expect("one entity in, one out"))
}

/// Embeds several entities in one stacked pass. Results agree with
/// per-entity [`encode_subgraph`] up to summation-order roundoff.
pub fn encode_batch(
    params: &EncoderParams,
    subgraphs: &[&EntitySubgraph],
) -> Result<Vec<EntityEmbedding>, HgnnError> {
    let batch = Batch::build(&params.layout, subgraphs)?;
    let mut tape = Tape::new();
    let mut bound = Bound::new(params);
    let emb = embed(&mut tape, &mut bound, &batch)?;
    let rows = |v: Var, k: usize| tape.value(v).row(k).to_vec();
    Ok(subgraphs
        .iter()
        .enumerate()
        .map(|(k, sub)| EntityEmbedding {
            entity_id: sub.id().to_string(),
            z_parent: rows(emb.parent, k),
            z_context: rows(emb.context, k),
            gate: rows(emb.gate, k),
            z_final: rows(emb.fused, k),
        })
        .collect())
}

/// Hidden states of one entity after the input projection, one matrix
/// per node type with rows in `subgraph.nodes_of(t)` order.
pub fn initial_states(
    params: &EncoderParams,
    subgraph: &EntitySubgraph,
) -> Result<Vec<Tensor>, HgnnError> {
    let batch = Batch::build(&params.layout, &[subgraph])?;
    let mut tape = Tape::new();
    let mut bound = Bound::new(params);
    let h = input_projection(&mut tape, &mut bound, &batch.features)?;
    Ok(h.into_iter().map(|v| tape.value(v).clone()).collect())
}

/// Applies message-passing layer `layer` to the given per-type states of
/// one entity (rows in `subgraph.nodes_of(t)` order).
pub fn message_pass(
    params: &EncoderParams,
    subgraph: &EntitySubgraph,
    layer: usize,
    states: &[Tensor],
) -> Result<Vec<Tensor>, HgnnError> {
    if layer >= params.config.layers {
        return Err(HgnnError::Config(format!(
            "layer {layer} out of range for {} layers",
            params.config.layers
        )));
    }
    let batch = Batch::build(&params.layout, &[subgraph])?;
    if states.len() != batch.node_count.len()
        || states
            .iter()
            .zip(&batch.node_count)
            .any(|(s, &n)| s.shape() != (n, params.config.hidden_dim))
    {
        return Err(HgnnError::Config("hidden states do not match the subgraph".into()));
    }
    let mut tape = Tape::new();
    let mut bound = Bound::new(params);
    let hidden: Vec<Var> = states.iter().map(|s| tape.constant(s.clone())).collect();
    let out = message_layer(
        &mut tape,
        &mut bound,
        layer,
        &hidden,
        &batch.node_count,
        &batch.relation_edges,
    )?;
    Ok(out.into_iter().map(|v| tape.value(v).clone()).collect())
}

/// Attention pooling of `states` (rows) into `segment_count` vectors using
/// the pooling weights of context type `node_type`. Empty segments pool
/// to zero.
pub fn attention_pool(
    params: &EncoderParams,
    node_type: usize,
    states: &Tensor,
    segments: &[usize],
    segment_count: usize,
) -> Result<Tensor, HgnnError> {
    let slot = params
        .layout
        .context_types
        .iter()
        .position(|&t| t == node_type)
        .ok_or_else(|| HgnnError::Config(format!("type {node_type} is not pooled")))?;
    let mut tape = Tape::new();
    let mut bound = Bound::new(params);
    let s = tape.constant(states.clone());
    let out = pool_segments(&mut tape, &mut bound, slot, s, Arc::from(segments), segment_count)?;
    Ok(tape.value(out).clone())
}

/// Reconstruction loss over a batch of entities.
pub fn reconstruction_loss(
    params: &EncoderParams,
    subgraphs: &[&EntitySubgraph],
) -> Result<f64, HgnnError> {
    if subgraphs.is_empty() {
        return Err(HgnnError::Config("loss of an empty batch".into()));
    }
    let batch = Batch::build(&params.layout, subgraphs)?;
    let mut tape = Tape::new();
    let mut bound = Bound::new(params);
    let loss = batch_loss(&mut tape, &mut bound, &batch)?;
    Ok(tape.value(loss).data()[0])
}

/// Loss and its gradient for every parameter, in store order.
pub fn loss_and_gradients(
    params: &EncoderParams,
    subgraphs: &[&EntitySubgraph],
) -> Result<(f64, Vec<Tensor>), HgnnError> {
    if subgraphs.is_empty() {
        return Err(HgnnError::Config("loss of an empty batch".into()));
    }
    let batch = Batch::build(&params.layout, subgraphs)?;
    loss_and_gradients_on(params, &batch)
}

pub(crate) fn loss_and_gradients_on(
    params: &EncoderParams,
    batch: &Batch,
) -> Result<(f64, Vec<Tensor>), HgnnError> {
    let mut tape = Tape::new();
    let mut bound = Bound::new(params);
    let loss = batch_loss(&mut tape, &mut bound, batch)?;
    let grads = tape.backward(loss)?;
    Ok((tape.value(loss).data()[0], grads.for_params(&params.store)))
}
