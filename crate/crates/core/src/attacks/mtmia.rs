use crate::hgnn::{encode_subgraph, EncoderParams, EntityEmbedding};
use crate::relgraph::EntitySubgraph;

use super::baselines::nearest_distance;
use super::{AttackError, AttackScoreSet, EmbeddingSpace};

/// Embeds each entity on its own, so identical subgraphs get bitwise
/// identical embeddings regardless of what else is being scored.
pub fn embed_all(
    params: &EncoderParams,
    subgraphs: &[EntitySubgraph],
) -> Result<Vec<EntityEmbedding>, AttackError> {
    subgraphs
        .iter()
        .map(|s| encode_subgraph(params, s).map_err(AttackError::from))
        .collect()
}

fn pick(e: &EntityEmbedding, space: EmbeddingSpace) -> &[f64] {
    match space {
        EmbeddingSpace::Parent => &e.z_parent,
        EmbeddingSpace::Context => &e.z_context,
        EmbeddingSpace::Final => &e.z_final,
    }
}

/// Negated distance to the closest synthetic entity in `space`.
pub fn mtmia_score(
    params: &EncoderParams,
    queries: &[EntitySubgraph],
    synth: &[EntitySubgraph],
    space: EmbeddingSpace,
) -> Result<AttackScoreSet, AttackError> {
    if synth.is_empty() {
        return Err(AttackError::EmptySynth);
    }
    let synth = embed_all(params, synth)?;
    let queries = embed_all(params, queries)?;
    mtmia_score_embedded(&queries, &synth, space)
}

/// [`mtmia_score`] over precomputed embeddings.
pub fn mtmia_score_embedded(
    queries: &[EntityEmbedding],
    synth: &[EntityEmbedding],
    space: EmbeddingSpace,
) -> Result<AttackScoreSet, AttackError> {
    if synth.is_empty() {
        return Err(AttackError::EmptySynth);
    }
    let reference: Vec<Vec<f64>> = synth.iter().map(|e| pick(e, space).to_vec()).collect();
    let scores = queries
        .iter()
        .map(|q| -nearest_distance(pick(q, space), &reference))
        .collect();
    AttackScoreSet::from_scores(
        "mtmia",
        space.as_str(),
        queries.iter().map(|q| q.entity_id.clone()),
        scores,
    )
}
