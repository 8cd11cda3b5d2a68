use serde::{Deserialize, Serialize};

use crate::relgraph::EntitySubgraph;

use super::{AttackError, AttackScoreSet};

/// Smallest KDE bandwidth used by the default rule.
pub const MIN_BANDWIDTH: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct QueryVector {
    pub id: String,
    pub vector: Vec<f64>,
}

/// A single-table baseline and its optional tuning parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "attack", rename_all = "lowercase")]
pub enum Baseline {
    Dcr,
    Mc { radius: Option<f64> },
    Kde { bandwidth: Option<f64> },
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Dcr => "dcr",
            Baseline::Mc { .. } => "mc",
            Baseline::Kde { .. } => "kde",
        }
    }

    pub fn score(
        &self,
        queries: &[QueryVector],
        synth: &[Vec<f64>],
        space: &str,
    ) -> Result<AttackScoreSet, AttackError> {
        let scores = self.raw_scores(queries.iter().map(|q| q.vector.as_slice()), synth)?;
        AttackScoreSet::from_scores(self.name(), space, queries.iter().map(|q| q.id.clone()), scores)
    }

    fn raw_scores<'a>(
        &self,
        queries: impl ExactSizeIterator<Item = &'a [f64]>,
        synth: &[Vec<f64>],
    ) -> Result<Vec<f64>, AttackError> {
        let queries: Vec<&[f64]> = queries.collect();
        check_dims(&queries, synth)?;
        match *self {
            Baseline::Dcr => Ok(queries.iter().map(|q| -nearest_distance(q, synth)).collect()),
            Baseline::Mc { radius } => {
                let radius = match radius {
                    Some(r) if r.is_finite() && r >= 0.0 => r,
                    Some(_) => return Err(AttackError::InvalidParameter("MC radius")),
                    None => default_mc_radius(synth)?,
                };
                let n = synth.len() as f64;
                Ok(queries
                    .iter()
                    .map(|q| {
                        synth.iter().filter(|s| distance(q, s) <= radius).count() as f64 / n
                    })
                    .collect())
            }
            Baseline::Kde { bandwidth } => {
                let h = match bandwidth {
                    Some(h) if h.is_finite() && h > 0.0 => vec![h; synth[0].len()],
                    Some(_) => return Err(AttackError::InvalidParameter("KDE bandwidth")),
                    None => default_kde_bandwidth(synth)?,
                };
                Ok(queries.iter().map(|q| log_density(q, synth, &h)).collect())
            }
        }
    }
}

/// Negated distance to the closest synthetic vector.
pub fn dcr_score(queries: &[QueryVector], synth: &[Vec<f64>]) -> Result<AttackScoreSet, AttackError> {
    Baseline::Dcr.score(queries, synth, "raw")
}

/// Fraction of synthetic vectors within `radius` (inclusive) of the query.
pub fn mc_score(
    queries: &[QueryVector],
    synth: &[Vec<f64>],
    radius: Option<f64>,
) -> Result<AttackScoreSet, AttackError> {
    Baseline::Mc { radius }.score(queries, synth, "raw")
}

/// Log of the mean product-Gaussian kernel over synthetic vectors.
pub fn kde_score(
    queries: &[QueryVector],
    synth: &[Vec<f64>],
    bandwidth: Option<f64>,
) -> Result<AttackScoreSet, AttackError> {
    Baseline::Kde { bandwidth }.score(queries, synth, "raw")
}

/// Median over synthetic vectors of the distance to their nearest other
/// synthetic vector.
pub fn default_mc_radius(synth: &[Vec<f64>]) -> Result<f64, AttackError> {
    if synth.is_empty() {
        return Err(AttackError::EmptySynth);
    }
    if synth.len() < 2 {
        return Err(AttackError::RadiusUndefined);
    }
    let mut nn: Vec<f64> = (0..synth.len())
        .map(|i| {
            let best = synth
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, s)| squared_distance(&synth[i], s))
                .fold(f64::INFINITY, f64::min);
            best.sqrt()
        })
        .collect();
    nn.sort_by(f64::total_cmp);
    let m = nn.len();
    Ok(if m % 2 == 1 {
        nn[m / 2]
    } else {
        (nn[m / 2 - 1] + nn[m / 2]) / 2.0
    })
}

/// Per-dimension `σ̂ · n^(−1/(d+4))`, floored at [`MIN_BANDWIDTH`].
pub fn default_kde_bandwidth(synth: &[Vec<f64>]) -> Result<Vec<f64>, AttackError> {
    if synth.is_empty() {
        return Err(AttackError::EmptySynth);
    }
    let n = synth.len();
    let d = synth[0].len();
    let factor = (n as f64).powf(-1.0 / (d as f64 + 4.0));
    let mut degenerate = true;
    let h = (0..d)
        .map(|k| {
            let mean = synth.iter().map(|s| s[k]).sum::<f64>() / n as f64;
            let sd = if n > 1 {
                let ss: f64 = synth.iter().map(|s| (s[k] - mean).powi(2)).sum();
                (ss / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            if sd > 0.0 {
                degenerate = false;
            }
            (sd * factor).max(MIN_BANDWIDTH)
        })
        .collect();
    if degenerate {
        return Err(AttackError::DegenerateDensity);
    }
    Ok(h)
}

/// The root row's encoded features; children are ignored.
pub fn extract_parent_row(subgraph: &EntitySubgraph) -> Vec<f64> {
    subgraph.root_features().to_vec()
}

pub fn parent_rows(subgraphs: &[EntitySubgraph]) -> Vec<QueryVector> {
    subgraphs
        .iter()
        .map(|s| QueryVector {
            id: s.id().to_string(),
            vector: extract_parent_row(s),
        })
        .collect()
}

/// Per entity, the encoded rows of one child table that belong to it.
pub fn child_table_rows(
    subgraphs: &[EntitySubgraph],
    node_type: usize,
) -> Vec<(String, Vec<Vec<f64>>)> {
    subgraphs
        .iter()
        .map(|s| {
            let x = &s.graph().node_type(node_type).features;
            let rows = s.nodes_of(node_type).iter().map(|&i| x.row(i).to_vec()).collect();
            (s.id().to_string(), rows)
        })
        .collect()
}

/// Scores every child row independently and keeps each entity's maximum.
/// Entities with no rows in the table get the lowest score of the set.
pub fn score_child_table(
    baseline: &Baseline,
    entities: &[(String, Vec<Vec<f64>>)],
    synth_rows: &[Vec<f64>],
    table: &str,
) -> Result<AttackScoreSet, AttackError> {
    let flat = entities.iter().flat_map(|(_, rows)| rows.iter().map(Vec::as_slice));
    let row_scores = baseline.raw_scores(flat.collect::<Vec<_>>().into_iter(), synth_rows)?;
    let mut it = row_scores.into_iter();
    let mut scores: Vec<Option<f64>> = entities
        .iter()
        .map(|(_, rows)| it.by_ref().take(rows.len()).reduce(f64::max))
        .collect();
    let floor = scores.iter().flatten().copied().reduce(f64::min).unwrap_or(0.0);
    for s in &mut scores {
        s.get_or_insert(floor);
    }
    AttackScoreSet::from_scores(
        baseline.name(),
        &format!("child:{table}"),
        entities.iter().map(|(id, _)| id.clone()),
        scores.into_iter().flatten().collect(),
    )
}

fn check_dims(queries: &[&[f64]], synth: &[Vec<f64>]) -> Result<(), AttackError> {
    let first = synth.first().ok_or(AttackError::EmptySynth)?;
    let expected = first.len();
    let rows = synth.iter().map(Vec::as_slice).chain(queries.iter().copied());
    for (row, v) in rows.enumerate() {
        if v.len() != expected {
            return Err(AttackError::DimensionMismatch {
                row,
                expected,
                found: v.len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

pub(crate) fn nearest_distance(q: &[f64], synth: &[Vec<f64>]) -> f64 {
    synth
        .iter()
        .map(|s| squared_distance(q, s))
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

fn log_density(q: &[f64], synth: &[Vec<f64>], h: &[f64]) -> f64 {
    let norm: f64 = h
        .iter()
        .map(|h| -0.5 * (2.0 * std::f64::consts::PI).ln() - h.ln())
        .sum();
    let logs: Vec<f64> = synth
        .iter()
        .map(|s| {
            let quad: f64 = q
                .iter()
                .zip(s)
                .zip(h)
                .map(|((x, y), h)| ((x - y) / h).powi(2))
                .sum();
            norm - 0.5 * quad
        })
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - max).exp()).sum();
    max + (sum / synth.len() as f64).ln()
}
