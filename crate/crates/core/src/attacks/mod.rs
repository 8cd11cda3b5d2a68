//! Membership scoring. Higher scores mean "more likely a member".
//!
//! MT-MIA scores an entity by its negated distance to the nearest
//! synthetic entity in one of the encoder's embedding spaces. The
//! single-table baselines (DCR, MC, KDE) work on plain feature rows: the
//! root row of each entity, or every row of one child table with the
//! entity keeping the maximum of its rows' scores.

mod baselines;
mod mtmia;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hgnn::HgnnError;
use crate::relgraph::Membership;

pub use baselines::{
    child_table_rows, dcr_score, default_kde_bandwidth, default_mc_radius, extract_parent_row,
    kde_score, mc_score, parent_rows, score_child_table, Baseline, QueryVector,
};
pub use mtmia::{embed_all, mtmia_score, mtmia_score_embedded};

#[derive(Debug, Error)]
pub enum AttackError {
    #[error("synthetic reference set is empty")]
    EmptySynth,
    #[error("vector {row} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("default MC radius needs at least 2 synthetic rows")]
    RadiusUndefined,
    #[error("{0} must be positive and finite")]
    InvalidParameter(&'static str),
    #[error("degenerate density: every synthetic dimension is constant")]
    DegenerateDensity,
    #[error("non-finite score for entity {0}")]
    NonFiniteScore(String),
    #[error("duplicate entity id {0}")]
    DuplicateId(String),
    #[error("unknown attack or space: {0}")]
    Unknown(String),
    #[error("score export: {0}")]
    Io(String),
    #[error(transparent)]
    Encoder(#[from] HgnnError),
}

/// Which encoder output an MT-MIA distance is measured in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmbeddingSpace {
    Parent,
    Context,
    Final,
}

impl EmbeddingSpace {
    pub const ALL: [EmbeddingSpace; 3] = [Self::Parent, Self::Context, Self::Final];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Parent => "parent",
            Self::Context => "context",
            Self::Final => "final",
        }
    }
}

impl fmt::Display for EmbeddingSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingSpace {
    type Err = AttackError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parent" => Ok(Self::Parent),
            "context" => Ok(Self::Context),
            "final" => Ok(Self::Final),
            other => Err(AttackError::Unknown(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredEntity {
    pub id: String,
    pub score: f64,
    pub label: Option<Membership>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackScoreSet {
    pub attack: String,
    pub space: String,
    pub entries: Vec<ScoredEntity>,
}

impl AttackScoreSet {
    pub(crate) fn from_scores(
        attack: &str,
        space: &str,
        ids: impl IntoIterator<Item = String>,
        scores: Vec<f64>,
    ) -> Result<Self, AttackError> {
        let entries = ids
            .into_iter()
            .zip(scores)
            .map(|(id, score)| ScoredEntity {
                id,
                score,
                label: None,
            })
            .collect();
        let set = Self {
            attack: attack.to_string(),
            space: space.to_string(),
            entries,
        };
        set.validate()?;
        Ok(set)
    }

    /// Scores finite, ids unique.
    pub fn validate(&self) -> Result<(), AttackError> {
        let mut seen = HashSet::with_capacity(self.entries.len());
        for e in &self.entries {
            if !e.score.is_finite() {
                return Err(AttackError::NonFiniteScore(e.id.clone()));
            }
            if !seen.insert(e.id.as_str()) {
                return Err(AttackError::DuplicateId(e.id.clone()));
            }
        }
        Ok(())
    }

    /// Attaches ground truth; ids absent from `labels` stay unlabelled.
    pub fn with_labels(mut self, labels: &HashMap<String, Membership>) -> Self {
        for e in &mut self.entries {
            e.label = labels.get(&e.id).copied();
        }
        self
    }

    pub fn score_of(&self, id: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.id == id).map(|e| e.score)
    }

    /// CSV with header `entity_id,attack,space,score,label`; missing labels
    /// are empty cells.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), AttackError> {
        let io = |e: csv::Error| AttackError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["entity_id", "attack", "space", "score", "label"])
            .map_err(io)?;
        for e in &self.entries {
            let label = e.label.map(|l| l.to_string()).unwrap_or_default();
            w.write_record([
                e.id.as_str(),
                &self.attack,
                &self.space,
                &e.score.to_string(),
                &label,
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| AttackError::Io(e.to_string()))
    }
}
