//! Attack-success and synthetic-data fidelity metrics.

mod fidelity;
mod roc;

use thiserror::Error;

pub use fidelity::{
    avg_hop, cardinality_fidelity, fidelity_report, khop_correlation, ks_complement, one_way,
    tv_complement, FidelityReport, Scored,
};
pub use roc::{roc_and_auc, EvalReport, RocPoint, TprAtFpr, REPORTED_FPRS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("entity {0} has no membership label")]
    MissingLabel(String),
    #[error("non-finite score for entity {0}")]
    NonFiniteScore(String),
    #[error("both classes are needed, got {members} members and {nonmembers} nonmembers")]
    SingleClass { members: usize, nonmembers: usize },
    #[error("no per-hop scores to average")]
    NoHopScores,
    #[error("schema has no foreign-key relation")]
    NoRelations,
    #[error("hop distance {0} is not supported (0 or 1)")]
    UnsupportedHop(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(String),
}
