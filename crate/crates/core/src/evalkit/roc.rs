use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::attacks::AttackScoreSet;
use crate::relgraph::Membership;

use super::EvalError;

/// False-positive budgets reported for every attack.
pub const REPORTED_FPRS: [f64; 3] = [0.0, 1e-3, 1e-2];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    pub threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TprAtFpr {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub attack: String,
    pub space: String,
    pub auc: f64,
    pub tpr_at_fpr: Vec<TprAtFpr>,
    pub members: usize,
    pub nonmembers: usize,
    /// One point per distinct score, thresholds descending; an entity is
    /// called a member when its score is at least the threshold.
    pub roc: Vec<RocPoint>,
}

impl EvalReport {
    pub fn tpr_at(&self, fpr: f64) -> Option<f64> {
        self.tpr_at_fpr.iter().find(|p| p.fpr == fpr).map(|p| p.tpr)
    }

    pub fn write_roc_csv<W: Write>(&self, writer: W) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fpr", "tpr", "threshold"])?;
        for p in &self.roc {
            w.write_record([p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])?;
        }
        w.flush().map_err(|e| EvalError::Io(e.to_string()))
    }
}

/// ROC curve, tie-aware AUC and TPR at the reported FPR budgets.
///
/// AUC is the Mann–Whitney statistic `P(member > nonmember) + ½ P(tie)`.
/// TPR at budget α is the largest TPR among thresholds whose empirical
/// FPR is at most α.
pub fn roc_and_auc(scores: &AttackScoreSet) -> Result<EvalReport, EvalError> {
    let mut labelled: Vec<(f64, bool)> = Vec::with_capacity(scores.entries.len());
    for e in &scores.entries {
        let label = e
            .label
            .ok_or_else(|| EvalError::MissingLabel(e.id.clone()))?;
        if !e.score.is_finite() {
            return Err(EvalError::NonFiniteScore(e.id.clone()));
        }
        labelled.push((e.score, label == Membership::Member));
    }
    let positives = labelled.iter().filter(|(_, m)| *m).count();
    let negatives = labelled.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(EvalError::SingleClass {
            members: positives,
            nonmembers: negatives,
        });
    }

    labelled.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
    let (p, n) = (positives as f64, negatives as f64);
    let mut roc = Vec::new();
    let mut tp = 0usize;
    let mut fp = 0usize;
    // 2 × Σ over (member, nonmember) pairs of [member above] + ½[tie].
    let mut twice_wins: u128 = 0;
    let mut i = 0;
    while i < labelled.len() {
        let threshold = labelled[i].0;
        let (mut tie_p, mut tie_n) = (0usize, 0usize);
        while i < labelled.len() && labelled[i].0 == threshold {
            if labelled[i].1 {
                tie_p += 1;
            } else {
                tie_n += 1;
            }
            i += 1;
        }
        // Members in this group beat every nonmember not yet passed.
        let below_n = negatives - fp - tie_n;
        twice_wins += 2 * tie_p as u128 * below_n as u128 + tie_p as u128 * tie_n as u128;
        tp += tie_p;
        fp += tie_n;
        roc.push(RocPoint {
            fpr: fp as f64 / n,
            tpr: tp as f64 / p,
            threshold,
        });
    }
    let auc = twice_wins as f64 / (2.0 * positives as f64 * negatives as f64);
    let tpr_at_fpr = REPORTED_FPRS
        .iter()
        .map(|&alpha| TprAtFpr {
            fpr: alpha,
            tpr: tpr_at(&roc, alpha),
        })
        .collect();
    Ok(EvalReport {
        attack: scores.attack.clone(),
        space: scores.space.clone(),
        auc,
        tpr_at_fpr,
        members: positives,
        nonmembers: negatives,
        roc,
    })
}

fn tpr_at(roc: &[RocPoint], alpha: f64) -> f64 {
    roc.iter()
        .filter(|pt| pt.fpr <= alpha)
        .map(|pt| pt.tpr)
        .fold(0.0, f64::max)
}
