//! Score-set builders and brute-force metric oracles.

use std::collections::BTreeSet;

use mtmia::attacks::{AttackScoreSet, ScoredEntity};
use mtmia::relgraph::Membership;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn score_set(pairs: &[(f64, bool)]) -> AttackScoreSet {
    AttackScoreSet {
        attack: "oracle".into(),
        space: "raw".into(),
        entries: pairs
            .iter()
            .enumerate()
            .map(|(i, &(score, member))| ScoredEntity {
                id: format!("e{i}"),
                score,
                label: Some(if member { Membership::Member } else { Membership::Holdout }),
            })
            .collect(),
    }
}

/// Scores drawn from a handful of integer levels so ties are common;
/// both classes always present.
pub fn tie_laden(rng: &mut ChaCha8Rng) -> Vec<(f64, bool)> {
    let n = rng.random_range(2..60);
    let levels = rng.random_range(1..6);
    let mut pairs: Vec<(f64, bool)> = (0..n)
        .map(|_| (rng.random_range(0..levels) as f64, rng.random_bool(0.5)))
        .collect();
    pairs[0].1 = true;
    pairs[1].1 = false;
    pairs
}

/// `1 − max |F_a(x) − F_b(x)|` with the maximum taken over every sample point.
pub fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    let sup = a
        .iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max);
    1.0 - sup
}

pub fn tv_oracle(a: &[String], b: &[String]) -> f64 {
    let cats: BTreeSet<&String> = a.iter().chain(b).collect();
    let freq = |s: &[String], c: &String| s.iter().filter(|v| *v == c).count() as f64 / s.len() as f64;
    1.0 - cats.iter().map(|c| (freq(a, c) - freq(b, c)).abs()).sum::<f64>() / 2.0
}
