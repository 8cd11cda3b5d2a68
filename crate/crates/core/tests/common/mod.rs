#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use mtmia::datagen::{gen_toy, ToyData, ToySpec};
use mtmia::featenc::{apply_encoding, fit_encoding, EncodingSpec};
use mtmia::relgraph::{
    build_graph, decompose_entities, DatabaseInstance, EntitySubgraph, Membership,
    RelationalSchema,
};

pub fn entities(
    schema: &RelationalSchema,
    spec: &EncodingSpec,
    db: &DatabaseInstance,
) -> Vec<EntitySubgraph> {
    let (features, _) = apply_encoding(spec, schema, db).unwrap();
    let graph = Arc::new(build_graph(schema, db, &features).unwrap());
    decompose_entities(graph).unwrap().entities
}

/// Encoded entity sets with the encoding fitted on the synthetic side.
pub struct Prepared {
    pub schema: RelationalSchema,
    pub train: Vec<EntitySubgraph>,
    pub holdout: Vec<EntitySubgraph>,
    pub synth: Vec<EntitySubgraph>,
}

impl Prepared {
    pub fn new(toy: &ToyData, synth_db: &DatabaseInstance) -> Self {
        let spec = fit_encoding(&toy.schema, synth_db).unwrap();
        Self {
            schema: toy.schema.clone(),
            train: entities(&toy.schema, &spec, &toy.train),
            holdout: entities(&toy.schema, &spec, &toy.holdout),
            synth: entities(&toy.schema, &spec, synth_db),
        }
    }

    pub fn queries(&self) -> Vec<EntitySubgraph> {
        self.train.iter().chain(&self.holdout).cloned().collect()
    }

    pub fn labels(&self) -> HashMap<String, Membership> {
        let mut out = HashMap::new();
        for e in &self.train {
            out.insert(e.id().to_string(), Membership::Member);
        }
        for e in &self.holdout {
            out.insert(e.id().to_string(), Membership::Holdout);
        }
        out
    }
}

pub fn small_toy(members: usize, nonmembers: usize, mc: usize, nc: usize, seed: u64) -> ToyData {
    gen_toy(&ToySpec {
        members,
        nonmembers,
        member_children: mc,
        nonmember_children: nc,
        seed,
        ..ToySpec::default()
    })
    .unwrap()
}

/// Brute-force Mann-Whitney AUC with ties counted as one half.
pub fn auc_oracle(pairs: &[(f64, bool)]) -> f64 {
    let pos: Vec<f64> = pairs.iter().filter(|p| p.1).map(|p| p.0).collect();
    let neg: Vec<f64> = pairs.iter().filter(|p| !p.1).map(|p| p.0).collect();
    let mut twice = 0u64;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                twice += 2;
            } else if p == n {
                twice += 1;
            }
        }
    }
    twice as f64 / (2 * pos.len() * neg.len()) as f64
}
pub mod theorem;
pub mod gradients;
pub mod metrics;
pub mod primitives;
