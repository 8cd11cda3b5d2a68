//! User-level membership inference auditing for multi-table synthetic data.
//!
//! A relational database becomes a heterogeneous graph (one node type per
//! table, one edge per foreign-key reference) and is split into disjoint
//! per-user entity subgraphs. A graph encoder trained only on the
//! synthetic release embeds every entity, and a query entity scores by
//! its distance to the closest synthetic entity. Single-table baselines,
//! attack-success metrics and fidelity metrics sit alongside.

pub mod attacks;
pub mod datagen;
pub mod diffcore;
pub mod evalkit;
pub mod featenc;
pub mod hgnn;
pub mod pipeline;
pub mod relgraph;
