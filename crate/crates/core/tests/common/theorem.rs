//! Random disjoint unions of a member database and a holdout database,
//! and an exhaustive check of every connected node subset.

use mtmia::diffcore::Tensor;
use mtmia::relgraph::{
    build_graph, connected_membership, decompose_entities, ColumnKind, ColumnSpec, ColumnValues,
    DatabaseInstance, ForeignKey, HeteroGraph, Membership, NodeRef, RelError, RelationalSchema,
    TableSpec,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const MAX_NODES: usize = 12;

/// customers (root) <- orders <- items, customers <- tickets.
pub fn schema() -> RelationalSchema {
    let table = |name: &str, parent: Option<(&str, &str)>| {
        let mut columns = vec![
            ColumnSpec { name: "id".into(), kind: ColumnKind::Categorical },
            ColumnSpec { name: "x".into(), kind: ColumnKind::Numeric },
        ];
        let mut foreign_keys = Vec::new();
        if let Some((col, target)) = parent {
            columns.push(ColumnSpec { name: col.into(), kind: ColumnKind::Categorical });
            foreign_keys.push(ForeignKey { column: col.into(), references: target.into() });
        }
        TableSpec { name: name.into(), columns, primary_key: "id".into(), foreign_keys }
    };
    RelationalSchema::new(
        vec![
            table("customers", None),
            table("orders", Some(("customer_id", "customers"))),
            table("items", Some(("order_id", "orders"))),
            table("tickets", Some(("customer_id", "customers"))),
        ],
        "customers",
    )
    .unwrap()
}

/// Parent table of each table (index), root has none.
pub const PARENT: [Option<usize>; 4] = [None, Some(0), Some(1), Some(0)];

/// Rows per table as (key, parent row index or None), plus the label of each row.
#[derive(Clone, Debug, Default)]
pub struct Union {
    pub rows: Vec<Vec<(String, Option<usize>)>>,
    pub labels: Vec<Vec<Membership>>,
}

impl Union {
    fn push_part(&mut self, rng: &mut ChaCha8Rng, prefix: &str, label: Membership) {
        let roots = rng.random_range(1..=2);
        for r in 0..roots {
            let c = self.add(0, format!("{prefix}c{r}"), None, label);
            for o in 0..rng.random_range(0..=2) {
                let order = self.add(1, format!("{prefix}c{r}o{o}"), Some(c), label);
                for i in 0..rng.random_range(0..=2) {
                    self.add(2, format!("{prefix}c{r}o{o}i{i}"), Some(order), label);
                }
            }
            if rng.random_bool(0.5) {
                self.add(3, format!("{prefix}c{r}t"), Some(c), label);
            }
        }
        // An orphan order belongs to no entity but still carries a label.
        if rng.random_bool(0.2) {
            self.add(1, format!("{prefix}orphan"), None, label);
        }
    }

    fn add(&mut self, t: usize, key: String, parent: Option<usize>, label: Membership) -> usize {
        self.rows[t].push((key, parent));
        self.labels[t].push(label);
        self.rows[t].len() - 1
    }

    pub fn node_count(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        loop {
            let mut u = Union {
                rows: vec![Vec::new(); 4],
                labels: vec![Vec::new(); 4],
            };
            u.push_part(rng, "m", Membership::Member);
            u.push_part(rng, "h", Membership::Holdout);
            if u.node_count() <= MAX_NODES {
                return u;
            }
        }
    }

    pub fn database(&self, schema: &RelationalSchema) -> DatabaseInstance {
        let mut db = DatabaseInstance::empty(schema);
        for (t, rows) in self.rows.iter().enumerate() {
            let table = &mut db.tables[t];
            table.primary_keys = rows.iter().map(|r| r.0.clone()).collect();
            table.features = vec![ColumnValues::Numeric(vec![Some(0.0); rows.len()])];
            if let Some(p) = PARENT[t] {
                table.foreign_keys[0] = rows
                    .iter()
                    .map(|r| r.1.map(|i| self.rows[p][i].0.clone()))
                    .collect();
            }
        }
        db
    }

    pub fn graph(&self, schema: &RelationalSchema) -> Arc<HeteroGraph> {
        let db = self.database(schema);
        let features: Vec<Tensor> = db.tables.iter().map(|t| Tensor::zeros(t.row_count(), 1)).collect();
        Arc::new(build_graph(schema, &db, &features).unwrap())
    }

    /// Re-points one holdout non-root row to a member parent row that is
    /// reachable from a member root.
    /// Returns false when no such pair exists.
    pub fn inject_cross_edge(&mut self, rng: &mut ChaCha8Rng) -> bool {
        let mut candidates = Vec::new();
        for t in 1..4 {
            let p = PARENT[t].unwrap();
            let member_parents: Vec<usize> = (0..self.rows[p].len())
                .filter(|&i| {
                    self.labels[p][i] == Membership::Member && !self.rows[p][i].0.ends_with("orphan")
                })
                .collect();
            if member_parents.is_empty() {
                continue;
            }
            for i in 0..self.rows[t].len() {
                if self.labels[t][i] == Membership::Holdout {
                    candidates.push((t, i, member_parents.clone()));
                }
            }
        }
        if candidates.is_empty() {
            return false;
        }
        let (t, i, parents) = &candidates[rng.random_range(0..candidates.len())];
        self.rows[*t][*i].1 = Some(parents[rng.random_range(0..parents.len())]);
        true
    }
}

/// Independent connectivity oracle: union-find over the induced edges.
fn connected_oracle(graph: &HeteroGraph, nodes: &[NodeRef]) -> bool {
    let pos = |n: NodeRef| nodes.iter().position(|&m| m == n);
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for et in graph.edge_types() {
        for &(s, d) in &et.edges {
            let a = pos(NodeRef { node_type: et.src, index: s });
            let b = pos(NodeRef { node_type: et.dst, index: d });
            if let (Some(a), Some(b)) = (a, b) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let r0 = find(&mut parent, 0);
    (0..nodes.len()).all(|i| find(&mut parent, i) == r0)
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SubsetTally {
    pub connected: usize,
    pub mixed: usize,
    pub oracle_disagreements: usize,
}

/// Checks every nonempty node subset of the graph.
pub fn check_all_subsets(graph: &HeteroGraph, labels: &[Vec<Membership>]) -> SubsetTally {
    let all: Vec<NodeRef> = graph
        .node_types()
        .iter()
        .enumerate()
        .flat_map(|(t, nt)| (0..nt.len()).map(move |i| NodeRef { node_type: t, index: i }))
        .collect();
    assert!(all.len() <= MAX_NODES);
    let mut tally = SubsetTally::default();
    for mask in 1u32..(1 << all.len()) {
        let nodes: Vec<NodeRef> = (0..all.len()).filter(|b| mask >> b & 1 == 1).map(|b| all[b]).collect();
        let oracle = connected_oracle(graph, &nodes);
        match connected_membership(graph, &nodes, labels) {
            Ok(_) => {
                tally.connected += 1;
                if !oracle {
                    tally.oracle_disagreements += 1;
                }
            }
            Err(RelError::MixedMembership { .. }) => {
                tally.connected += 1;
                tally.mixed += 1;
                if !oracle {
                    tally.oracle_disagreements += 1;
                }
            }
            Err(_) => {
                if oracle {
                    tally.oracle_disagreements += 1;
                }
            }
        }
    }
    tally
}

/// True when some entity of the decomposition reports mixed membership.
pub fn decomposition_detects_mixing(graph: Arc<HeteroGraph>, labels: &[Vec<Membership>]) -> bool {
    let d = decompose_entities(graph).unwrap();
    d.entities
        .iter()
        .any(|e| matches!(e.membership(labels), Err(RelError::MixedMembership { .. })))
}

/// Runs `trials` clean unions and `trials` unions with an injected cross
/// edge. Returns (clean mixed subsets, violations missed, connected subsets checked, oracle disagreements).
pub fn run_suite(rng: &mut ChaCha8Rng, trials: usize) -> (usize, usize, usize, usize) {
    let schema = schema();
    let (mut mixed, mut missed, mut checked, mut disagreements) = (0, 0, 0, 0);
    let mut done = 0;
    while done < trials {
        let mut u = Union::random(rng);
        let graph = u.graph(&schema);
        let t = check_all_subsets(&graph, &u.labels);
        mixed += t.mixed;
        checked += t.connected;
        disagreements += t.oracle_disagreements;
        let d = decompose_entities(Arc::clone(&graph)).unwrap();
        for e in &d.entities {
            if e.membership(&u.labels).is_err() {
                mixed += 1;
            }
        }
        if u.inject_cross_edge(rng) {
            let graph = u.graph(&schema);
            let t = check_all_subsets(&graph, &u.labels);
            disagreements += t.oracle_disagreements;
            if t.mixed == 0 || !decomposition_detects_mixing(graph, &u.labels) {
                missed += 1;
            }
        } else {
            continue;
        }
        done += 1;
    }
    (mixed, missed, checked, disagreements)
}
