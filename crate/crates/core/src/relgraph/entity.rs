use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::graph::HeteroGraph;
use super::RelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub node_type: usize,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Member,
    Holdout,
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::Member => f.write_str("member"),
            Membership::Holdout => f.write_str("holdout"),
        }
    }
}

/// A root node plus every node transitively connected to it.
#[derive(Clone, Debug)]
pub struct EntitySubgraph {
    graph: Arc<HeteroGraph>,
    root: NodeRef,
    nodes: Vec<Vec<usize>>,
    edges: Vec<Vec<(usize, usize)>>,
}

impl EntitySubgraph {
    pub fn graph(&self) -> &Arc<HeteroGraph> {
        &self.graph
    }

    pub fn root(&self) -> NodeRef {
        self.root
    }

    /// Primary-key label of the root row.
    pub fn id(&self) -> &str {
        &self.graph.node_type(self.root.node_type).labels[self.root.index]
    }

    /// Sorted source-graph indices of this entity's nodes of one type.
    pub fn nodes_of(&self, node_type: usize) -> &[usize] {
        &self.nodes[node_type]
    }

    /// Induced edges of one edge type, in source-graph indices.
    pub fn edges_of(&self, edge_type: usize) -> &[(usize, usize)] {
        &self.edges[edge_type]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Every node, ordered by (type name, index).
    pub fn node_refs(&self) -> Vec<NodeRef> {
        let mut types: Vec<usize> = (0..self.nodes.len()).collect();
        types.sort_by(|&a, &b| {
            self.graph.node_type(a).name.cmp(&self.graph.node_type(b).name)
        });
        types
            .into_iter()
            .flat_map(|t| self.nodes[t].iter().map(move |&i| NodeRef { node_type: t, index: i }))
            .collect()
    }

    pub fn root_features(&self) -> &[f64] {
        self.graph
            .node_type(self.root.node_type)
            .features
            .row(self.root.index)
    }

    /// Copy of this entity with the node order of each type permuted.
    /// Only node iteration order changes; the entity is the same set.
    pub fn with_node_order(&self, node_type: usize, order: Vec<usize>) -> Self {
        let mut out = self.clone();
        out.nodes[node_type] = order;
        out
    }

    /// Common label of every node; see [`membership_consistency`].
    pub fn membership(&self, labels: &[Vec<Membership>]) -> Result<Membership, RelError> {
        membership_consistency(self, labels)
    }
}

/// Result of splitting a graph into per-root entities.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub entities: Vec<EntitySubgraph>,
    /// Nodes reachable from no root; they belong to no entity and are dropped.
    pub unreachable: usize,
}

/// One subgraph per root-type node, each the connected component of its
/// root. Fails when two roots share a component.
pub fn decompose_entities(graph: Arc<HeteroGraph>) -> Result<Decomposition, RelError> {
    const FREE: usize = usize::MAX;
    let csr = graph.undirected_csr();
    let total = graph.node_count();
    let root_type = graph.root_type();
    let root_count = graph.node_type(root_type).len();
    let type_count = graph.node_types().len();

    let mut owner = vec![FREE; total];
    let mut members: Vec<Vec<Vec<usize>>> = Vec::with_capacity(root_count);
    let mut queue = VecDeque::new();
    for r in 0..root_count {
        let g = csr.offsets[root_type] + r;
        if owner[g] != FREE {
            return Err(entangled(&graph, root_type, owner[g], r));
        }
        owner[g] = r;
        let mut nodes = vec![Vec::new(); type_count];
        queue.push_back(g);
        while let Some(v) = queue.pop_front() {
            let (t, i) = csr.locate(v);
            nodes[t].push(i);
            for &w in csr.neighbors(v) {
                if owner[w] == FREE {
                    owner[w] = r;
                    queue.push_back(w);
                } else if owner[w] != r {
                    return Err(entangled(&graph, root_type, owner[w], r));
                }
            }
        }
        for list in &mut nodes {
            list.sort_unstable();
        }
        members.push(nodes);
    }

    let mut edges: Vec<Vec<Vec<(usize, usize)>>> =
        vec![vec![Vec::new(); graph.edge_types().len()]; root_count];
    for (e, et) in graph.edge_types().iter().enumerate() {
        for &(s, d) in &et.edges {
            let o = owner[csr.offsets[et.src] + s];
            if o != FREE {
                edges[o][e].push((s, d));
            }
        }
    }

    let unreachable = owner.iter().filter(|&&o| o == FREE).count();
    if unreachable > 0 {
        log::warn!("{unreachable} nodes are reachable from no root and were dropped");
    }
    let entities = members
        .into_iter()
        .zip(edges)
        .enumerate()
        .map(|(r, (nodes, edges))| EntitySubgraph {
            graph: Arc::clone(&graph),
            root: NodeRef {
                node_type: root_type,
                index: r,
            },
            nodes,
            edges,
        })
        .collect();
    Ok(Decomposition {
        entities,
        unreachable,
    })
}

fn entangled(graph: &HeteroGraph, root_type: usize, a: usize, b: usize) -> RelError {
    let labels = &graph.node_type(root_type).labels;
    RelError::EntangledEntities {
        first: labels[a].clone(),
        second: labels[b].clone(),
    }
}

/// The single membership label shared by every node of `sub`.
///
/// `labels[t][i]` labels node `i` of type `t`. Mixed labels mean the graph
/// was not a disjoint union of member and holdout parts.
pub fn membership_consistency(
    sub: &EntitySubgraph,
    labels: &[Vec<Membership>],
) -> Result<Membership, RelError> {
    uniform_label(sub.graph(), &sub.node_refs(), labels)
}

/// Membership of an arbitrary connected node set of `graph`.
pub fn connected_membership(
    graph: &HeteroGraph,
    nodes: &[NodeRef],
    labels: &[Vec<Membership>],
) -> Result<Membership, RelError> {
    if !is_connected(graph, nodes) {
        return Err(RelError::Data("node set is not connected".into()));
    }
    uniform_label(graph, nodes, labels)
}

fn uniform_label(
    graph: &HeteroGraph,
    nodes: &[NodeRef],
    labels: &[Vec<Membership>],
) -> Result<Membership, RelError> {
    let label_of = |n: &NodeRef| -> Result<Membership, RelError> {
        labels
            .get(n.node_type)
            .and_then(|l| l.get(n.index))
            .copied()
            .ok_or_else(|| {
                RelError::Data(format!(
                    "no membership label for {} node {}",
                    graph.node_type(n.node_type).name,
                    n.index
                ))
            })
    };
    let Some(first) = nodes.first() else {
        return Err(RelError::Data("empty node set has no membership".into()));
    };
    let expected = label_of(first)?;
    for n in &nodes[1..] {
        let got = label_of(n)?;
        if got != expected {
            let name = |r: &NodeRef| {
                let t = graph.node_type(r.node_type);
                format!("{}:{}", t.name, t.labels[r.index])
            };
            return Err(RelError::MixedMembership {
                first: name(first),
                first_label: expected,
                other: name(n),
                other_label: got,
            });
        }
    }
    Ok(expected)
}

fn is_connected(graph: &HeteroGraph, nodes: &[NodeRef]) -> bool {
    if nodes.is_empty() {
        return false;
    }
    let csr = graph.undirected_csr();
    let global: std::collections::HashSet<usize> = nodes
        .iter()
        .map(|n| csr.offsets[n.node_type] + n.index)
        .collect();
    let start = *global.iter().next().expect("nonempty");
    let mut seen = std::collections::HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in csr.neighbors(v) {
            if global.contains(&w) && seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == global.len()
}
