use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::diffcore::Tensor;
use crate::relgraph::EntitySubgraph;

use super::model::SchemaLayout;
use super::HgnnError;

/// Several entity subgraphs stacked into one disjoint graph with local
/// node numbering. Entity `k` is segment `k` everywhere.
pub(crate) struct Batch {
    pub entity_count: usize,
    pub features: Vec<Tensor>,
    pub node_count: Vec<usize>,
    /// Per layout relation: (source rows, destination rows).
    pub relation_edges: Vec<(Arc<[usize]>, Arc<[usize]>)>,
    /// Row of each entity's root inside the root type.
    pub root_rows: Arc<[usize]>,
    /// Per context type: pooled rows and their entity.
    pub pool: Vec<(Arc<[usize]>, Arc<[usize]>)>,
    pub parent_target: Tensor,
    /// Per neighbor type: summed raw features of the root's neighbors.
    pub context_targets: Vec<Tensor>,
}

impl Batch {
    pub fn build(layout: &SchemaLayout, entities: &[&EntitySubgraph]) -> Result<Self, HgnnError> {
        let types = layout.type_names.len();
        let mut rows: Vec<Vec<f64>> = vec![Vec::new(); types];
        let mut node_count = vec![0usize; types];
        let mut checked: Vec<*const crate::relgraph::HeteroGraph> = Vec::new();
        let mut src_rows: Vec<Vec<usize>> = vec![Vec::new(); layout.relations.len()];
        let mut dst_rows: Vec<Vec<usize>> = vec![Vec::new(); layout.relations.len()];
        let mut root_rows = Vec::with_capacity(entities.len());
        let mut pool_rows: Vec<Vec<usize>> = vec![Vec::new(); layout.context_types.len()];
        let mut pool_seg: Vec<Vec<usize>> = vec![Vec::new(); layout.context_types.len()];
        let root_dim = layout.input_dims[layout.root];
        let mut parent_target = Vec::with_capacity(entities.len() * root_dim);
        let mut context_targets: Vec<Vec<f64>> = vec![Vec::new(); layout.neighbor_types.len()];

        for (k, sub) in entities.iter().enumerate() {
            let graph = sub.graph();
            let ptr = Arc::as_ptr(graph);
            if !checked.contains(&ptr) {
                if graph.schema().fingerprint() != layout.fingerprint {
                    return Err(HgnnError::SchemaMismatch);
                }
                checked.push(ptr);
            }
            let mut maps = Vec::with_capacity(types);
            for t in 0..types {
                let x = &graph.node_type(t).features;
                if x.cols() != layout.input_dims[t] {
                    return Err(HgnnError::Config(format!(
                        "type {} has {} feature columns, encoder expects {}",
                        layout.type_names[t],
                        x.cols(),
                        layout.input_dims[t]
                    )));
                }
                let mut map = HashMap::with_capacity(sub.nodes_of(t).len());
                for &i in sub.nodes_of(t) {
                    map.insert(i, node_count[t]);
                    rows[t].extend_from_slice(x.row(i));
                    node_count[t] += 1;
                }
                maps.push(map);
            }
            let root = sub.root();
            root_rows.push(maps[root.node_type][&root.index]);
            parent_target.extend_from_slice(sub.root_features());

            for (r, rel) in layout.relations.iter().enumerate() {
                for &(s, d) in sub.edges_of(rel.edge_type) {
                    let (s, d) = if rel.reversed { (d, s) } else { (s, d) };
                    src_rows[r].push(maps[rel.src][&s]);
                    dst_rows[r].push(maps[rel.dst][&d]);
                }
            }
            for (slot, &t) in layout.context_types.iter().enumerate() {
                for &i in sub.nodes_of(t) {
                    if t == root.node_type && i == root.index {
                        continue;
                    }
                    pool_rows[slot].push(maps[t][&i]);
                    pool_seg[slot].push(k);
                }
            }

            let mut neighbors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); types];
            for rel in layout.relations.iter().filter(|r| !r.reversed) {
                for &(s, d) in sub.edges_of(rel.edge_type) {
                    if rel.dst == root.node_type && d == root.index {
                        neighbors[rel.src].insert(s);
                    }
                    if rel.src == root.node_type && s == root.index {
                        neighbors[rel.dst].insert(d);
                    }
                }
            }
            for (slot, &t) in layout.neighbor_types.iter().enumerate() {
                let x = &graph.node_type(t).features;
                let mut sum = vec![0.0; layout.input_dims[t]];
                for &j in &neighbors[t] {
                    for (acc, v) in sum.iter_mut().zip(x.row(j)) {
                        *acc += v;
                    }
                }
                context_targets[slot].extend(sum);
            }
        }

        let b = entities.len();
        let features = rows
            .into_iter()
            .enumerate()
            .map(|(t, data)| Tensor::from_vec(node_count[t], layout.input_dims[t], data))
            .collect::<Result<Vec<_>, _>>()?;
        let context_targets = context_targets
            .into_iter()
            .zip(&layout.neighbor_types)
            .map(|(data, &t)| Tensor::from_vec(b, layout.input_dims[t], data))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            entity_count: b,
            features,
            node_count,
            relation_edges: src_rows
                .into_iter()
                .zip(dst_rows)
                .map(|(s, d)| (Arc::from(s), Arc::from(d)))
                .collect(),
            root_rows: Arc::from(root_rows),
            pool: pool_rows
                .into_iter()
                .zip(pool_seg)
                .map(|(r, s)| (Arc::from(r), Arc::from(s)))
                .collect(),
            parent_target: Tensor::from_vec(b, root_dim, parent_target)?,
            context_targets,
        })
    }
}
