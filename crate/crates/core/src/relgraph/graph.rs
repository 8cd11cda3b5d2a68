use crate::diffcore::Tensor;

use super::data::DatabaseInstance;
use super::schema::RelationalSchema;
use super::RelError;

/// Nodes of one table: primary-key labels in file order and their
/// encoded feature rows.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeType {
    pub name: String,
    pub labels: Vec<String>,
    pub features: Tensor,
}

impl NodeType {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// One FK relation. Edges point from the row holding the FK (`src`) to
/// the referenced row (`dst`).
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeType {
    pub src: usize,
    pub relation: String,
    pub dst: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeteroGraph {
    schema: RelationalSchema,
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
}

impl HeteroGraph {
    pub fn schema(&self) -> &RelationalSchema {
        &self.schema
    }

    pub fn node_types(&self) -> &[NodeType] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn node_type(&self, index: usize) -> &NodeType {
        &self.node_types[index]
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.node_types.iter().position(|t| t.name == name)
    }

    pub fn root_type(&self) -> usize {
        self.schema.root_index()
    }

    pub fn node_count(&self) -> usize {
        self.node_types.iter().map(NodeType::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_types.iter().map(|e| e.edges.len()).sum()
    }

    /// Undirected adjacency in CSR form over global node ids; the global
    /// id of (type t, index i) is `offsets[t] + i`.
    pub(crate) fn undirected_csr(&self) -> Csr {
        let mut offsets = Vec::with_capacity(self.node_types.len() + 1);
        let mut acc = 0;
        for t in &self.node_types {
            offsets.push(acc);
            acc += t.len();
        }
        offsets.push(acc);
        let mut degree = vec![0usize; acc + 1];
        for et in &self.edge_types {
            for &(s, d) in &et.edges {
                degree[offsets[et.src] + s] += 1;
                degree[offsets[et.dst] + d] += 1;
            }
        }
        let mut start = vec![0usize; acc + 1];
        for v in 0..acc {
            start[v + 1] = start[v] + degree[v];
        }
        let mut fill = start.clone();
        let mut targets = vec![0usize; start[acc]];
        for et in &self.edge_types {
            for &(s, d) in &et.edges {
                let (gs, gd) = (offsets[et.src] + s, offsets[et.dst] + d);
                targets[fill[gs]] = gd;
                fill[gs] += 1;
                targets[fill[gd]] = gs;
                fill[gd] += 1;
            }
        }
        Csr {
            offsets,
            start,
            targets,
        }
    }
}

pub(crate) struct Csr {
    pub offsets: Vec<usize>,
    pub start: Vec<usize>,
    pub targets: Vec<usize>,
}

impl Csr {
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.start[v]..self.start[v + 1]]
    }

    /// (type, index) of a global id.
    pub fn locate(&self, v: usize) -> (usize, usize) {
        let t = self.offsets.partition_point(|&o| o <= v) - 1;
        (t, v - self.offsets[t])
    }
}

/// One node per row and one edge per non-missing FK reference.
///
/// `features[k]` holds the encoded rows of schema table `k`.
pub fn build_graph(
    schema: &RelationalSchema,
    db: &DatabaseInstance,
    features: &[Tensor],
) -> Result<HeteroGraph, RelError> {
    db.validate(schema)?;
    if features.len() != schema.tables().len() {
        return Err(RelError::Data(format!(
            "{} feature matrices for {} tables",
            features.len(),
            schema.tables().len()
        )));
    }
    let mut node_types = Vec::with_capacity(features.len());
    for ((spec, table), x) in schema.tables().iter().zip(&db.tables).zip(features) {
        if x.rows() != table.row_count() {
            return Err(RelError::Data(format!(
                "table {} has {} rows but {} feature rows",
                spec.name,
                table.row_count(),
                x.rows()
            )));
        }
        node_types.push(NodeType {
            name: spec.name.clone(),
            labels: table.primary_keys.clone(),
            features: x.clone(),
        });
    }

    let key_index: Vec<_> = db.tables.iter().map(|t| t.key_index()).collect();
    let mut edge_types = Vec::new();
    for (src, (spec, table)) in schema.tables().iter().zip(&db.tables).enumerate() {
        for (fk, values) in spec.foreign_keys.iter().zip(&table.foreign_keys) {
            let dst = schema.table_index(&fk.references).expect("validated schema");
            let mut edges = Vec::with_capacity(values.len());
            for (row, value) in values.iter().enumerate() {
                let Some(v) = value else { continue };
                let parent = *key_index[dst].get(v.as_str()).ok_or_else(|| {
                    RelError::DanglingForeignKey {
                        table: spec.name.clone(),
                        row,
                        column: fk.column.clone(),
                        value: v.clone(),
                    }
                })?;
                edges.push((row, parent));
            }
            edge_types.push(EdgeType {
                src,
                relation: fk.column.clone(),
                dst,
                edges,
            });
        }
    }
    Ok(HeteroGraph {
        schema: schema.clone(),
        node_types,
        edge_types,
    })
}
