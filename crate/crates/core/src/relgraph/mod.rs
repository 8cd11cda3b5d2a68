//! Relational schemas and databases, their heterogeneous-graph form, and
//! the split of that graph into disjoint per-user entity subgraphs.

mod data;
mod entity;
mod graph;
mod schema;

use thiserror::Error;

pub use data::{read_table_csv, write_table_csv, ColumnValues, DatabaseInstance, TableData};
pub use entity::{
    connected_membership, decompose_entities, membership_consistency, Decomposition,
    EntitySubgraph, Membership, NodeRef,
};
pub use graph::{build_graph, EdgeType, HeteroGraph, NodeType};
pub use schema::{ColumnKind, ColumnSpec, ForeignKey, RelationalSchema, TableSpec};

#[derive(Debug, Error)]
pub enum RelError {
    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("table {table}: {message}")]
    Csv { table: String, message: String },
    #[error("table {table}, row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        table: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("table {table}, row {row}: missing primary key")]
    MissingKey { table: String, row: usize },
    #[error("table {table}, row {row}: duplicate primary key {key:?}")]
    DuplicateKey {
        table: String,
        row: usize,
        key: String,
    },
    #[error("table {table}, row {row}: foreign key {column}={value:?} references no row")]
    DanglingForeignKey {
        table: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("entangled entities: roots {first:?} and {second:?} share a connected component")]
    EntangledEntities { first: String, second: String },
    #[error(
        "theorem violated: connected nodes {first} ({first_label}) and {other} ({other_label}) carry different membership"
    )]
    MixedMembership {
        first: String,
        first_label: Membership,
        other: String,
        other_label: Membership,
    },
    #[error("{0}")]
    Data(String),
}
