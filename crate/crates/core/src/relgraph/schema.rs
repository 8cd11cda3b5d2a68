use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::RelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForeignKey {
    pub column: String,
    pub references: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSpec {
    pub name: String,
    pub columns: Vec<ColumnSpec>,
    pub primary_key: String,
    #[serde(default)]
    pub foreign_keys: Vec<ForeignKey>,
}

impl TableSpec {
    pub fn is_key_column(&self, column: &str) -> bool {
        column == self.primary_key || self.foreign_keys.iter().any(|fk| fk.column == column)
    }

    /// Non-key columns in declaration order.
    pub fn feature_columns(&self) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(|c| !self.is_key_column(&c.name))
    }

    pub fn feature_count(&self) -> usize {
        self.feature_columns().count()
    }
}

/// Tables, their keys and the designated root (user) table.
///
/// Construct through [`RelationalSchema::new`] or
/// [`RelationalSchema::from_json_str`]; both validate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct RelationalSchema {
    tables: Vec<TableSpec>,
    root_table: String,
}

#[derive(Deserialize)]
struct RawSchema {
    tables: Vec<TableSpec>,
    root_table: String,
}

impl TryFrom<RawSchema> for RelationalSchema {
    type Error = RelError;

    fn try_from(raw: RawSchema) -> Result<Self, RelError> {
        RelationalSchema::new(raw.tables, raw.root_table)
    }
}

impl RelationalSchema {
    pub fn new(tables: Vec<TableSpec>, root_table: impl Into<String>) -> Result<Self, RelError> {
        let schema = Self {
            tables,
            root_table: root_table.into(),
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json_str(text: &str) -> Result<Self, RelError> {
        serde_json::from_str(text).map_err(|e| RelError::Schema(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn fingerprint(&self) -> String {
        let text = serde_json::to_string(self).expect("schema serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn tables(&self) -> &[TableSpec] {
        &self.tables
    }

    pub fn root_table(&self) -> &str {
        &self.root_table
    }

    pub fn table(&self, name: &str) -> Option<&TableSpec> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    pub fn root_index(&self) -> usize {
        self.table_index(&self.root_table)
            .expect("validated schema contains its root")
    }

    /// All FK links as (child table, column, parent table) in declaration order.
    pub fn relations(&self) -> impl Iterator<Item = (&TableSpec, &ForeignKey)> {
        self.tables
            .iter()
            .flat_map(|t| t.foreign_keys.iter().map(move |fk| (t, fk)))
    }

    fn validate(&self) -> Result<(), RelError> {
        let bad = |msg: String| Err(RelError::Schema(msg));
        if self.tables.is_empty() {
            return bad("schema declares no tables".into());
        }
        let mut names = HashSet::new();
        for t in &self.tables {
            if t.name.is_empty() {
                return bad("table with empty name".into());
            }
            if !names.insert(t.name.as_str()) {
                return bad(format!("duplicate table {}", t.name));
            }
            let mut cols = HashSet::new();
            for c in &t.columns {
                if c.name.is_empty() {
                    return bad(format!("table {} has a column with empty name", t.name));
                }
                if !cols.insert(c.name.as_str()) {
                    return bad(format!("duplicate column {}.{}", t.name, c.name));
                }
            }
            if !cols.contains(t.primary_key.as_str()) {
                return bad(format!(
                    "primary key {}.{} is not a declared column",
                    t.name, t.primary_key
                ));
            }
            let mut fk_cols = HashSet::new();
            for fk in &t.foreign_keys {
                if !cols.contains(fk.column.as_str()) {
                    return bad(format!(
                        "foreign key {}.{} is not a declared column",
                        t.name, fk.column
                    ));
                }
                if fk.column == t.primary_key {
                    return bad(format!(
                        "foreign key {}.{} doubles as the primary key",
                        t.name, fk.column
                    ));
                }
                if !fk_cols.insert(fk.column.as_str()) {
                    return bad(format!("column {}.{} declared as two foreign keys", t.name, fk.column));
                }
            }
        }
        for (t, fk) in self.relations() {
            if !names.contains(fk.references.as_str()) {
                return bad(format!(
                    "foreign key {}.{} references unknown table {}",
                    t.name, fk.column, fk.references
                ));
            }
        }
        if !names.contains(self.root_table.as_str()) {
            return bad(format!("root table {} is not declared", self.root_table));
        }

        let index: HashMap<&str, usize> = self
            .tables
            .iter()
            .enumerate()
            .map(|(i, t)| (t.name.as_str(), i))
            .collect();
        let mut adjacency = vec![Vec::new(); self.tables.len()];
        for (t, fk) in self.relations() {
            let (a, b) = (index[t.name.as_str()], index[fk.references.as_str()]);
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        let mut seen = BTreeSet::from([0usize]);
        let mut stack = vec![0usize];
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        if seen.len() != self.tables.len() {
            let missing: Vec<&str> = self
                .tables
                .iter()
                .enumerate()
                .filter(|(i, _)| !seen.contains(i))
                .map(|(_, t)| t.name.as_str())
                .collect();
            return bad(format!(
                "schema graph is disconnected; unreachable from {}: {}",
                self.tables[0].name,
                missing.join(", ")
            ));
        }
        Ok(())
    }
}
