use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::schema::{ColumnKind, RelationalSchema, TableSpec};
use super::RelError;

/// Raw values of one non-key column; `None` marks a missing cell.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnValues {
    Numeric(Vec<Option<f64>>),
    Categorical(Vec<Option<String>>),
}

impl ColumnValues {
    pub fn len(&self) -> usize {
        match self {
            ColumnValues::Numeric(v) => v.len(),
            ColumnValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnValues::Numeric(_) => ColumnKind::Numeric,
            ColumnValues::Categorical(_) => ColumnKind::Categorical,
        }
    }

    fn empty(kind: ColumnKind) -> Self {
        match kind {
            ColumnKind::Numeric => ColumnValues::Numeric(Vec::new()),
            ColumnKind::Categorical => ColumnValues::Categorical(Vec::new()),
        }
    }

    fn render(&self, row: usize) -> String {
        match self {
            ColumnValues::Numeric(v) => v[row].map(|x| x.to_string()).unwrap_or_default(),
            ColumnValues::Categorical(v) => v[row].clone().unwrap_or_default(),
        }
    }
}

/// Rows of one table, stored column-wise.
///
/// `foreign_keys` follows the table's FK declaration order and `features`
/// follows [`TableSpec::feature_columns`].
#[derive(Clone, Debug, PartialEq)]
pub struct TableData {
    pub name: String,
    pub primary_keys: Vec<String>,
    pub foreign_keys: Vec<Vec<Option<String>>>,
    pub features: Vec<ColumnValues>,
}

impl TableData {
    pub fn empty(spec: &TableSpec) -> Self {
        Self {
            name: spec.name.clone(),
            primary_keys: Vec::new(),
            foreign_keys: vec![Vec::new(); spec.foreign_keys.len()],
            features: spec.feature_columns().map(|c| ColumnValues::empty(c.kind)).collect(),
        }
    }

    pub fn row_count(&self) -> usize {
        self.primary_keys.len()
    }

    /// Position of the row holding primary key `key`.
    pub fn key_index(&self) -> HashMap<&str, usize> {
        self.primary_keys
            .iter()
            .enumerate()
            .map(|(i, k)| (k.as_str(), i))
            .collect()
    }
}

/// One table per schema table, in schema order.
#[derive(Clone, Debug, PartialEq)]
pub struct DatabaseInstance {
    pub tables: Vec<TableData>,
}

impl DatabaseInstance {
    pub fn empty(schema: &RelationalSchema) -> Self {
        Self {
            tables: schema.tables().iter().map(TableData::empty).collect(),
        }
    }

    pub fn table(&self, name: &str) -> Option<&TableData> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn total_rows(&self) -> usize {
        self.tables.iter().map(TableData::row_count).sum()
    }

    /// Reads `<dir>/<table>.csv` for every table, then validates keys.
    pub fn load_dir(schema: &RelationalSchema, dir: &Path) -> Result<Self, RelError> {
        Self::load_dir_with(schema, dir, |_| {})
    }

    /// Like [`load_dir`](Self::load_dir), reporting each path before it is opened.
    pub fn load_dir_with(
        schema: &RelationalSchema,
        dir: &Path,
        mut on_open: impl FnMut(&Path),
    ) -> Result<Self, RelError> {
        let mut tables = Vec::with_capacity(schema.tables().len());
        for spec in schema.tables() {
            let path = dir.join(format!("{}.csv", spec.name));
            on_open(&path);
            let file = File::open(&path).map_err(|e| RelError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            tables.push(read_table_csv(file, spec)?);
        }
        let db = Self { tables };
        db.validate(schema)?;
        Ok(db)
    }

    pub fn write_dir(&self, schema: &RelationalSchema, dir: &Path) -> Result<(), RelError> {
        std::fs::create_dir_all(dir).map_err(|e| RelError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        for (spec, table) in schema.tables().iter().zip(&self.tables) {
            let path = dir.join(format!("{}.csv", spec.name));
            let file = File::create(&path).map_err(|e| RelError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            write_table_csv(file, spec, table)?;
        }
        Ok(())
    }

    /// Checks table alignment, unique primary keys and FK resolution.
    pub fn validate(&self, schema: &RelationalSchema) -> Result<(), RelError> {
        if self.tables.len() != schema.tables().len() {
            return Err(RelError::Data(format!(
                "database has {} tables, schema declares {}",
                self.tables.len(),
                schema.tables().len()
            )));
        }
        for (spec, table) in schema.tables().iter().zip(&self.tables) {
            if spec.name != table.name {
                return Err(RelError::Data(format!(
                    "table {} found where schema expects {}",
                    table.name, spec.name
                )));
            }
            let n = table.row_count();
            let aligned = table.foreign_keys.len() == spec.foreign_keys.len()
                && table.foreign_keys.iter().all(|c| c.len() == n)
                && table.features.len() == spec.feature_count()
                && table.features.iter().all(|c| c.len() == n)
                && table
                    .features
                    .iter()
                    .zip(spec.feature_columns())
                    .all(|(v, c)| v.kind() == c.kind);
            if !aligned {
                return Err(RelError::Data(format!(
                    "table {} columns are not aligned with its schema",
                    spec.name
                )));
            }
            let mut seen = HashSet::with_capacity(n);
            for (row, key) in table.primary_keys.iter().enumerate() {
                if !seen.insert(key.as_str()) {
                    return Err(RelError::DuplicateKey {
                        table: spec.name.clone(),
                        row,
                        key: key.clone(),
                    });
                }
            }
        }
        let indexes: Vec<HashMap<&str, usize>> =
            self.tables.iter().map(TableData::key_index).collect();
        for (spec, table) in schema.tables().iter().zip(&self.tables) {
            for (fk, values) in spec.foreign_keys.iter().zip(&table.foreign_keys) {
                let parent = schema
                    .table_index(&fk.references)
                    .expect("validated schema");
                for (row, value) in values.iter().enumerate() {
                    if let Some(v) = value {
                        if !indexes[parent].contains_key(v.as_str()) {
                            return Err(RelError::DanglingForeignKey {
                                table: spec.name.clone(),
                                row,
                                column: fk.column.clone(),
                                value: v.clone(),
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parses one CSV table. The header must name every schema column exactly
/// once (any order). Empty cells are missing values; the primary key may
/// not be missing.
pub fn read_table_csv<R: Read>(reader: R, spec: &TableSpec) -> Result<TableData, RelError> {
    let csv_err = |e: csv::Error| RelError::Csv {
        table: spec.name.clone(),
        message: e.to_string(),
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let mut position = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        if position.insert(h.to_string(), i).is_some() {
            return Err(RelError::Csv {
                table: spec.name.clone(),
                message: format!("header repeats column {h}"),
            });
        }
    }
    for c in &spec.columns {
        if !position.contains_key(&c.name) {
            return Err(RelError::Csv {
                table: spec.name.clone(),
                message: format!("header lacks column {}", c.name),
            });
        }
    }
    if position.len() != spec.columns.len() {
        let extra: Vec<&str> = header
            .iter()
            .filter(|h| spec.columns.iter().all(|c| c.name != *h))
            .collect();
        return Err(RelError::Csv {
            table: spec.name.clone(),
            message: format!("header has undeclared columns {}", extra.join(", ")),
        });
    }

    let pk_at = position[&spec.primary_key];
    let fk_at: Vec<usize> = spec.foreign_keys.iter().map(|fk| position[&fk.column]).collect();
    let feat_specs: Vec<_> = spec.feature_columns().collect();
    let feat_at: Vec<usize> = feat_specs.iter().map(|c| position[&c.name]).collect();

    let mut table = TableData::empty(spec);
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let pk = record[pk_at].trim();
        if pk.is_empty() {
            return Err(RelError::MissingKey {
                table: spec.name.clone(),
                row,
            });
        }
        table.primary_keys.push(pk.to_string());
        for (slot, &at) in table.foreign_keys.iter_mut().zip(&fk_at) {
            let v = record[at].trim();
            slot.push((!v.is_empty()).then(|| v.to_string()));
        }
        for ((values, &at), col) in table.features.iter_mut().zip(&feat_at).zip(&feat_specs) {
            let raw = record[at].trim();
            match values {
                ColumnValues::Numeric(v) => {
                    if raw.is_empty() {
                        v.push(None);
                    } else {
                        let x: f64 = raw.parse().map_err(|_| RelError::Parse {
                            table: spec.name.clone(),
                            row,
                            column: col.name.clone(),
                            value: raw.to_string(),
                        })?;
                        if !x.is_finite() {
                            return Err(RelError::Parse {
                                table: spec.name.clone(),
                                row,
                                column: col.name.clone(),
                                value: raw.to_string(),
                            });
                        }
                        v.push(Some(x));
                    }
                }
                ColumnValues::Categorical(v) => {
                    v.push((!raw.is_empty()).then(|| raw.to_string()));
                }
            }
        }
    }
    Ok(table)
}

/// Writes a table with its columns in schema declaration order.
pub fn write_table_csv<W: Write>(
    writer: W,
    spec: &TableSpec,
    table: &TableData,
) -> Result<(), RelError> {
    let csv_err = |e: csv::Error| RelError::Csv {
        table: spec.name.clone(),
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(spec.columns.iter().map(|c| c.name.as_str()))
        .map_err(csv_err)?;
    let feature_pos: HashMap<&str, usize> = spec
        .feature_columns()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();
    for row in 0..table.row_count() {
        let record: Vec<String> = spec
            .columns
            .iter()
            .map(|c| {
                if c.name == spec.primary_key {
                    table.primary_keys[row].clone()
                } else if let Some(k) = spec.foreign_keys.iter().position(|f| f.column == c.name) {
                    table.foreign_keys[k][row].clone().unwrap_or_default()
                } else {
                    table.features[feature_pos[c.name.as_str()]].render(row)
                }
            })
            .collect();
        w.write_record(&record).map_err(csv_err)?;
    }
    w.flush().map_err(|e| RelError::Csv {
        table: spec.name.clone(),
        message: e.to_string(),
    })
}
