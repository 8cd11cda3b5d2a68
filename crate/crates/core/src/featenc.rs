//! Feature encodings fitted on synthetic data only and applied unchanged
//! to real and synthetic tables.
//!
//! Numeric columns are standardized with the synthetic mean and sample
//! (n − 1) standard deviation. Categorical columns map to their rank in
//! the lexicographically sorted synthetic category list, scaled into
//! [0, 1] by `max(1, |categories| − 1)`; an unseen category takes code
//! `|categories|` before scaling. Missing cells become 0 after scaling and
//! are counted in the [`IngestionReport`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::diffcore::Tensor;
use crate::relgraph::{ColumnValues, DatabaseInstance, RelError, RelationalSchema};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnEncoding {
    Numeric {
        mean: f64,
        std: f64,
        /// Set when the fitted deviation was zero or undefined and 1 was used.
        std_fallback: bool,
    },
    Categorical { categories: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnEncodingEntry {
    pub column: String,
    #[serde(flatten)]
    pub encoding: ColumnEncoding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEncoding {
    pub table: String,
    pub columns: Vec<ColumnEncodingEntry>,
}

/// Per-table, per-feature-column encodings in schema order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub tables: Vec<TableEncoding>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnIngestion {
    pub missing: usize,
    pub unseen_categories: usize,
}

/// Missing-value and unseen-category counts per `table.column`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestionReport {
    pub columns: BTreeMap<String, ColumnIngestion>,
}

impl IngestionReport {
    pub fn total_missing(&self) -> usize {
        self.columns.values().map(|c| c.missing).sum()
    }

    pub fn total_unseen(&self) -> usize {
        self.columns.values().map(|c| c.unseen_categories).sum()
    }
}

pub fn fit_encoding(
    schema: &RelationalSchema,
    synth: &DatabaseInstance,
) -> Result<EncodingSpec, RelError> {
    synth.validate(schema)?;
    let mut tables = Vec::with_capacity(schema.tables().len());
    for (spec, table) in schema.tables().iter().zip(&synth.tables) {
        let columns = spec
            .feature_columns()
            .zip(&table.features)
            .map(|(col, values)| ColumnEncodingEntry {
                column: col.name.clone(),
                encoding: fit_column(&spec.name, &col.name, values),
            })
            .collect();
        tables.push(TableEncoding {
            table: spec.name.clone(),
            columns,
        });
    }
    Ok(EncodingSpec { tables })
}

fn fit_column(table: &str, column: &str, values: &ColumnValues) -> ColumnEncoding {
    match values {
        ColumnValues::Numeric(v) => {
            let present: Vec<f64> = v.iter().flatten().copied().collect();
            let n = present.len();
            let mean = if n == 0 {
                0.0
            } else {
                present.iter().sum::<f64>() / n as f64
            };
            let std = if n < 2 {
                0.0
            } else {
                let ss: f64 = present.iter().map(|x| (x - mean) * (x - mean)).sum();
                (ss / (n - 1) as f64).sqrt()
            };
            if std > 0.0 && std.is_finite() {
                ColumnEncoding::Numeric {
                    mean,
                    std,
                    std_fallback: false,
                }
            } else {
                log::warn!("{table}.{column}: zero or undefined spread, scaling by 1");
                ColumnEncoding::Numeric {
                    mean,
                    std: 1.0,
                    std_fallback: true,
                }
            }
        }
        ColumnValues::Categorical(v) => {
            let categories: BTreeSet<&String> = v.iter().flatten().collect();
            ColumnEncoding::Categorical {
                categories: categories.into_iter().cloned().collect(),
            }
        }
    }
}

/// Encodes every table of `db`; returns one feature matrix per schema table.
pub fn apply_encoding(
    spec: &EncodingSpec,
    schema: &RelationalSchema,
    db: &DatabaseInstance,
) -> Result<(Vec<Tensor>, IngestionReport), RelError> {
    db.validate(schema)?;
    if spec.tables.len() != db.tables.len() {
        return Err(RelError::Data(format!(
            "encoding covers {} tables, database has {}",
            spec.tables.len(),
            db.tables.len()
        )));
    }
    let mut report = IngestionReport::default();
    let mut out = Vec::with_capacity(db.tables.len());
    for (enc, table) in spec.tables.iter().zip(&db.tables) {
        if enc.table != table.name || enc.columns.len() != table.features.len() {
            return Err(RelError::Data(format!(
                "encoding for {} does not match table {}",
                enc.table, table.name
            )));
        }
        let rows = table.row_count();
        let cols = enc.columns.len();
        let mut x = Tensor::zeros(rows, cols);
        for (c, (entry, values)) in enc.columns.iter().zip(&table.features).enumerate() {
            let stats = report
                .columns
                .entry(format!("{}.{}", table.name, entry.column))
                .or_default();
            match (&entry.encoding, values) {
                (ColumnEncoding::Numeric { mean, std, .. }, ColumnValues::Numeric(v)) => {
                    for (r, value) in v.iter().enumerate() {
                        match value {
                            Some(val) => x.set(r, c, (val - mean) / std),
                            None => stats.missing += 1,
                        }
                    }
                }
                (ColumnEncoding::Categorical { categories }, ColumnValues::Categorical(v)) => {
                    let code: HashMap<&str, usize> = categories
                        .iter()
                        .enumerate()
                        .map(|(i, s)| (s.as_str(), i))
                        .collect();
                    let denom = categories.len().saturating_sub(1).max(1) as f64;
                    for (r, value) in v.iter().enumerate() {
                        match value {
                            Some(s) => {
                                let k = match code.get(s.as_str()) {
                                    Some(&k) => k,
                                    None => {
                                        stats.unseen_categories += 1;
                                        categories.len()
                                    }
                                };
                                x.set(r, c, k as f64 / denom);
                            }
                            None => stats.missing += 1,
                        }
                    }
                }
                _ => {
                    return Err(RelError::Data(format!(
                        "{}.{}: encoding kind does not match column kind",
                        table.name, entry.column
                    )))
                }
            }
        }
        out.push(x);
    }
    Ok((out, report))
}
