//! Toy benchmark data and mock synthetic-data generators.
//!
//! The toy database has a Customers table and a Transactions table whose
//! `customer_id` references Customers. Every feature is standard normal;
//! members and nonmembers differ only in how many transactions each
//! customer has.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::relgraph::{
    ColumnKind, ColumnSpec, ColumnValues, DatabaseInstance, ForeignKey, RelError,
    RelationalSchema, TableSpec,
};

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid toy spec: {0}")]
    InvalidSpec(String),
    #[error("noise scale must be finite and non-negative, got {0}")]
    InvalidNoise(f64),
    #[error(transparent)]
    Rel(#[from] RelError),
}

pub const CUSTOMERS: &str = "customers";
pub const TRANSACTIONS: &str = "transactions";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToySpec {
    pub members: usize,
    pub nonmembers: usize,
    pub member_children: usize,
    pub nonmember_children: usize,
    pub customer_dims: usize,
    pub transaction_dims: usize,
    pub seed: u64,
}

impl Default for ToySpec {
    fn default() -> Self {
        Self {
            members: 500,
            nonmembers: 500,
            member_children: 100,
            nonmember_children: 1,
            customer_dims: 5,
            transaction_dims: 5,
            seed: 0,
        }
    }
}

impl ToySpec {
    pub fn validate(&self) -> Result<(), DatagenError> {
        if self.members == 0 || self.nonmembers == 0 {
            return Err(DatagenError::InvalidSpec("entity counts must be at least 1".into()));
        }
        if self.customer_dims == 0 || self.transaction_dims == 0 {
            return Err(DatagenError::InvalidSpec("feature dimensions must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ToyData {
    pub schema: RelationalSchema,
    pub train: DatabaseInstance,
    pub holdout: DatabaseInstance,
}

pub fn toy_schema(customer_dims: usize, transaction_dims: usize) -> Result<RelationalSchema, DatagenError> {
    let numeric = |prefix: &'static str, d: usize| {
        (0..d).map(move |k| ColumnSpec {
            name: format!("{prefix}{k}"),
            kind: ColumnKind::Numeric,
        })
    };
    let key = |name: &str| ColumnSpec {
        name: name.to_string(),
        kind: ColumnKind::Categorical,
    };
    let customers = TableSpec {
        name: CUSTOMERS.into(),
        columns: std::iter::once(key("customer_id"))
            .chain(numeric("c", customer_dims))
            .collect(),
        primary_key: "customer_id".into(),
        foreign_keys: Vec::new(),
    };
    let transactions = TableSpec {
        name: TRANSACTIONS.into(),
        columns: [key("transaction_id"), key("customer_id")]
            .into_iter()
            .chain(numeric("t", transaction_dims))
            .collect(),
        primary_key: "transaction_id".into(),
        foreign_keys: vec![ForeignKey {
            column: "customer_id".into(),
            references: CUSTOMERS.into(),
        }],
    };
    Ok(RelationalSchema::new(vec![customers, transactions], CUSTOMERS)?)
}

fn normal_column(rng: &mut ChaCha8Rng, n: usize) -> Vec<Option<f64>> {
    (0..n).map(|_| Some(rng.sample(StandardNormal))).collect()
}

fn toy_split(
    schema: &RelationalSchema,
    rng: &mut ChaCha8Rng,
    prefix: &str,
    count: usize,
    children: usize,
    spec: &ToySpec,
) -> DatabaseInstance {
    let mut db = DatabaseInstance::empty(schema);
    let ids: Vec<String> = (0..count).map(|i| format!("{prefix}{i}")).collect();
    let rows: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..spec.customer_dims).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    let customers = &mut db.tables[0];
    customers.primary_keys = ids.clone();
    customers.features = (0..spec.customer_dims)
        .map(|k| ColumnValues::Numeric(rows.iter().map(|r| Some(r[k])).collect()))
        .collect();

    let tx = &mut db.tables[1];
    for id in &ids {
        for j in 0..children {
            tx.primary_keys.push(format!("{id}_t{j}"));
            tx.foreign_keys[0].push(Some(id.clone()));
        }
    }
    let n = tx.primary_keys.len();
    tx.features = (0..spec.transaction_dims)
        .map(|_| ColumnValues::Numeric(normal_column(rng, n)))
        .collect();
    db
}

/// Members go to `train`, nonmembers to `holdout`; keys never collide.
pub fn gen_toy(spec: &ToySpec) -> Result<ToyData, DatagenError> {
    spec.validate()?;
    let schema = toy_schema(spec.customer_dims, spec.transaction_dims)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let train = toy_split(&schema, &mut rng, "m", spec.members, spec.member_children, spec);
    let holdout = toy_split(&schema, &mut rng, "h", spec.nonmembers, spec.nonmember_children, spec);
    train.validate(&schema)?;
    holdout.validate(&schema)?;
    Ok(ToyData {
        schema,
        train,
        holdout,
    })
}

/// Same rows and links as `train` under fresh keys `<table>_s<row>`.
fn relabel(schema: &RelationalSchema, train: &DatabaseInstance) -> DatabaseInstance {
    let fresh: Vec<HashMap<&str, String>> = schema
        .tables()
        .iter()
        .zip(&train.tables)
        .map(|(spec, t)| {
            t.primary_keys
                .iter()
                .enumerate()
                .map(|(r, k)| (k.as_str(), format!("{}_s{r}", spec.name)))
                .collect()
        })
        .collect();
    let mut out = train.clone();
    for (ti, (spec, table)) in schema.tables().iter().zip(&mut out.tables).enumerate() {
        table.primary_keys = train.tables[ti]
            .primary_keys
            .iter()
            .map(|k| fresh[ti][k.as_str()].clone())
            .collect();
        for (fk, values) in spec.foreign_keys.iter().zip(&mut table.foreign_keys) {
            let target = schema.table_index(&fk.references).expect("validated schema");
            for v in values.iter_mut().flatten() {
                if let Some(k) = fresh[target].get(v.as_str()) {
                    *v = k.clone();
                }
            }
        }
    }
    out
}

/// Structural copy of `train` with fresh keys and `noise · N(0, 1)` added
/// to every present numeric cell. Noise 0 copies features exactly.
pub fn mock_memorizing_generator(
    train: &DatabaseInstance,
    schema: &RelationalSchema,
    noise: f64,
    seed: u64,
) -> Result<DatabaseInstance, DatagenError> {
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(DatagenError::InvalidNoise(noise));
    }
    train.validate(schema)?;
    let mut out = relabel(schema, train);
    if noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for table in &mut out.tables {
            for col in &mut table.features {
                if let ColumnValues::Numeric(v) = col {
                    for x in v.iter_mut().flatten() {
                        let z: f64 = rng.sample(StandardNormal);
                        *x += noise * z;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Same row counts and foreign-key links as `train`, every feature redrawn
/// independently: numeric columns from a normal with the column's mean
/// and sample deviation, categorical columns from the empirical category
/// frequencies. Missing cells stay missing.
pub fn mock_independent_generator(
    train: &DatabaseInstance,
    schema: &RelationalSchema,
    seed: u64,
) -> Result<DatabaseInstance, DatagenError> {
    train.validate(schema)?;
    let mut out = relabel(schema, train);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for table in &mut out.tables {
        for col in &mut table.features {
            match col {
                ColumnValues::Numeric(v) => {
                    let present: Vec<f64> = v.iter().flatten().copied().collect();
                    let n = present.len();
                    let mean = if n == 0 { 0.0 } else { present.iter().sum::<f64>() / n as f64 };
                    let sd = if n < 2 {
                        0.0
                    } else {
                        (present.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
                    };
                    for x in v.iter_mut().flatten() {
                        let z: f64 = rng.sample(StandardNormal);
                        *x = mean + sd * z;
                    }
                }
                ColumnValues::Categorical(v) => {
                    let pool: Vec<String> = v.iter().flatten().cloned().collect();
                    for x in v.iter_mut().flatten() {
                        *x = pool[rng.random_range(0..pool.len())].clone();
                    }
                }
            }
        }
    }
    Ok(out)
}
