use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::relgraph::{ColumnValues, DatabaseInstance, RelationalSchema, TableData};

use super::EvalError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub one_way: Option<f64>,
    pub cardinality: Option<f64>,
    /// Hop distance → mean pair score. Hops without eligible pairs are absent.
    pub hops: BTreeMap<usize, f64>,
    pub avg_hop: Option<f64>,
    /// Per-column, per-relation and per-pair scores.
    pub detail: BTreeMap<String, f64>,
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
}

/// `1 − sup |F_a − F_b|` between two empirical CDFs.
pub fn ks_complement(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 1.0 } else { 0.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut worst = 0.0f64;
    while i < n || j < m {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        worst = worst.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    1.0 - worst
}

/// `1 − ½ Σ_c |p_a(c) − p_b(c)|` over the union of categories.
pub fn tv_complement<T: Ord>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 1.0 } else { 0.0 };
    }
    let mut counts: BTreeMap<&T, (usize, usize)> = BTreeMap::new();
    for x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for x in b {
        counts.entry(x).or_default().1 += 1;
    }
    let (n, m) = (a.len() as f64, b.len() as f64);
    let tv: f64 = counts
        .values()
        .map(|&(ca, cb)| (ca as f64 / n - cb as f64 / m).abs())
        .sum();
    1.0 - 0.5 * tv
}

/// Arithmetic mean of per-hop scores.
pub fn avg_hop(scores: &[f64]) -> Result<f64, EvalError> {
    if scores.is_empty() {
        return Err(EvalError::NoHopScores);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Scores plus the notes gathered while computing them.
#[derive(Clone, Debug, Default)]
pub struct Scored {
    pub score: Option<f64>,
    pub detail: BTreeMap<String, f64>,
    pub skipped: Vec<String>,
    pub warnings: Vec<String>,
}

impl Scored {
    fn finish(mut self, parts: &[f64]) -> Self {
        if !parts.is_empty() {
            self.score = Some(parts.iter().sum::<f64>() / parts.len() as f64);
        }
        self
    }
}

fn compare_columns(real: &ColumnValues, synth: &ColumnValues) -> Option<f64> {
    match (real, synth) {
        (ColumnValues::Numeric(a), ColumnValues::Numeric(b)) => {
            let a: Vec<f64> = a.iter().flatten().copied().collect();
            let b: Vec<f64> = b.iter().flatten().copied().collect();
            (!a.is_empty() && !b.is_empty()).then(|| ks_complement(&a, &b))
        }
        (ColumnValues::Categorical(a), ColumnValues::Categorical(b)) => {
            let a: Vec<&str> = a.iter().flatten().map(String::as_str).collect();
            let b: Vec<&str> = b.iter().flatten().map(String::as_str).collect();
            (!a.is_empty() && !b.is_empty()).then(|| tv_complement(&a, &b))
        }
        _ => None,
    }
}

/// Mean marginal fidelity over every non-key column of every table.
pub fn one_way(schema: &RelationalSchema, real: &DatabaseInstance, synth: &DatabaseInstance) -> Scored {
    let mut out = Scored::default();
    let mut parts = Vec::new();
    for ((spec, r), s) in schema.tables().iter().zip(&real.tables).zip(&synth.tables) {
        if r.row_count() == 0 || s.row_count() == 0 {
            out.warnings
                .push(format!("table {} is empty in one database; its columns are skipped", spec.name));
            continue;
        }
        for (col, (rc, sc)) in spec.feature_columns().zip(r.features.iter().zip(&s.features)) {
            let key = format!("one_way.{}.{}", spec.name, col.name);
            match compare_columns(rc, sc) {
                Some(v) => {
                    out.detail.insert(key, v);
                    parts.push(v);
                }
                None => {
                    out.warnings.push(format!("{key}: no observed values"));
                    out.skipped.push(key);
                }
            }
        }
    }
    out.finish(&parts)
}

/// Children per parent, parents without children included.
fn group_sizes(parent: &TableData, child: &TableData, fk: usize) -> Vec<f64> {
    let index = parent.key_index();
    let mut counts = vec![0.0; parent.row_count()];
    for v in child.foreign_keys[fk].iter().flatten() {
        if let Some(&p) = index.get(v.as_str()) {
            counts[p] += 1.0;
        }
    }
    counts
}

/// Mean KS complement of per-relation group-size distributions.
pub fn cardinality_fidelity(
    schema: &RelationalSchema,
    real: &DatabaseInstance,
    synth: &DatabaseInstance,
) -> Result<Scored, EvalError> {
    let mut out = Scored::default();
    let mut parts = Vec::new();
    for (ci, spec) in schema.tables().iter().enumerate() {
        for (fi, fk) in spec.foreign_keys.iter().enumerate() {
            let pi = schema.table_index(&fk.references).expect("validated schema");
            let key = format!("cardinality.{}.{}", spec.name, fk.column);
            let real_sizes = group_sizes(&real.tables[pi], &real.tables[ci], fi);
            let synth_sizes = group_sizes(&synth.tables[pi], &synth.tables[ci], fi);
            let v = if synth_sizes.is_empty() || real_sizes.is_empty() {
                out.warnings.push(format!("{key}: relation has no parents in one database"));
                0.0
            } else {
                ks_complement(&real_sizes, &synth_sizes)
            };
            out.detail.insert(key, v);
            parts.push(v);
        }
    }
    if parts.is_empty() {
        return Err(EvalError::NoRelations);
    }
    Ok(out.finish(&parts))
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    if pairs.len() < 2 {
        return None;
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One side of a column pair: which table and which feature column.
#[derive(Clone, Copy)]
struct Side {
    table: usize,
    column: usize,
}

/// Row pairs `(left row, right row)` the pair is evaluated on.
fn pair_rows(db: &DatabaseInstance, join: Option<(usize, usize, usize)>, table: usize) -> Vec<(usize, usize)> {
    match join {
        None => (0..db.tables[table].row_count()).map(|r| (r, r)).collect(),
        Some((child, fk, parent)) => {
            let index: HashMap<&str, usize> = db.tables[parent].key_index();
            db.tables[child].foreign_keys[fk]
                .iter()
                .enumerate()
                .filter_map(|(r, v)| Some((r, *index.get(v.as_deref()?)?)))
                .collect()
        }
    }
}

enum PairOutcome {
    Score(f64),
    Skip(&'static str),
}

fn score_pair(
    real: &DatabaseInstance,
    synth: &DatabaseInstance,
    left: Side,
    right: Side,
    join: Option<(usize, usize, usize)>,
) -> PairOutcome {
    let rows = |db: &DatabaseInstance| pair_rows(db, join, left.table);
    fn col(db: &DatabaseInstance, s: Side) -> &ColumnValues {
        &db.tables[s.table].features[s.column]
    }
    match (col(real, left), col(real, right), col(synth, left), col(synth, right)) {
        (
            ColumnValues::Numeric(a),
            ColumnValues::Numeric(b),
            ColumnValues::Numeric(c),
            ColumnValues::Numeric(d),
        ) => {
            let collect = |x: &[Option<f64>], y: &[Option<f64>], rows: Vec<(usize, usize)>| -> Vec<(f64, f64)> {
                rows.into_iter().filter_map(|(i, j)| Some((x[i]?, y[j]?))).collect()
            };
            let pr = collect(a, b, rows(real));
            let ps = collect(c, d, rows(synth));
            match (pearson(&pr), pearson(&ps)) {
                (Some(x), Some(y)) => PairOutcome::Score(1.0 - (x - y).abs() / 2.0),
                _ => PairOutcome::Skip("zero variance or fewer than 2 joined rows"),
            }
        }
        (
            ColumnValues::Categorical(a),
            ColumnValues::Categorical(b),
            ColumnValues::Categorical(c),
            ColumnValues::Categorical(d),
        ) => {
            let collect = |x: &[Option<String>], y: &[Option<String>], rows: Vec<(usize, usize)>| -> Vec<(String, String)> {
                rows.into_iter()
                    .filter_map(|(i, j)| Some((x[i].clone()?, y[j].clone()?)))
                    .collect()
            };
            let pr = collect(a, b, rows(real));
            let ps = collect(c, d, rows(synth));
            if pr.is_empty() || ps.is_empty() {
                PairOutcome::Skip("no joined rows")
            } else {
                PairOutcome::Score(tv_complement(&pr, &ps))
            }
        }
        _ => PairOutcome::Skip("mixed column types"),
    }
}

/// Mean dependency-preservation score over column pairs at hop distance
/// `k`: pairs within one table for `k = 0`, pairs joined through one
/// foreign key for `k = 1`.
pub fn khop_correlation(
    schema: &RelationalSchema,
    real: &DatabaseInstance,
    synth: &DatabaseInstance,
    k: usize,
) -> Result<Scored, EvalError> {
    let mut out = Scored::default();
    let mut parts = Vec::new();
    let mut record = |out: &mut Scored, key: String, outcome: PairOutcome| match outcome {
        PairOutcome::Score(v) => {
            out.detail.insert(key, v);
            parts.push(v);
        }
        PairOutcome::Skip(why) => {
            if why != "mixed column types" {
                out.warnings.push(format!("{key}: skipped, {why}"));
            }
            out.skipped.push(key);
        }
    };
    match k {
        0 => {
            for (t, spec) in schema.tables().iter().enumerate() {
                let cols: Vec<_> = spec.feature_columns().map(|c| c.name.clone()).collect();
                for i in 0..cols.len() {
                    for j in i + 1..cols.len() {
                        let key = format!("hop0.{}.{}|{}", spec.name, cols[i], cols[j]);
                        let outcome = score_pair(
                            real,
                            synth,
                            Side { table: t, column: i },
                            Side { table: t, column: j },
                            None,
                        );
                        record(&mut out, key, outcome);
                    }
                }
            }
        }
        1 => {
            for (c, spec) in schema.tables().iter().enumerate() {
                for (f, fk) in spec.foreign_keys.iter().enumerate() {
                    let p = schema.table_index(&fk.references).expect("validated schema");
                    let parent = &schema.tables()[p];
                    for (i, ccol) in spec.feature_columns().enumerate() {
                        for (j, pcol) in parent.feature_columns().enumerate() {
                            let key = format!(
                                "hop1.{}.{}.{}|{}.{}",
                                spec.name, fk.column, ccol.name, parent.name, pcol.name
                            );
                            let outcome = score_pair(
                                real,
                                synth,
                                Side { table: c, column: i },
                                Side { table: p, column: j },
                                Some((c, f, p)),
                            );
                            record(&mut out, key, outcome);
                        }
                    }
                }
            }
        }
        other => return Err(EvalError::UnsupportedHop(other)),
    }
    Ok(out.finish(&parts))
}

/// One-way, cardinality, 0-hop, 1-hop and average-hop fidelity.
pub fn fidelity_report(
    schema: &RelationalSchema,
    real: &DatabaseInstance,
    synth: &DatabaseInstance,
) -> Result<FidelityReport, EvalError> {
    let mut report = FidelityReport::default();
    let absorb = |report: &mut FidelityReport, s: Scored| -> Option<f64> {
        report.detail.extend(s.detail);
        report.skipped.extend(s.skipped);
        report.warnings.extend(s.warnings);
        s.score
    };
    let s = one_way(schema, real, synth);
    report.one_way = absorb(&mut report, s);
    if schema.relations().next().is_some() {
        let s = cardinality_fidelity(schema, real, synth)?;
        report.cardinality = absorb(&mut report, s);
    }
    for k in [0, 1] {
        let s = khop_correlation(schema, real, synth, k)?;
        if let Some(v) = absorb(&mut report, s) {
            report.hops.insert(k, v);
        } else {
            report.warnings.push(format!("no eligible column pairs at hop {k}"));
        }
    }
    let hops: Vec<f64> = report.hops.values().copied().collect();
    report.avg_hop = avg_hop(&hops).ok();
    Ok(report)
}
