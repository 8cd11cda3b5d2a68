mod common;

use common::metrics::{self, score_set, tie_laden};
use common::auc_oracle;
use mtmia::evalkit::{
    avg_hop, cardinality_fidelity, fidelity_report, khop_correlation, ks_complement, one_way,
    roc_and_auc, tv_complement, EvalError,
};
use mtmia::relgraph::{
    ColumnKind, ColumnSpec, ColumnValues, DatabaseInstance, ForeignKey, RelationalSchema,
    TableSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tprs(pairs: &[(f64, bool)]) -> [f64; 3] {
    let r = roc_and_auc(&score_set(pairs)).unwrap();
    [r.tpr_at(0.0).unwrap(), r.tpr_at(1e-3).unwrap(), r.tpr_at(1e-2).unwrap()]
}

#[test]
fn auc_matches_pairwise_oracle_on_tie_laden_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let pairs = tie_laden(&mut rng);
        let r = roc_and_auc(&score_set(&pairs)).unwrap();
        assert_eq!(r.auc, auc_oracle(&pairs), "{pairs:?}");
        let t = tprs(&pairs);
        assert!(t[0] <= t[1] && t[1] <= t[2]);
    }
}

#[test]
fn auc_matches_oracle_on_twenty_continuous_scores() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let pairs: Vec<(f64, bool)> = (0..20).map(|i| (rng.random::<f64>(), i % 2 == 0)).collect();
    assert_eq!(roc_and_auc(&score_set(&pairs)).unwrap().auc, auc_oracle(&pairs));
}

#[test]
fn tpr_at_zero_fpr_counts_members_above_every_nonmember() {
    let pairs = [
        (9.0, true),
        (8.0, true),
        (7.0, false),
        (7.0, true),
        (3.0, true),
        (1.0, false),
    ];
    let r = roc_and_auc(&score_set(&pairs)).unwrap();
    assert_eq!(r.tpr_at(0.0), Some(0.5));
    assert_eq!(r.members, 4);
    assert_eq!(r.nonmembers, 2);
}

#[test]
fn extreme_score_sets() {
    let sep = [(2.0, true), (1.5, true), (1.0, false)];
    let r = roc_and_auc(&score_set(&sep)).unwrap();
    assert_eq!((r.auc, r.tpr_at(0.0)), (1.0, Some(1.0)));
    let tied = [(0.3, true), (0.3, false), (0.3, true), (0.3, false)];
    let r = roc_and_auc(&score_set(&tied)).unwrap();
    assert_eq!((r.auc, r.tpr_at(0.0)), (0.5, Some(0.0)));
    assert!(matches!(
        roc_and_auc(&score_set(&[(1.0, true), (2.0, true)])),
        Err(EvalError::SingleClass { members: 2, nonmembers: 0 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn negated_scores_complement_auc(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = tie_laden(&mut rng);
        let neg: Vec<(f64, bool)> = pairs.iter().map(|&(s, m)| (-s, m)).collect();
        let a = roc_and_auc(&score_set(&pairs)).unwrap();
        let b = roc_and_auc(&score_set(&neg)).unwrap();
        // Both are k / 2pn; the numerators sum to 2pn exactly.
        let denom = 2.0 * a.members as f64 * a.nonmembers as f64;
        prop_assert_eq!((a.auc * denom).round() + (b.auc * denom).round(), denom);
        prop_assert!((a.auc + b.auc - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn increasing_transforms_and_shifts_keep_the_report(seed in any::<u64>(), shift in -50i32..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = tie_laden(&mut rng);
        let base = roc_and_auc(&score_set(&pairs)).unwrap();
        let cubed: Vec<(f64, bool)> = pairs.iter().map(|&(s, m)| (s.powi(3) + 2.0 * s, m)).collect();
        let shifted: Vec<(f64, bool)> = pairs.iter().map(|&(s, m)| (s + shift as f64, m)).collect();
        for other in [cubed, shifted] {
            let r = roc_and_auc(&score_set(&other)).unwrap();
            prop_assert_eq!(r.auc, base.auc);
            prop_assert_eq!(&r.tpr_at_fpr, &base.tpr_at_fpr);
        }
    }

    #[test]
    fn roc_is_monotone(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs = tie_laden(&mut rng);
        let r = roc_and_auc(&score_set(&pairs)).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.auc));
        for w in r.roc.windows(2) {
            prop_assert!(w[0].fpr <= w[1].fpr && w[0].tpr <= w[1].tpr);
            prop_assert!(w[0].threshold > w[1].threshold);
        }
        let last = r.roc.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
    }

    #[test]
    fn ks_matches_enumeration_and_is_symmetric(
        a in prop::collection::vec(-5i32..5, 1..30),
        b in prop::collection::vec(-5i32..5, 1..30),
    ) {
        let a: Vec<f64> = a.into_iter().map(|x| x as f64 * 0.5).collect();
        let b: Vec<f64> = b.into_iter().map(|x| x as f64 * 0.5).collect();
        let got = ks_complement(&a, &b);
        prop_assert!((got - metrics::ks_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert_eq!(got, ks_complement(&b, &a));
    }

    #[test]
    fn tv_matches_enumeration_and_is_symmetric(
        a in prop::collection::vec("[a-e]", 1..30),
        b in prop::collection::vec("[a-e]", 1..30),
    ) {
        let got = tv_complement(&a, &b);
        prop_assert!((got - metrics::tv_oracle(&a, &b)).abs() <= 1e-12);
        prop_assert!((got - tv_complement(&b, &a)).abs() <= 1e-15);
    }
}

#[test]
fn complement_examples() {
    assert!((ks_complement(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]) - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
    assert_eq!(ks_complement(&[1.0, 2.0], &[5.0, 6.0]), 0.0);
    assert!((tv_complement(&["a", "a", "b"], &["a", "b", "b"]) - (1.0 - 1.0 / 3.0)).abs() < 1e-15);
    assert_eq!(tv_complement(&["a"], &["b"]), 0.0);
    assert_eq!(tv_complement(&["x", "y"], &["y", "x"]), 1.0);
}

#[test]
fn avg_hop_examples() {
    assert!((avg_hop(&[0.9, 0.7]).unwrap() - 0.8).abs() < 1e-15);
    assert_eq!(avg_hop(&[0.42]).unwrap(), 0.42);
    assert!((avg_hop(&[0.948, 0.910]).unwrap() - 0.929).abs() < 1e-12);
    assert!(matches!(avg_hop(&[]), Err(EvalError::NoHopScores)));
}

// ---- fidelity on a small two-table database ----

fn col(name: &str, kind: ColumnKind) -> ColumnSpec {
    ColumnSpec {
        name: name.into(),
        kind,
    }
}

/// people(id, age, region, income) ← visits(id, person, cost, kind)
fn people_schema() -> RelationalSchema {
    RelationalSchema::new(
        vec![
            TableSpec {
                name: "people".into(),
                columns: vec![
                    col("id", ColumnKind::Categorical),
                    col("age", ColumnKind::Numeric),
                    col("region", ColumnKind::Categorical),
                    col("income", ColumnKind::Numeric),
                ],
                primary_key: "id".into(),
                foreign_keys: vec![],
            },
            TableSpec {
                name: "visits".into(),
                columns: vec![
                    col("id", ColumnKind::Categorical),
                    col("person", ColumnKind::Categorical),
                    col("cost", ColumnKind::Numeric),
                    col("kind", ColumnKind::Categorical),
                ],
                primary_key: "id".into(),
                foreign_keys: vec![ForeignKey {
                    column: "person".into(),
                    references: "people".into(),
                }],
            },
        ],
        "people",
    )
    .unwrap()
}

fn people_db(seed: u64, people: usize, visits_of: impl Fn(usize) -> usize) -> DatabaseInstance {
    let schema = people_schema();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut db = DatabaseInstance::empty(&schema);
    let cats = ["n", "s", "e", "w"];
    let p = &mut db.tables[0];
    p.primary_keys = (0..people).map(|i| format!("p{i}")).collect();
    let age: Vec<f64> = (0..people).map(|_| rng.random_range(18.0..90.0)).collect();
    p.features = vec![
        ColumnValues::Numeric(age.iter().map(|&a| Some(a)).collect()),
        ColumnValues::Categorical((0..people).map(|_| Some(cats[rng.random_range(0..4)].into())).collect()),
        ColumnValues::Numeric(age.iter().map(|&a| Some(a * 100.0 + rng.random_range(0.0..2000.0))).collect()),
    ];
    let (mut keys, mut owner, mut cost, mut kind) = (vec![], vec![], vec![], vec![]);
    for i in 0..people {
        for j in 0..visits_of(i) {
            keys.push(format!("v{i}_{j}"));
            owner.push(Some(format!("p{i}")));
            cost.push(Some(age[i] + rng.random_range(0.0..10.0)));
            kind.push(Some(cats[rng.random_range(0..2)].to_string()));
        }
    }
    let v = &mut db.tables[1];
    v.primary_keys = keys;
    v.foreign_keys = vec![owner];
    v.features = vec![ColumnValues::Numeric(cost), ColumnValues::Categorical(kind)];
    db.validate(&schema).unwrap();
    db
}

#[test]
fn verbatim_copy_scores_one_everywhere() {
    let schema = people_schema();
    let real = people_db(1, 30, |i| i % 4);
    let report = fidelity_report(&schema, &real, &real.clone()).unwrap();
    assert_eq!(report.one_way, Some(1.0));
    assert_eq!(report.cardinality, Some(1.0));
    assert_eq!(report.hops.len(), 2);
    assert!(report.hops.values().all(|&v| v == 1.0));
    assert_eq!(report.avg_hop, Some(1.0));
    assert!(report.detail.values().all(|&v| v == 1.0));
    // Numeric-categorical pairs are skipped, not scored.
    assert!(report.skipped.iter().any(|k| k == "hop0.people.age|region"));
}

#[test]
fn one_way_shift_of_one_column() {
    let schema = RelationalSchema::new(
        vec![TableSpec {
            name: "t".into(),
            columns: vec![
                col("id", ColumnKind::Categorical),
                col("x", ColumnKind::Numeric),
                col("y", ColumnKind::Numeric),
                col("c", ColumnKind::Categorical),
            ],
            primary_key: "id".into(),
            foreign_keys: vec![],
        }],
        "t",
    )
    .unwrap();
    let mut real = DatabaseInstance::empty(&schema);
    real.tables[0].primary_keys = (0..10).map(|i| format!("k{i}")).collect();
    real.tables[0].features = vec![
        ColumnValues::Numeric((0..10).map(|i| Some(i as f64)).collect()),
        ColumnValues::Numeric((0..10).map(|i| Some((i * i) as f64)).collect()),
        ColumnValues::Categorical((0..10).map(|i| Some(format!("c{}", i % 3))).collect()),
    ];
    let mut synth = real.clone();
    if let ColumnValues::Numeric(v) = &mut synth.tables[0].features[0] {
        for x in v.iter_mut().flatten() {
            *x += 1000.0;
        }
    }
    let s = one_way(&schema, &real, &synth);
    assert!((s.score.unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(s.detail["one_way.t.x"], 0.0);
}

#[test]
fn cardinality_examples() {
    let schema = people_schema();
    let one = people_db(2, 6, |_| 1);
    let two = people_db(2, 6, |_| 2);
    assert_eq!(cardinality_fidelity(&schema, &one, &two).unwrap().score, Some(0.0));
    // Group sizes {0,1,2,2} vs {1,1,2,3}: ECDFs differ by at most 1/4.
    let real = people_db(3, 4, |i| [0, 1, 2, 2][i]);
    let synth = people_db(4, 4, |i| [1, 1, 2, 3][i]);
    let got = cardinality_fidelity(&schema, &real, &synth).unwrap().score.unwrap();
    assert!((got - 0.75).abs() < 1e-15);
}

#[test]
fn opposite_correlations_score_zero() {
    let schema = RelationalSchema::new(
        vec![TableSpec {
            name: "t".into(),
            columns: vec![
                col("id", ColumnKind::Categorical),
                col("x", ColumnKind::Numeric),
                col("y", ColumnKind::Numeric),
            ],
            primary_key: "id".into(),
            foreign_keys: vec![],
        }],
        "t",
    )
    .unwrap();
    let make = |sign: f64| {
        let mut db = DatabaseInstance::empty(&schema);
        db.tables[0].primary_keys = (0..5).map(|i| format!("k{i}")).collect();
        db.tables[0].features = vec![
            ColumnValues::Numeric((0..5).map(|i| Some(i as f64)).collect()),
            ColumnValues::Numeric((0..5).map(|i| Some(sign * 2.0 * i as f64 + 1.0)).collect()),
        ];
        db
    };
    let s = khop_correlation(&schema, &make(1.0), &make(-1.0), 0).unwrap();
    // Pearson of exactly linear data is ±1 up to rounding.
    assert!(s.score.unwrap().abs() < 1e-12);
}

#[test]
fn three_pair_instance_matches_hand_pearson() {
    let schema = RelationalSchema::new(
        vec![TableSpec {
            name: "t".into(),
            columns: vec![
                col("id", ColumnKind::Categorical),
                col("a", ColumnKind::Numeric),
                col("b", ColumnKind::Numeric),
                col("c", ColumnKind::Numeric),
            ],
            primary_key: "id".into(),
            foreign_keys: vec![],
        }],
        "t",
    )
    .unwrap();
    let db = |cols: [[f64; 4]; 3]| {
        let mut d = DatabaseInstance::empty(&schema);
        d.tables[0].primary_keys = (0..4).map(|i| format!("k{i}")).collect();
        d.tables[0].features = cols
            .iter()
            .map(|c| ColumnValues::Numeric(c.iter().map(|&v| Some(v)).collect()))
            .collect();
        d
    };
    // Real: a = (1,2,3,4), b = (2,4,5,9), c = (4,3,2,1).
    // Synth: a = (1,2,3,4), b = (1,3,2,4), c = (1,1,2,2).
    let real = db([[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 5.0, 9.0], [4.0, 3.0, 2.0, 1.0]]);
    let synth = db([[1.0, 2.0, 3.0, 4.0], [1.0, 3.0, 2.0, 4.0], [1.0, 1.0, 2.0, 2.0]]);
    // Worked by hand from centred sums of products.
    let r_ab = 11.0 / (5f64.sqrt() * 26f64.sqrt()); // Sxy 11, Sxx 5, Syy 26
    let r_ac = -1.0;
    let r_bc = -r_ab;
    let s_ab = 4.0 / 5.0; // Sxy 4, Sxx 5, Syy 5
    let s_ac = 2.0 / (5f64.sqrt() * 1.0); // Sxy 2, Sxx 5, Syy 1
    let s_bc = 1.0 / 5f64.sqrt(); // Sxy 1, Sxx 5, Syy 1
    let want = [
        ("hop0.t.a|b", 1.0 - (r_ab - s_ab).abs() / 2.0),
        ("hop0.t.a|c", 1.0 - (r_ac - s_ac).abs() / 2.0),
        ("hop0.t.b|c", 1.0 - (r_bc - s_bc).abs() / 2.0),
    ];
    let s = khop_correlation(&schema, &real, &synth, 0).unwrap();
    for (key, v) in want {
        assert!((s.detail[key] - v).abs() < 1e-12, "{key}: {} vs {v}", s.detail[key]);
    }
    let mean = want.iter().map(|w| w.1).sum::<f64>() / 3.0;
    assert!((s.score.unwrap() - mean).abs() < 1e-12);
}

#[test]
fn one_hop_pairs_join_through_the_foreign_key() {
    let schema = people_schema();
    let real = people_db(5, 20, |i| 1 + i % 3);
    let s = khop_correlation(&schema, &real, &real, 1).unwrap();
    let keys: Vec<&String> = s.detail.keys().collect();
    assert_eq!(
        keys,
        [
            "hop1.visits.person.cost|people.age",
            "hop1.visits.person.cost|people.income",
            "hop1.visits.person.kind|people.region",
        ]
    );
    assert!(matches!(
        khop_correlation(&schema, &real, &real, 2),
        Err(EvalError::UnsupportedHop(2))
    ));
}

#[test]
fn zero_variance_pair_is_skipped_with_warning() {
    let schema = people_schema();
    let real = people_db(6, 10, |_| 1);
    let mut synth = real.clone();
    if let ColumnValues::Numeric(v) = &mut synth.tables[0].features[2] {
        v.iter_mut().for_each(|x| *x = Some(1.0));
    }
    let s = khop_correlation(&schema, &real, &synth, 0).unwrap();
    assert!(s.skipped.iter().any(|k| k == "hop0.people.age|income"));
    assert!(s.warnings.iter().any(|w| w.starts_with("hop0.people.age|income")));
}
