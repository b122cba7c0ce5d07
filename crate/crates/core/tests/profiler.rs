mod common;

use std::collections::BTreeMap;
use std::fs::File;

use common::fixtures_dir;
use mlguard_core::profiler::{
    audit_split, parse_profile, profile_reader, profile_table, write_profile, ColumnKind, ColumnMeta, DataProfile,
    SchemaMeta, Verdict, DEFAULT_SPLIT_THRESHOLD,
};
use proptest::prelude::*;

fn label_schema() -> SchemaMeta {
    let meta = ColumnMeta { kind: Some(ColumnKind::Categorical), ..ColumnMeta::default() };
    SchemaMeta { columns: BTreeMap::from([("survived".to_string(), meta)]) }
}

fn load(name: &str) -> DataProfile {
    let path = fixtures_dir().join("data").join(name);
    profile_reader(File::open(&path).unwrap(), name, Some(&label_schema())).unwrap()
}

fn audit(prefix: &str) -> mlguard_core::profiler::SplitAudit {
    let full = load(&format!("{prefix}_full.csv"));
    let splits: Vec<DataProfile> = ["train", "val", "test"].iter().map(|s| load(&format!("{prefix}_{s}.csv"))).collect();
    audit_split(&full, &splits, "survived", DEFAULT_SPLIT_THRESHOLD).unwrap()
}

#[test]
fn stratified_fixture_has_zero_distances() {
    let a = audit("strat");
    assert_eq!(a.verdict, Verdict::Stratified);
    assert_eq!(a.splits.len(), 3);
    for s in &a.splits {
        assert_eq!(s.tv_distance, 0.0, "{}", s.source);
    }
}

#[test]
fn skewed_fixture_has_distance_point_four() {
    let a = audit("skew");
    assert_eq!(a.verdict, Verdict::Skewed);
    // Full is 10/10; test is 9/1: TV = (|0.5-0.9| + |0.5-0.1|) / 2.
    let oracle = ((0.5f64 - 0.9).abs() + (0.5f64 - 0.1).abs()) / 2.0;
    let test = a.splits.iter().find(|s| s.source == "skew_test.csv").unwrap();
    assert!((test.tv_distance - oracle).abs() < 1e-9);
    assert!((test.tv_distance - 0.4).abs() < 1e-9);
}

#[test]
fn audit_verdict_follows_threshold() {
    let a = audit("skew");
    let full = load("skew_full.csv");
    let test = load("skew_test.csv");
    assert_eq!(audit_split(&full, std::slice::from_ref(&test), "survived", 0.4).unwrap().verdict, Verdict::Stratified);
    assert_eq!(audit_split(&full, &[test], "survived", 0.39).unwrap().verdict, Verdict::Skewed);
    assert!(a.splits.iter().all(|s| (0.0..=1.0).contains(&s.tv_distance)));
}

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => (-100i32..100).prop_map(|i| i.to_string()),
        1 => (-100i32..100).prop_map(|i| format!("{}.5", i)),
        2 => prop::sample::select(vec!["a", "b", "c", "d e"]).prop_map(String::from),
        1 => Just(String::new()),
        1 => Just("NA".to_string()),
    ]
}

fn table() -> impl Strategy<Value = Vec<Vec<String>>> {
    (1usize..5, 1usize..30).prop_flat_map(|(cols, rows)| {
        prop::collection::vec(prop::collection::vec(cell(), cols), rows).prop_map(move |body| {
            let mut t = vec![(0..cols).map(|c| format!("c{c}")).collect::<Vec<_>>()];
            t.extend(body);
            t
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn profile_invariants_hold(rows in table()) {
        let p = profile_table(&rows, "t.csv", None).unwrap();
        prop_assert_eq!(p.row_count, rows.len() - 1);
        let names: Vec<&str> = p.columns.iter().map(|c| c.name.as_str()).collect();
        let header: Vec<&str> = rows[0].iter().map(String::as_str).collect();
        prop_assert_eq!(names, header);
        for (j, c) in p.columns.iter().enumerate() {
            let cells: Vec<&str> = rows[1..].iter().map(|r| r[j].as_str()).collect();
            let missing = cells.iter().filter(|v| v.is_empty() || **v == "NA").count();
            prop_assert_eq!(c.missing_count, missing);
            prop_assert!(c.missing_count <= c.row_count);
            let present: Vec<&&str> = cells.iter().filter(|v| !v.is_empty() && **v != "NA").collect();
            let expected = if present.is_empty() {
                ColumnKind::Unknown
            } else if present.iter().all(|v| v.parse::<f64>().is_ok()) {
                ColumnKind::Numeric
            } else {
                ColumnKind::Categorical
            };
            prop_assert_eq!(c.kind, expected);
            prop_assert!(c.entropy_bits >= 0.0);
            if c.distinct_count >= 1 {
                prop_assert!(c.entropy_bits <= (c.distinct_count as f64).log2() + 1e-9);
            }
            if c.kind == ColumnKind::Categorical {
                let total: usize = c.value_counts.values().sum();
                prop_assert_eq!(total, c.present());
            }
        }
    }

    #[test]
    fn profile_file_round_trips(rows in table()) {
        let p = profile_table(&rows, "t.csv", None).unwrap();
        prop_assert_eq!(parse_profile(&write_profile(&p)).unwrap(), p);
    }
}
