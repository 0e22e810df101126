use std::fs;

use hchoquet_core::dataio::{
    barycenter_csv, case_study, export_results, load_problem, load_problem_file,
    parse_problem_document, rank_summaries, results_from_json, results_to_json, summary_csv,
    write_table_csv, DataError, ExportFormat, ResultsDocument, TableRef,
};
use hchoquet_core::preference::{check_consistency, dominance, nap_relation};
use hchoquet_core::smaa::{barycenter_ranking, run_smaa, RunControl, SamplerConfig};
use hchoquet_core::{Direction, MobiusCapacity2Add, NodeId, NodeSpec, PreferenceStatement, StatementKind};

const SMALL: &str = r#"{
  "schema_version": 1,
  "name": "small",
  "hierarchy": {
    "name": "root",
    "children": [
      { "name": "cost", "direction": "decreasing" },
      { "name": "quality", "direction": "increasing" },
      { "name": "speed", "direction": "increasing" }
    ]
  },
  "table": { "path": "small.csv" },
  "statements": [
    { "kind": "crit-more-important", "subjects": ["quality", "speed"] }
  ]
}"#;

const SMALL_CSV: &str = "id,speed,cost,quality\nx,1,10,0.5\ny,3,20,0.0\nz,2,30,1.0\n";

#[test]
fn columns_map_by_header_and_follow_direction() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("problem.json"), SMALL).unwrap();
    fs::write(dir.path().join("small.csv"), SMALL_CSV).unwrap();
    let p = load_problem_file(&dir.path().join("problem.json"), None).unwrap();
    assert_eq!(p.table.criteria, vec!["cost", "quality", "speed"]);
    assert_eq!(p.table.directions[0], Direction::Decreasing);
    // Cost 10 is the best cost, speed 1 the worst speed.
    assert_eq!(p.table.row(0), &[1.0, 0.5, 0.0]);
    assert_eq!(p.table.row(1), &[0.5, 0.0, 1.0]);
    assert_eq!(p.table.row(2), &[0.0, 1.0, 0.5]);
    assert_eq!(p.table.alternatives[0].name, "x");
}

#[test]
fn table_override_replaces_the_referenced_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("problem.json"), SMALL).unwrap();
    fs::write(dir.path().join("other.csv"), "id,cost,quality,speed\np,1,0,0\nq,2,1,1\n").unwrap();
    let p = load_problem_file(&dir.path().join("problem.json"), Some(&dir.path().join("other.csv"))).unwrap();
    assert_eq!(p.table.ids(), vec!["p", "q"]);
    let missing = load_problem_file(&dir.path().join("problem.json"), None).unwrap_err();
    assert!(matches!(missing, DataError::Read { .. }));
}

#[test]
fn every_issue_is_reported_with_its_location() {
    let mut doc = parse_problem_document(SMALL).unwrap();
    doc.schema_version = 7;
    doc.table = TableRef {
        path: None,
        csv: Some("id,cost,quality,colour\nx,1,abc,3\ny,2\n".into()),
        prenormalized: false,
    };
    doc.statements.push(PreferenceStatement::new(StatementKind::CritMoreImportant, "root", &["quality", "nowhere"]));
    doc.statements.push(PreferenceStatement::new(StatementKind::CritPositiveInteraction, "root", &["cost"]));
    let issues = load_problem(&doc, None).unwrap_err().issues();
    let locations: Vec<&str> = issues.iter().map(|i| i.location.as_str()).collect();
    for expected in [
        "schema_version",
        "table column 4",
        "table header",
        "table row 1, column `quality`",
        "table row 2",
        "statements[1]",
        "statements[2]",
    ] {
        assert!(locations.contains(&expected), "missing {expected} in {locations:?}");
    }
    assert!(issues.iter().any(|i| i.message.contains("speed")));
}

#[test]
fn unknown_alternatives_in_statements_are_rejected() {
    let p = case_study();
    let bad = vec![PreferenceStatement::new(StatementKind::AltStrict, "root", &["a1", "zz"])];
    let err = p.with_statements(bad).unwrap_err();
    assert_eq!(err.issues()[0].location, "statements[0]");
    let good = vec![PreferenceStatement::new(StatementKind::AltStrict, "En", &["a1", "a2"])];
    assert_eq!(p.with_statements(good).unwrap().statements.len(), 1);
}

#[test]
fn constant_column_is_an_issue() {
    let mut doc = parse_problem_document(SMALL).unwrap();
    doc.table.csv = Some("id,cost,quality,speed\nx,1,0,5\ny,2,1,5\n".into());
    let issues = load_problem(&doc, None).unwrap_err().issues();
    assert!(issues.iter().any(|i| i.location == "table" && i.message.contains("speed")));
}

#[test]
fn problem_documents_round_trip_with_inline_table() {
    let p = case_study();
    let text = serde_json::to_string(&p.to_document()).unwrap();
    let back = load_problem(&parse_problem_document(&text).unwrap(), None).unwrap();
    assert_eq!(back.table, p.table);
    assert_eq!(back.statements, p.statements);
    assert_eq!(back.hierarchy_spec, p.hierarchy_spec);
    assert_eq!(write_table_csv(&back.table), write_table_csv(&p.table));
}

#[test]
fn statement_kinds_use_kebab_case_names() {
    let st = PreferenceStatement::new(StatementKind::CritNegativeInteraction, "root", &["OH", "CP"]);
    let json = serde_json::to_value(&st).unwrap();
    assert_eq!(json["kind"], "crit-negative-interaction");
    let leaf: NodeSpec = serde_json::from_str(r#"{ "name": "g" }"#).unwrap();
    assert!(leaf.children.is_empty() && leaf.direction.is_none());
}

fn full_results() -> (ResultsDocument, Vec<String>) {
    let p = case_study();
    let edm = p.edm().unwrap();
    let nodes = p.hierarchy.internal_nodes();
    let cfg = SamplerConfig {
        sample_count: 1_000,
        burn_in: 500,
        ..SamplerConfig::default()
    };
    let smaa = run_smaa(&edm, &p.hierarchy, &p.table, &nodes, &cfg, RunControl::default()).unwrap();
    let mut doc = ResultsDocument::new(&p);
    doc.consistency = Some(check_consistency(&edm).unwrap());
    doc.dominance = Some(dominance(&p.table));
    doc.nap = vec![nap_relation(&edm, &p.hierarchy, &p.table, &p.hierarchy.resolve("Ec").unwrap()).unwrap()];
    doc.rankings = barycenter_ranking(smaa.barycenter.as_ref().unwrap(), &p.hierarchy, &p.table, &nodes).unwrap();
    doc.smaa = Some(smaa);
    let criteria = p.table.criteria.clone();
    (doc, criteria)
}

#[test]
fn results_round_trip_and_export() {
    let (doc, criteria) = full_results();
    let back = results_from_json(&results_to_json(&doc)).unwrap();
    assert_eq!(back, doc);

    let dir = tempfile::tempdir().unwrap();
    let files = export_results(&doc, &criteria, dir.path(), ExportFormat::Tabular).unwrap();
    let names: Vec<String> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for expected in ["rai_Sustainability.csv", "pwi_En.csv", "summary_So.csv", "barycenter.csv", "ranking_Ec.csv"] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    let summary = fs::read_to_string(dir.path().join("summary_Sustainability.csv")).unwrap();
    assert!(summary.starts_with("alternative,high1,high1_pct,high2,high2_pct,high3,high3_pct,best,best_pct,worst,worst_pct"));
    assert_eq!(summary.lines().count(), 52);

    let json = export_results(&doc, &criteria, dir.path(), ExportFormat::Structured).unwrap();
    assert_eq!(results_from_json(&fs::read_to_string(&json[0]).unwrap()).unwrap(), doc);
}

#[test]
fn summaries_are_ordered_by_modal_rank() {
    let (doc, _) = full_results();
    let smaa = doc.smaa.unwrap();
    let root = smaa.node(&NodeId::root()).unwrap();
    let summaries = rank_summaries(root, &smaa.alternatives);
    for pair in summaries.windows(2) {
        let (x, y) = (&pair[0].highest[0], &pair[1].highest[0]);
        assert!(x.rank < y.rank || (x.rank == y.rank && x.frequency >= y.frequency));
    }
    for s in &summaries {
        assert!(s.best.rank <= s.highest[0].rank && s.highest[0].rank <= s.worst.rank);
        assert!(s.highest.windows(2).all(|w| w[0].frequency >= w[1].frequency));
    }
    let csv = summary_csv(root, &smaa.alternatives);
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with(&format!("{},", summaries[0].alternative)));
}

#[test]
fn barycenter_blocks_follow_the_pair_order() {
    let criteria: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
    let m = MobiusCapacity2Add::new(vec![0.2, 0.3, 0.4], vec![0.05, -0.05, 0.1]).unwrap();
    let csv = barycenter_csv(&m, &criteria, 2);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines,
        vec![
            "m({A}),m({B}),m({C})",
            "0.2000,0.3000,0.4000",
            "\"m({A,B})\",\"m({A,C})\"",
            "0.0500,-0.0500",
            "\"m({B,C})\"",
            "0.1000",
        ]
    );
}
