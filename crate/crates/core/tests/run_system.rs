use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rdfizer::mapping::{load_mapping_file, parse_mapping, LogicalSource, Mode};
use rdfizer::{run_system, DataIntegrationSystem, EngineOptions, RunReport};
use rdfizer_testkit::{maps_from_system, oracle_lines, parse_ntriples_line};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/motivating/mapping.ttl")
}

fn run(dis: &DataIntegrationSystem, options: &EngineOptions) -> (Vec<String>, RunReport) {
    let mut out = Vec::new();
    let report = run_system(dis, &mut out, options).unwrap();
    let text = String::from_utf8(out).unwrap();
    (text.lines().map(|l| format!("{l}\n")).collect(), report)
}

#[test]
fn motivating_workload_matches_oracle_without_duplicates() {
    let dis = load_mapping_file(&fixture()).unwrap();
    let (lines, report) = run(&dis, &EngineOptions::default());
    let set: BTreeSet<String> = lines.iter().cloned().collect();
    assert_eq!(set.len(), lines.len(), "output has repeated lines");
    assert_eq!(set, oracle_lines(&maps_from_system(&dis)));
    assert!(!report.partial && report.errors.is_empty());
    assert!(report.laws_hold());
    assert_eq!(report.pjtt_builds, 1);
    for l in &lines {
        parse_ntriples_line(l).unwrap();
    }
}

#[test]
fn naive_mode_produces_the_same_graph() {
    let mut dis = load_mapping_file(&fixture()).unwrap();
    let (optimized, _) = run(&dis, &EngineOptions::default());
    dis.mode = Mode::Naive;
    let (naive, report) = run(&dis, &EngineOptions::default());
    let a: BTreeSet<_> = optimized.into_iter().collect();
    let b: BTreeSet<_> = naive.iter().cloned().collect();
    assert_eq!(a, b);
    assert_eq!(b.len(), naive.len());
    assert!(report.laws_hold(), "{:#?}", report.operators);
}

#[test]
fn class_only_mapping_emits_type_triples() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.csv"), "id\n1\n2\n2\n").unwrap();
    let doc = r#"@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
<http://m/A> rml:logicalSource [ rml:source "d.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://x/{id}" ; rr:class <http://x/C> ] .
"#;
    let mut dis = parse_mapping(doc).unwrap();
    dis.resolve_sources(dir.path());
    let (lines, report) = run(&dis, &EngineOptions::default());
    assert_eq!(
        lines,
        vec![
            "<http://x/1> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/C> .\n",
            "<http://x/2> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://x/C> .\n",
        ]
    );
    assert_eq!(report.totals.triples_generated, 3);
}

fn two_children_one_parent(dir: &Path) -> DataIntegrationSystem {
    std::fs::write(dir.join("p.csv"), "k,id\n1,a\n2,b\n2,c\n,d\n").unwrap();
    std::fs::write(dir.join("c1.csv"), "k,id\n1,x\n2,y\n").unwrap();
    std::fs::write(dir.join("c2.csv"), "k,id\n2,z\n").unwrap();
    let child = |name: &str, file: &str| {
        format!(
            r#"<http://m/{name}> rml:logicalSource [ rml:source "{file}" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://x/{name}/{{id}}" ] ;
  rr:predicateObjectMap [ rr:predicate <http://x/p> ; rr:objectMap [
    rr:parentTriplesMap <http://m/P> ; rr:joinCondition [ rr:child "k" ; rr:parent "k" ] ] ] .
"#
        )
    };
    let doc = format!(
        r#"@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
{}{}<http://m/P> rml:logicalSource [ rml:source "p.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://x/p/{{id}}" ] .
"#,
        child("C1", "c1.csv"),
        child("C2", "c2.csv")
    );
    let mut dis = parse_mapping(&doc).unwrap();
    dis.resolve_sources(dir);
    dis
}

#[test]
fn shared_parent_join_builds_one_index() {
    let dir = tempfile::tempdir().unwrap();
    let dis = two_children_one_parent(dir.path());
    let (shared_lines, shared) = run(&dis, &EngineOptions::default());
    let baseline_options = EngineOptions {
        reuse_pjtt: false,
        ..EngineOptions::default()
    };
    let (baseline_lines, baseline) = run(&dis, &baseline_options);

    // Three parent records carry a key and a subject.
    let n_parent = 3;
    assert_eq!(shared.pjtt_builds, 1);
    assert_eq!(shared.totals.pjtt_insertions, n_parent);
    assert_eq!(baseline.pjtt_builds, 2);
    assert_eq!(baseline.totals.pjtt_insertions, 2 * n_parent);
    assert_eq!(shared_lines, baseline_lines);
    let built: Vec<bool> = shared.operators.iter().map(|o| o.built_pjtt).collect();
    assert_eq!(built, vec![true, false]);
    assert!(baseline.operators.iter().all(|o| o.built_pjtt));
    assert!(shared.laws_hold() && baseline.laws_hold());
}

#[test]
fn failing_map_is_reported_and_others_still_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut dis = two_children_one_parent(dir.path());
    dis.mappings[0].logical_source = LogicalSource::csv(dir.path().join("missing.csv"));
    let (lines, report) = run(&dis, &EngineOptions::default());
    assert!(report.partial);
    assert_eq!(report.errors.len(), 1);
    assert!(report.errors[0].contains("http://m/C1"), "{}", report.errors[0]);
    assert_eq!(lines.len(), 2, "{lines:?}");
}

#[test]
fn report_serializes_to_json() {
    let dis = load_mapping_file(&fixture()).unwrap();
    let (_, report) = run(&dis, &EngineOptions::default());
    let v: serde_json::Value = serde_json::to_value(&report).unwrap();
    assert_eq!(v["mode"], "optimized");
    assert!(v["predicates"]["http://iasis.eu/vocab/exon"]["emitted"].as_u64().unwrap() > 0);
    assert_eq!(v["operators"][0]["kind"], "SOM");
}
