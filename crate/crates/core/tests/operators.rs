use std::io::Cursor;

use rdfizer::engine::naive::{naive_execute, NaiveLimits};
use rdfizer::engine::operators::{exec_ojm, exec_orm, exec_som, ojm_step};
use rdfizer::engine::{plans_for, predicted_ops, EngineError, OperatorPlan};
use rdfizer::ingest::RecordStream;
use rdfizer::mapping::{parse_mapping, DataIntegrationSystem, LogicalSource, Mode, OperatorKind};
use rdfizer::structures::{CostCounters, PredicateJoinTupleTable, PredicateTupleTable};
use rdfizer::term::Term;
use rdfizer::writer::KgWriter;

const PREFIXES: &str = "@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix iasis: <http://iasis.eu/vocab/> .
";

fn system(body: &str) -> DataIntegrationSystem {
    parse_mapping(&format!("{PREFIXES}{body}")).unwrap()
}

fn plan(dis: &DataIntegrationSystem, map: &str, mode: Mode) -> OperatorPlan {
    let m = dis.mapping(map).unwrap();
    plans_for(dis, m, mode).unwrap().pop().unwrap()
}

fn csv(text: &str) -> RecordStream {
    RecordStream::csv(Cursor::new(text.as_bytes().to_vec()))
}

fn lines(out: Vec<u8>) -> Vec<String> {
    String::from_utf8(out).unwrap().lines().map(str::to_owned).collect()
}

const SOM: &str = r#"
<http://m/TM1> rml:logicalSource [ rml:source "ds1.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://iasis.eu/{uniprot}_{enst}" ] ;
  rr:predicateObjectMap [ rr:predicate iasis:interactionScore ; rr:objectMap [ rml:reference "omixcore" ] ] .
"#;

#[test]
fn simple_object_map_discards_the_duplicate() {
    let dis = system(SOM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    assert_eq!(p.kind, OperatorKind::SimpleObject);
    let data = "uniprot,enst,omixcore\nQ8WU90,ENST00000415827,0.665\nQ8WU90,ENST00000415827,0.665\n";
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(Vec::new());
    let mut c = CostCounters::default();
    assert_eq!(exec_som(&p, csv(data), &mut ptt, &mut w, &mut c).unwrap(), 1);
    assert_eq!(c.triples_generated, 2);
    assert_eq!(
        lines(w.finish().unwrap()),
        vec!["<http://iasis.eu/Q8WU90_ENST00000415827> <http://iasis.eu/vocab/interactionScore> \"0.665\" ."]
    );
    assert_eq!(c.optimized_total(), 2 + 2 * 1);
}

#[test]
fn none_objects_cost_nothing() {
    let dis = system(SOM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(Vec::new());
    let mut c = CostCounters::default();
    let n = exec_som(&p, csv("uniprot,enst,omixcore\nA,B,\nC,D,\n"), &mut ptt, &mut w, &mut c).unwrap();
    assert_eq!(n, 0);
    assert_eq!(c, CostCounters::default());
}

#[test]
fn som_counter_total_matches_formula_for_1000_generated_250_distinct() {
    let dis = system(SOM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    let mut data = String::from("uniprot,enst,omixcore\n");
    for i in 0..1000 {
        data.push_str(&format!("U{},E,1\n", i % 250));
    }
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(std::io::sink());
    let mut c = CostCounters::default();
    assert_eq!(exec_som(&p, csv(&data), &mut ptt, &mut w, &mut c).unwrap(), 250);
    assert_eq!((c.ptt_lookups, c.ptt_insertions, c.kg_emissions), (1000, 250, 250));
    assert_eq!(c.optimized_total(), 1500);
    assert_eq!(predicted_ops(p.kind, Mode::Optimized, 1000, 250, None).unwrap().exact, 1500);
}

const ORM: &str = r#"
<http://m/TM1> rml:logicalSource [ rml:source "ds1.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://iasis.eu/{uniprot}" ] ;
  rr:predicateObjectMap [ rr:predicate iasis:transcript ; rr:objectMap [ rr:parentTriplesMap <http://m/TM2> ] ] .
<http://m/TM2> rml:logicalSource [ rml:source "ds1.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://iasis.eu/transcript/{enst}" ] .
"#;

#[test]
fn object_reference_map_keeps_only_the_new_triple() {
    let dis = system(ORM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    assert_eq!(p.kind, OperatorKind::ObjectReference);
    let data = "uniprot,enst\nQ8WU90,ENST00000415827\nQ8WU90,ENST00000415827\nP1,\n";
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(Vec::new());
    let mut c = CostCounters::default();
    assert_eq!(exec_orm(&p, csv(data), &mut ptt, &mut w, &mut c).unwrap(), 1);
    assert_eq!(c.triples_generated, 2);
    assert_eq!(
        lines(w.finish().unwrap()),
        vec!["<http://iasis.eu/Q8WU90> <http://iasis.eu/vocab/transcript> <http://iasis.eu/transcript/ENST00000415827> ."]
    );
}

#[test]
fn wrong_operator_is_rejected() {
    let dis = system(ORM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    let mut ptt = PredicateTupleTable::new("p");
    let mut w = KgWriter::new(Vec::new());
    let err = exec_som(&p, csv("a\n"), &mut ptt, &mut w, &mut CostCounters::default()).unwrap_err();
    assert!(matches!(err, EngineError::PlanMismatch { .. }));
}

const OJM: &str = r#"
<http://m/TM1> rml:logicalSource [ rml:source "ds1.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://iasis.eu/{uniprot}_{enst}" ] ;
  rr:predicateObjectMap [ rr:predicate iasis:exon ; rr:objectMap [
    rr:parentTriplesMap <http://m/TM2> ; rr:joinCondition [ rr:child "enst" ; rr:parent "enst" ] ] ] .
<http://m/TM2> rml:logicalSource [ rml:source "ds2.csv" ; rml:referenceFormulation ql:CSV ] ;
  rr:subjectMap [ rr:template "http://iasis.eu/exon/{ense}" ] .
"#;

fn build_pjtt(p: &OperatorPlan, parent_csv: &str, c: &mut CostCounters) -> PredicateJoinTupleTable {
    let parent = p.parent.as_ref().unwrap();
    PredicateJoinTupleTable::build("TriplesMap2", &parent.subject_map, csv(parent_csv), vec!["enst".into()], c).unwrap()
}

#[test]
fn object_join_map_three_generated_two_new() {
    let dis = system(OJM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    assert_eq!(p.kind, OperatorKind::ObjectJoin);
    let mut c = CostCounters::default();
    let mut pjtt = build_pjtt(
        &p,
        "enst,ense\nENST00000415827,ENSE00003628092\nENST00000415827,ENSE00003642731\nENST00000415827,ENSE00003646512\n",
        &mut c,
    );
    assert_eq!(pjtt.identifier(), "TriplesMap2_enst");
    let subject = "http://iasis.eu/Q8WU90_ENST00000415827";
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    // One of the three join results is already in the PTT.
    ptt.check_insert(subject, &Term::iri("http://iasis.eu/exon/ENSE00003628092"), &mut CostCounters::default());
    let record = csv("uniprot,enst\nQ8WU90,ENST00000415827\n").next().unwrap().unwrap();
    let mut c = CostCounters::default();
    let new = ojm_step(&["enst"], subject, &record, &mut pjtt, &mut ptt, &mut c);
    assert_eq!((c.triples_generated, new), (3, 2));
}

#[test]
fn unmatched_child_key_yields_nothing() {
    let dis = system(OJM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    let mut c = CostCounters::default();
    let mut pjtt = build_pjtt(&p, "enst,ense\nA,X\n", &mut c);
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(Vec::new());
    let n = exec_ojm(&p, csv("uniprot,enst\nQ,B\n"), &mut pjtt, &mut ptt, &mut w, &mut c).unwrap();
    assert_eq!(n, 0);
    assert_eq!(c.pjtt_probes, 1);
}

/// Nested-loop count of generated join triples, for comparison.
fn nested_loop_pairs(child: &[(&str, &str)], parent: &[(&str, &str)]) -> usize {
    child
        .iter()
        .map(|(_, ck)| parent.iter().filter(|(pk, _)| pk == ck).count())
        .sum()
}

#[test]
fn many_to_many_join() {
    let dis = system(OJM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    let child = [("U1", "K"), ("U2", "K")];
    let parent = [("K", "E1"), ("K", "E2")];
    let mut c = CostCounters::default();
    let mut pjtt = build_pjtt(&p, "enst,ense\nK,E1\nK,E2\n", &mut c);
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(Vec::new());
    let n = exec_ojm(&p, csv("uniprot,enst\nU1,K\nU2,K\n"), &mut pjtt, &mut ptt, &mut w, &mut c).unwrap();
    assert_eq!(c.triples_generated as usize, nested_loop_pairs(&child, &parent));
    assert_eq!(c.triples_generated, 4);
    assert_eq!(n, 4);
    // 2·N_parent + N_child + N_p + 2·S_p
    assert_eq!(c.optimized_total(), 2 * 2 + 2 + 4 + 2 * 4);
}

#[test]
fn naive_join_compares_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut parent = String::from("enst,ense\n");
    for i in 0..100 {
        parent.push_str(&format!("K{},E{i}\n", i % 10));
    }
    std::fs::write(dir.path().join("ds2.csv"), parent).unwrap();
    let mut child = String::from("uniprot,enst\n");
    for i in 0..200 {
        child.push_str(&format!("U{i},K{}\n", i % 20));
    }
    let mut dis = system(OJM);
    dis.mappings[1].logical_source = LogicalSource::csv(dir.path().join("ds2.csv"));
    let p = plan(&dis, "http://m/TM1", Mode::Naive);
    let mut c = CostCounters::default();
    let out = naive_execute(&p, csv(&child), &mut c, &NaiveLimits::default()).unwrap();
    assert_eq!((out.n_parent, out.n_child), (100, 200));
    assert_eq!(c.pairwise_comparisons, 20_000);
    // Children with keys K0..K9 each match 10 parents.
    assert_eq!(c.triples_generated, 100 * 10);
    assert_eq!(out.lines.len(), 1000);
}

#[test]
fn naive_empty_input() {
    let dis = system(SOM);
    let p = plan(&dis, "http://m/TM1", Mode::Naive);
    let mut c = CostCounters::default();
    let out = naive_execute(&p, csv("uniprot,enst,omixcore\n"), &mut c, &NaiveLimits::default()).unwrap();
    assert!(out.lines.is_empty());
    assert_eq!(c.sort_comparisons, 0);
}

#[test]
fn naive_resource_limit_names_the_count() {
    let dis = system(SOM);
    let p = plan(&dis, "http://m/TM1", Mode::Naive);
    let limits = NaiveLimits {
        deadline: None,
        max_materialized: Some(2),
    };
    let err = naive_execute(&p, csv("uniprot,enst,omixcore\nA,B,1\nA,B,2\nA,B,3\n"), &mut CostCounters::default(), &limits)
        .unwrap_err();
    assert!(matches!(err, EngineError::Resource { materialized: 2 }));
    assert!(err.to_string().contains('2'));
}

#[test]
fn source_errors_propagate() {
    let dis = system(SOM);
    let p = plan(&dis, "http://m/TM1", Mode::Optimized);
    let mut ptt = PredicateTupleTable::new(&p.pom.predicate);
    let mut w = KgWriter::new(Vec::new());
    let err = exec_som(&p, csv("uniprot,enst,omixcore\nA,B\n"), &mut ptt, &mut w, &mut CostCounters::default())
        .unwrap_err();
    assert!(matches!(err, EngineError::Source { .. }));
    assert!(w.finish().unwrap().is_empty());
}
