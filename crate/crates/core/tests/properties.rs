use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use proptest::prelude::*;
use rdfizer::mapping::{
    parse_mapping, to_turtle, DataIntegrationSystem, JoinCondition, LogicalSource, Mode, ObjectMap,
    PredicateObjectMap, TermMap, TermType, TriplesMap,
};
use rdfizer::structures::{CostCounters, PredicateJoinTupleTable, PredicateTupleTable};
use rdfizer::term::Term;
use rdfizer::writer::KgWriter;
use rdfizer::{run_system, EngineOptions};
use rdfizer_testkit::{generated_counts, maps_from_system, oracle_lines, parse_ntriples_line};

// ---------- mapping round-trip ----------

fn attr() -> impl Strategy<Value = String> {
    prop_oneof![Just("a"), Just("b c"), Just("é"), Just("x.y")].prop_map(str::to_owned)
}

fn template_src() -> impl Strategy<Value = String> {
    (attr(), prop_oneof![Just(""), Just("/z"), Just("\\{lit\\}"), Just("#\"q\"")])
        .prop_map(|(a, tail)| format!("http://x/{{{a}}}{tail}"))
}

fn term_map() -> impl Strategy<Value = TermMap> {
    prop_oneof![
        attr().prop_map(|a| TermMap::reference(a, TermType::Literal)),
        attr().prop_map(|a| TermMap::reference(a, TermType::Literal).with_datatype("http://www.w3.org/2001/XMLSchema#integer")),
        attr().prop_map(|a| TermMap::reference(a, TermType::Iri)),
        template_src().prop_map(|t| TermMap::template(t, TermType::Iri).unwrap()),
        template_src().prop_map(|t| TermMap::template(t, TermType::Literal).unwrap()),
        Just(TermMap::constant("http://x/C", TermType::Iri)),
        Just(TermMap::constant("line\nbreak \"q\"", TermType::Literal)),
    ]
}

fn system() -> impl Strategy<Value = DataIntegrationSystem> {
    let source = prop_oneof![
        Just(LogicalSource::csv("one.csv")),
        Just(LogicalSource::csv("two words.csv")),
        Just(LogicalSource::json("d.json", "$.rows[*]")),
    ];
    let map = (
        source,
        template_src(),
        prop::collection::vec(Just("http://x/Class"), 0..2),
        prop::collection::vec((0u8..3, term_map(), 0u8..4), 0..4),
    );
    prop::collection::vec(map, 1..4).prop_map(|maps| {
        let n = maps.len();
        let sources: Vec<LogicalSource> = maps.iter().map(|m| m.0.clone()).collect();
        let id = |i: usize| if i % 2 == 0 { format!("http://m/T{i}") } else { format!("_:t{i}") };
        let mappings = maps
            .into_iter()
            .enumerate()
            .map(|(i, (ls, subject, classes, poms))| TriplesMap {
                id: id(i),
                logical_source: ls.clone(),
                subject_map: TermMap::template(subject, TermType::Iri).unwrap(),
                subject_classes: classes.into_iter().map(str::to_owned).collect(),
                predicate_object_maps: poms
                    .into_iter()
                    .map(|(p, tm, link)| {
                        let target = (i + 1) % n;
                        let object = match link {
                            1 if sources[target] == ls => ObjectMap::Reference { parent: id(target) },
                            2 => ObjectMap::Join {
                                parent: id(target),
                                conditions: vec![JoinCondition::new("a", "b c")],
                            },
                            3 => ObjectMap::Join {
                                parent: id(target),
                                conditions: vec![JoinCondition::new("a", "a"), JoinCondition::new("é", "x.y")],
                            },
                            _ => ObjectMap::Simple(tm),
                        };
                        PredicateObjectMap {
                            predicate: format!("http://x/p{p}"),
                            object,
                        }
                    })
                    .collect(),
            })
            .collect();
        let mut prefixes = std::collections::BTreeMap::new();
        prefixes.insert("ex".to_owned(), "http://x/".to_owned());
        DataIntegrationSystem::new(prefixes, mappings)
    })
}

proptest! {
    #[test]
    fn mapping_round_trips(dis in system()) {
        let text = to_turtle(&dis);
        let back = parse_mapping(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(back, dis);
    }
}

// ---------- engine against the oracle ----------

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![Just(""), Just("a"), Just("b"), Just("x y"), Just("é\"q"), Just("1")].prop_map(str::to_owned)
}

fn table() -> impl Strategy<Value = Vec<[String; 3]>> {
    prop::collection::vec([cell(), cell(), cell()], 0..12)
}

fn write_table(path: &Path, rows: &[[String; 3]]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    w.write_record(["k", "v", "w"]).unwrap();
    for r in rows {
        w.write_record(r).unwrap();
    }
    w.flush().unwrap();
}

#[derive(Debug, Clone, Copy)]
enum PomKind {
    Reference,
    TypedReference,
    Template,
    Constant,
    SameRow,
    Join,
    JoinTwoKeys,
}

fn pom_kind() -> impl Strategy<Value = PomKind> {
    prop_oneof![
        Just(PomKind::Reference),
        Just(PomKind::TypedReference),
        Just(PomKind::Template),
        Just(PomKind::Constant),
        Just(PomKind::SameRow),
        Just(PomKind::Join),
        Just(PomKind::JoinTwoKeys),
    ]
}

const HEAD: &str = "@prefix rr: <http://www.w3.org/ns/r2rml#> .
@prefix rml: <http://semweb.mmlab.be/ns/rml#> .
@prefix ql: <http://semweb.mmlab.be/ns/ql#> .
@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .
";

fn mapping_doc(poms: &[(PomKind, u8)], with_class: bool) -> String {
    let mut d = String::from(HEAD);
    let src = |f: &str| format!("rml:logicalSource [ rml:source \"{f}\" ; rml:referenceFormulation ql:CSV ]");
    let class = if with_class { " ; rr:class <http://x/C>" } else { "" };
    let _ = write!(d, "<http://m/C> {} ;\n  rr:subjectMap [ rr:template \"http://x/c/{{k}}\"{class} ]", src("c.csv"));
    for (kind, p) in poms {
        let object = match kind {
            PomKind::Reference => "rml:reference \"v\"".to_owned(),
            PomKind::TypedReference => "rml:reference \"v\" ; rr:datatype xsd:integer".to_owned(),
            PomKind::Template => "rr:template \"http://x/t/{w}\"".to_owned(),
            PomKind::Constant => "rr:constant \"c\"".to_owned(),
            PomKind::SameRow => "rr:parentTriplesMap <http://m/R>".to_owned(),
            PomKind::Join => {
                "rr:parentTriplesMap <http://m/P> ; rr:joinCondition [ rr:child \"k\" ; rr:parent \"k\" ]".to_owned()
            }
            PomKind::JoinTwoKeys => "rr:parentTriplesMap <http://m/P> ; \
                 rr:joinCondition [ rr:child \"k\" ; rr:parent \"w\" ] ; \
                 rr:joinCondition [ rr:child \"v\" ; rr:parent \"v\" ]"
                .to_owned(),
        };
        let _ = write!(d, " ;\n  rr:predicateObjectMap [ rr:predicate <http://x/p{p}> ; rr:objectMap [ {object} ] ]");
    }
    d.push_str(" .\n");
    let _ = writeln!(d, "<http://m/R> {} ;\n  rr:subjectMap [ rr:template \"http://x/r/{{w}}\" ] .", src("c.csv"));
    let _ = writeln!(
        d,
        "<http://m/P> {} ;\n  rr:subjectMap [ rr:template \"http://x/p/{{v}}\" ] ;\n  \
         rr:predicateObjectMap [ rr:predicate <http://x/p1> ; rr:objectMap [ rml:reference \"w\" ] ] .",
        src("p.csv")
    );
    d
}

fn run_lines(dis: &DataIntegrationSystem) -> (Vec<String>, rdfizer::RunReport) {
    let mut out = Vec::new();
    let report = run_system(dis, &mut out, &EngineOptions { batch_size: 3, ..Default::default() }).unwrap();
    let lines = String::from_utf8(out).unwrap().lines().map(|l| format!("{l}\n")).collect();
    (lines, report)
}

fn load(dir: &Path, doc: &str) -> DataIntegrationSystem {
    let mut dis = parse_mapping(doc).unwrap();
    dis.resolve_sources(dir);
    dis
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimized_and_naive_match_the_oracle(
        child in table(),
        parent in table(),
        poms in prop::collection::vec((pom_kind(), 1u8..4), 0..4),
        with_class in any::<bool>(),
    ) {
        let dir = tempfile::tempdir().unwrap();
        write_table(&dir.path().join("c.csv"), &child);
        write_table(&dir.path().join("p.csv"), &parent);
        let mut dis = load(dir.path(), &mapping_doc(&poms, with_class));
        let maps = maps_from_system(&dis);
        let expected = oracle_lines(&maps);
        let generated = |r: &rdfizer::RunReport| -> std::collections::BTreeMap<String, u64> {
            r.predicates.iter().map(|(p, c)| (p.clone(), c.generated)).filter(|(_, n)| *n > 0).collect()
        };
        let nonzero = |m: std::collections::BTreeMap<String, u64>| -> std::collections::BTreeMap<String, u64> {
            m.into_iter().filter(|(_, n)| *n > 0).collect()
        };

        let (lines, report) = run_lines(&dis);
        let set: BTreeSet<String> = lines.iter().cloned().collect();
        prop_assert_eq!(set.len(), lines.len(), "repeated lines");
        prop_assert_eq!(&set, &expected);
        prop_assert!(report.laws_hold(), "{:#?}", report.operators);
        prop_assert_eq!(generated(&report), nonzero(generated_counts(&maps, true)));
        for op in &report.operators {
            if let (Some(np), Some(nc)) = (op.n_parent, op.n_child) {
                let c = op.counters;
                prop_assert_eq!(c.pjtt_reads + c.pjtt_insertions + c.pjtt_probes, 2 * np + nc);
            }
        }
        for l in &lines {
            prop_assert!(parse_ntriples_line(l).is_ok(), "{}", l);
        }

        dis.mode = Mode::Naive;
        let (naive, report) = run_lines(&dis);
        let naive_set: BTreeSet<String> = naive.iter().cloned().collect();
        prop_assert_eq!(naive_set.len(), naive.len());
        prop_assert_eq!(naive_set, expected);
        prop_assert_eq!(generated(&report), nonzero(generated_counts(&maps, false)));
        for op in &report.operators {
            let c = op.counters;
            if let (Some(np), Some(nc)) = (op.n_parent, op.n_child) {
                prop_assert_eq!(c.pairwise_comparisons, np * nc);
            }
            prop_assert!(c.sort_comparisons as f64 <= rdfizer::engine::merge_sort_band(c.triples_generated).1);
        }
    }

    #[test]
    fn reference_map_equals_its_template_rewrite(child in table()) {
        let dir = tempfile::tempdir().unwrap();
        write_table(&dir.path().join("c.csv"), &child);
        write_table(&dir.path().join("p.csv"), &[]);
        let orm = load(dir.path(), &mapping_doc(&[(PomKind::SameRow, 1)], false));
        let som_doc = mapping_doc(&[(PomKind::Template, 1)], false).replace("http://x/t/{w}", "http://x/r/{w}");
        let som = load(dir.path(), &som_doc);
        let a: BTreeSet<String> = run_lines(&orm).0.into_iter().collect();
        let b: BTreeSet<String> = run_lines(&som).0.into_iter().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn adding_records_never_removes_triples(
        child in table(),
        extra in table(),
        parent in table(),
        poms in prop::collection::vec((pom_kind(), 1u8..4), 1..4),
    ) {
        let dir = tempfile::tempdir().unwrap();
        write_table(&dir.path().join("p.csv"), &parent);
        let doc = mapping_doc(&poms, true);
        write_table(&dir.path().join("c.csv"), &child);
        let before: BTreeSet<String> = run_lines(&load(dir.path(), &doc)).0.into_iter().collect();
        let mut grown = child.clone();
        grown.extend(extra);
        write_table(&dir.path().join("c.csv"), &grown);
        let after: BTreeSet<String> = run_lines(&load(dir.path(), &doc)).0.into_iter().collect();
        prop_assert!(before.is_subset(&after));
    }
}

// ---------- structures ----------

proptest! {
    #[test]
    fn pjtt_probe_equals_nested_loop(
        parents in prop::collection::vec((cell(), cell()), 0..20),
        probes in prop::collection::vec(cell(), 1..10),
    ) {
        let mut text = String::from("key,id\n");
        for (k, id) in &parents {
            let q = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
            text.push_str(&format!("{},{}\n", q(k), q(id)));
        }
        let subject = TermMap::template("http://x/{id}", TermType::Iri).unwrap();
        let stream = rdfizer::ingest::RecordStream::csv(std::io::Cursor::new(text.into_bytes()));
        let mut c = CostCounters::default();
        let mut pjtt = PredicateJoinTupleTable::build("P", &subject, stream, vec!["key".into()], &mut c).unwrap();
        let valid: Vec<&(String, String)> = parents.iter().filter(|(k, id)| !k.is_empty() && !id.is_empty()).collect();
        prop_assert_eq!(c.pjtt_insertions, valid.len() as u64);
        for key in probes {
            let got: BTreeSet<String> = pjtt.probe(&[key.as_str()], &mut c).iter().cloned().collect();
            let want: BTreeSet<String> = valid
                .iter()
                .filter(|(k, _)| *k == key)
                .map(|(_, id)| format!("http://x/{}", rdfizer_testkit::iri_encode(id)))
                .collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn interleaved_emission_is_exactly_once(ops in prop::collection::vec((0usize..3, 0u8..6, any::<bool>()), 0..60)) {
        let mut ptts: Vec<PredicateTupleTable> = (0..3).map(|i| PredicateTupleTable::new(format!("http://x/p{i}"))).collect();
        let mut w = KgWriter::new(Vec::new());
        let mut c = CostCounters::default();
        for (t, v, emit) in ops {
            ptts[t].check_insert("http://x/s", &Term::literal(v.to_string()), &mut c);
            if emit {
                w.emit(&ptts[t]).unwrap();
            }
        }
        for p in &ptts {
            w.emit(p).unwrap();
        }
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let set: BTreeSet<&str> = lines.iter().copied().collect();
        prop_assert_eq!(set.len(), lines.len());
        prop_assert_eq!(set.len(), ptts.iter().map(|p| p.len()).sum::<usize>());
    }
}
