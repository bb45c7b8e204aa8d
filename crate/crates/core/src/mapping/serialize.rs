//! Writes a mapping set back out in the supported Turtle subset.

use std::fmt::Write as _;

use super::model::*;
use crate::term::vocab::{QL, RML, RR};

fn iri(out: &mut String, value: &str) {
    out.push('<');
    for c in value.chars() {
        if c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

fn string(out: &mut String, value: &str) {
    out.push('"');
    for c in value.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn node_ref(out: &mut String, id: &str) {
    match id.strip_prefix("_:") {
        Some(label) if !label.starts_with('#') => {
            out.push_str(id);
        }
        _ => iri(out, id),
    }
}

fn rr(out: &mut String, local: &str) {
    iri(out, &format!("{RR}{local}"));
}

fn term_map_body(out: &mut String, tm: &TermMap) {
    match tm.kind {
        TermMapKind::Reference => {
            iri(out, &format!("{RML}reference"));
            out.push(' ');
            string(out, &tm.value);
        }
        TermMapKind::Template => {
            rr(out, "template");
            out.push(' ');
            string(out, &tm.value);
        }
        TermMapKind::Constant => {
            rr(out, "constant");
            out.push(' ');
            match tm.term_type {
                TermType::Iri => iri(out, &tm.value),
                TermType::Literal => string(out, &tm.value),
            }
        }
    }
    out.push_str(" ; ");
    rr(out, "termType");
    out.push(' ');
    rr(
        out,
        match tm.term_type {
            TermType::Iri => "IRI",
            TermType::Literal => "Literal",
        },
    );
    if let Some(dt) = &tm.datatype {
        out.push_str(" ; ");
        rr(out, "datatype");
        out.push(' ');
        iri(out, dt);
    }
}

/// Serializes `dis` so that [`super::parse_mapping`] yields the same
/// prefixes and triples maps. All IRIs are written in full.
pub fn to_turtle(dis: &DataIntegrationSystem) -> String {
    let mut out = String::new();
    for (prefix, ns) in &dis.ontology_prefixes {
        let _ = write!(out, "@prefix {prefix}: ");
        iri(&mut out, ns);
        out.push_str(" .\n");
    }
    for tm in &dis.mappings {
        out.push('\n');
        node_ref(&mut out, &tm.id);
        out.push_str("\n    ");
        iri(&mut out, &format!("{RML}logicalSource"));
        out.push_str(" [ ");
        iri(&mut out, &format!("{RML}source"));
        out.push(' ');
        string(&mut out, &tm.logical_source.source_path.to_string_lossy());
        out.push_str(" ; ");
        iri(&mut out, &format!("{RML}referenceFormulation"));
        out.push(' ');
        iri(
            &mut out,
            &format!(
                "{QL}{}",
                match tm.logical_source.reference_formulation {
                    ReferenceFormulation::Csv => "CSV",
                    ReferenceFormulation::JsonPath => "JSONPath",
                }
            ),
        );
        if let Some(it) = &tm.logical_source.iterator {
            out.push_str(" ; ");
            iri(&mut out, &format!("{RML}iterator"));
            out.push(' ');
            string(&mut out, it);
        }
        out.push_str(" ] ;\n    ");
        rr(&mut out, "subjectMap");
        out.push_str(" [ ");
        term_map_body(&mut out, &tm.subject_map);
        for class in &tm.subject_classes {
            out.push_str(" ; ");
            rr(&mut out, "class");
            out.push(' ');
            iri(&mut out, class);
        }
        out.push_str(" ]");
        for pom in &tm.predicate_object_maps {
            out.push_str(" ;\n    ");
            rr(&mut out, "predicateObjectMap");
            out.push_str(" [ ");
            rr(&mut out, "predicate");
            out.push(' ');
            iri(&mut out, &pom.predicate);
            out.push_str(" ; ");
            rr(&mut out, "objectMap");
            out.push_str(" [ ");
            match &pom.object {
                ObjectMap::Simple(tm) => term_map_body(&mut out, tm),
                ObjectMap::Reference { parent } => {
                    rr(&mut out, "parentTriplesMap");
                    out.push(' ');
                    node_ref(&mut out, parent);
                }
                ObjectMap::Join { parent, conditions } => {
                    rr(&mut out, "parentTriplesMap");
                    out.push(' ');
                    node_ref(&mut out, parent);
                    for jc in conditions {
                        out.push_str(" ; ");
                        rr(&mut out, "joinCondition");
                        out.push_str(" [ ");
                        rr(&mut out, "child");
                        out.push(' ');
                        string(&mut out, &jc.child);
                        out.push_str(" ; ");
                        rr(&mut out, "parent");
                        out.push(' ');
                        string(&mut out, &jc.parent);
                        out.push_str(" ]");
                    }
                }
            }
            out.push_str(" ] ]");
        }
        out.push_str(" .\n");
    }
    out
}
