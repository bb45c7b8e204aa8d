//! Turns parsed statements into triples maps. Every statement must be
//! consumed by some triples map; leftovers are reported as errors.

use std::collections::{HashMap, HashSet};

use super::model::*;
use super::turtle::{Document, Node, Pos, Statement};
use super::MappingError;
use crate::term::vocab::{QL, RDF_TYPE, RML, RR};

const SUPPORTED_RR: &[&str] = &[
    "subjectMap",
    "template",
    "constant",
    "class",
    "predicateObjectMap",
    "predicate",
    "objectMap",
    "parentTriplesMap",
    "joinCondition",
    "child",
    "parent",
    "datatype",
    "termType",
];
const SUPPORTED_RML: &[&str] = &["logicalSource", "source", "referenceFormulation", "iterator", "reference"];

/// Known R2RML/RML properties that this engine deliberately does not run.
fn unsupported_construct(predicate: &str) -> Option<&'static str> {
    let rr = predicate.strip_prefix(RR);
    let rml = predicate.strip_prefix(RML);
    match (rr, rml) {
        (Some("graph" | "graphMap"), _) => Some("named graph (rr:graph/rr:graphMap)"),
        (Some("logicalTable" | "tableName" | "sqlQuery" | "sqlVersion"), _) => Some("relational logical table"),
        (Some("language"), _) | (_, Some("languageMap")) => Some("language-tagged object map"),
        (Some("subject" | "object"), _) => Some("constant shortcut property (use rr:subjectMap/rr:objectMap)"),
        (Some("predicateMap"), _) => Some("predicate map (use rr:predicate)"),
        (Some("inverseExpression"), _) => Some("inverse expression"),
        (_, Some("query")) => Some("query-based logical source"),
        _ => None,
    }
}

fn is_supported(predicate: &str) -> bool {
    predicate == RDF_TYPE
        || predicate.strip_prefix(RR).is_some_and(|l| SUPPORTED_RR.contains(&l))
        || predicate.strip_prefix(RML).is_some_and(|l| SUPPORTED_RML.contains(&l))
}

fn rr(local: &str) -> String {
    format!("{RR}{local}")
}

fn rml(local: &str) -> String {
    format!("{RML}{local}")
}

fn invalid(pos: Pos, message: impl Into<String>) -> MappingError {
    MappingError::Invalid {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

/// Identifier used for triples maps and `rr:parentTriplesMap` references.
fn node_id(node: &Node) -> Option<String> {
    match node {
        Node::Iri(i) => Some(i.clone()),
        Node::Blank(b) => Some(format!("_:{b}")),
        Node::Literal { .. } => None,
    }
}

struct Graph<'d> {
    doc: &'d Document,
    by_subject: HashMap<&'d Node, Vec<usize>>,
    consumed: Vec<bool>,
}

impl<'d> Graph<'d> {
    fn new(doc: &'d Document) -> Self {
        let mut by_subject: HashMap<&Node, Vec<usize>> = HashMap::new();
        for (i, s) in doc.statements.iter().enumerate() {
            by_subject.entry(&s.subject).or_default().push(i);
        }
        Self {
            doc,
            by_subject,
            consumed: vec![false; doc.statements.len()],
        }
    }

    /// All statements `node predicate ?o`, marking them consumed.
    fn take(&mut self, node: &Node, predicate: &str) -> Vec<&'d Statement> {
        let Some(ids) = self.by_subject.get(node) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for &i in ids {
            let st = &self.doc.statements[i];
            if st.predicate == predicate {
                self.consumed[i] = true;
                out.push(st);
            }
        }
        out
    }

    fn take_one(&mut self, node: &Node, predicate: &str, at: Pos, what: &str) -> Result<Option<&'d Statement>, MappingError> {
        let mut found = self.take(node, predicate);
        match found.len() {
            0 => Ok(None),
            1 => Ok(found.pop()),
            _ => Err(invalid(found[1].pos, format!("{what}: more than one value (first declared at {}:{})", at.line, at.col))),
        }
    }

    fn require_one(&mut self, node: &Node, predicate: &str, at: Pos, what: &str) -> Result<&'d Statement, MappingError> {
        self.take_one(node, predicate, at, what)?
            .ok_or_else(|| invalid(at, format!("{what} is missing")))
    }

    fn first_pos(&self, node: &Node) -> Pos {
        self.by_subject
            .get(node)
            .and_then(|ids| ids.first())
            .map(|&i| self.doc.statements[i].pos)
            .unwrap_or_default()
    }

    fn consume_types(&mut self, node: &Node) {
        self.take(node, RDF_TYPE);
    }
}

fn literal_string<'a>(st: &'a Statement, what: &str) -> Result<&'a str, MappingError> {
    match &st.object {
        Node::Literal { lexical, datatype } if datatype.is_none() || datatype.as_deref() == Some(crate::term::vocab::XSD_STRING) => {
            Ok(lexical)
        }
        other => Err(invalid(st.pos, format!("{what} must be a string literal, found {}", other.describe()))),
    }
}

fn iri_object<'a>(st: &'a Statement, what: &str) -> Result<&'a str, MappingError> {
    match &st.object {
        Node::Iri(i) => Ok(i),
        other => Err(invalid(st.pos, format!("{what} must be an IRI, found {}", other.describe()))),
    }
}

fn resource_object<'a>(st: &'a Statement, what: &str) -> Result<&'a Node, MappingError> {
    match &st.object {
        Node::Literal { .. } => Err(invalid(st.pos, format!("{what} must be a node, found {}", st.object.describe()))),
        node => Ok(node),
    }
}

pub(super) fn interpret(doc: &Document) -> Result<DataIntegrationSystem, MappingError> {
    for st in &doc.statements {
        if is_supported(&st.predicate) {
            continue;
        }
        if let Some(c) = unsupported_construct(&st.predicate) {
            return Err(MappingError::Unsupported {
                line: st.pos.line,
                col: st.pos.col,
                construct: c.to_owned(),
            });
        }
        return Err(MappingError::UnknownTerm {
            line: st.pos.line,
            col: st.pos.col,
            term: st.predicate.clone(),
        });
    }

    // Triples maps: anything with a logical source or subject map, or typed rr:TriplesMap.
    let ls_pred = rml("logicalSource");
    let sm_pred = rr("subjectMap");
    let tm_type = rr("TriplesMap");
    let mut seen = HashSet::new();
    let mut tm_nodes: Vec<&Node> = Vec::new();
    for st in &doc.statements {
        let is_tm = st.predicate == ls_pred
            || st.predicate == sm_pred
            || (st.predicate == RDF_TYPE && st.object == Node::Iri(tm_type.clone()));
        if is_tm && seen.insert(&st.subject) {
            tm_nodes.push(&st.subject);
        }
    }
    let tm_ids: HashSet<String> = tm_nodes.iter().filter_map(|n| node_id(n)).collect();

    let mut graph = Graph::new(doc);
    let mut mappings = Vec::with_capacity(tm_nodes.len());
    for node in tm_nodes {
        mappings.push(triples_map(&mut graph, node, &tm_ids)?);
    }

    // rdf:type on nodes reached through the maps is informational only.
    for st in &doc.statements {
        if st.predicate == RDF_TYPE {
            graph.consume_types(&st.subject);
        }
    }
    if let Some(i) = graph.consumed.iter().position(|c| !c) {
        let st = &doc.statements[i];
        return Err(invalid(
            st.pos,
            format!("statement about {} is not part of any triples map", st.subject.describe()),
        ));
    }

    Ok(DataIntegrationSystem::new(doc.prefixes.clone(), mappings))
}

fn triples_map(g: &mut Graph<'_>, node: &Node, tm_ids: &HashSet<String>) -> Result<TriplesMap, MappingError> {
    let at = g.first_pos(node);
    let id = node_id(node).expect("triples map subjects are never literals");
    g.consume_types(node);

    let ls_st = g.require_one(node, &rml("logicalSource"), at, &format!("rml:logicalSource of {id}"))?;
    let ls_node = resource_object(ls_st, "rml:logicalSource")?;
    let logical_source = logical_source(g, ls_node, ls_st.pos)?;

    let sm_st = g.require_one(node, &rr("subjectMap"), at, &format!("rr:subjectMap of {id}"))?;
    let sm_node = resource_object(sm_st, "rr:subjectMap")?;
    let (subject_map, subject_classes) = subject_map(g, sm_node, sm_st.pos)?;

    let mut predicate_object_maps = Vec::new();
    for pom_st in g.take(node, &rr("predicateObjectMap")) {
        let pom_node = resource_object(pom_st, "rr:predicateObjectMap")?;
        predicate_object_maps.extend(predicate_object_map(g, pom_node, pom_st.pos, tm_ids)?);
    }

    Ok(TriplesMap {
        id,
        logical_source,
        subject_map,
        subject_classes,
        predicate_object_maps,
    })
}

fn logical_source(g: &mut Graph<'_>, node: &Node, at: Pos) -> Result<LogicalSource, MappingError> {
    g.consume_types(node);
    let src = g.require_one(node, &rml("source"), at, "rml:source")?;
    let source_path = literal_string(src, "rml:source")?.into();
    let rf_st = g.require_one(node, &rml("referenceFormulation"), at, "rml:referenceFormulation")?;
    let rf = iri_object(rf_st, "rml:referenceFormulation")?;
    let reference_formulation = match rf.strip_prefix(QL) {
        Some("CSV") => ReferenceFormulation::Csv,
        Some("JSONPath") => ReferenceFormulation::JsonPath,
        Some("XPath") => {
            return Err(MappingError::Unsupported {
                line: rf_st.pos.line,
                col: rf_st.pos.col,
                construct: "XML logical source (ql:XPath)".into(),
            })
        }
        _ => {
            return Err(MappingError::UnknownTerm {
                line: rf_st.pos.line,
                col: rf_st.pos.col,
                term: rf.to_owned(),
            })
        }
    };
    let iterator = match g.take_one(node, &rml("iterator"), at, "rml:iterator")? {
        Some(st) => Some((st.pos, literal_string(st, "rml:iterator")?.to_owned())),
        None => None,
    };
    match (reference_formulation, &iterator) {
        (ReferenceFormulation::Csv, Some((pos, _))) => Err(invalid(*pos, "CSV logical sources take no rml:iterator")),
        (ReferenceFormulation::JsonPath, None) => Err(invalid(at, "JSONPath logical sources require rml:iterator")),
        _ => Ok(LogicalSource {
            source_path,
            reference_formulation,
            iterator: iterator.map(|(_, it)| it),
        }),
    }
}

fn term_type(g: &mut Graph<'_>, node: &Node, at: Pos) -> Result<Option<(TermType, Pos)>, MappingError> {
    let Some(st) = g.take_one(node, &rr("termType"), at, "rr:termType")? else {
        return Ok(None);
    };
    match iri_object(st, "rr:termType")?.strip_prefix(RR) {
        Some("IRI") => Ok(Some((TermType::Iri, st.pos))),
        Some("Literal") => Ok(Some((TermType::Literal, st.pos))),
        Some("BlankNode") => Err(MappingError::Unsupported {
            line: st.pos.line,
            col: st.pos.col,
            construct: "blank node term type".into(),
        }),
        _ => Err(MappingError::UnknownTerm {
            line: st.pos.line,
            col: st.pos.col,
            term: iri_object(st, "rr:termType")?.to_owned(),
        }),
    }
}

/// Reads the one value-producing property of a term map. `default_type`
/// gives the term type for (reference, template, IRI constant, literal constant).
fn value_term_map(
    g: &mut Graph<'_>,
    node: &Node,
    at: Pos,
    defaults: [TermType; 4],
) -> Result<Option<TermMap>, MappingError> {
    let tt = term_type(g, node, at)?;
    let reference = g.take_one(node, &rml("reference"), at, "rml:reference")?;
    let template = g.take_one(node, &rr("template"), at, "rr:template")?;
    let constant = g.take_one(node, &rr("constant"), at, "rr:constant")?;
    let given: Vec<_> = [reference, template, constant].into_iter().flatten().collect();
    if given.len() > 1 {
        return Err(invalid(given[1].pos, "term map has more than one of rml:reference, rr:template, rr:constant"));
    }
    let mut tm = if let Some(st) = reference {
        TermMap::reference(literal_string(st, "rml:reference")?, tt.map_or(defaults[0], |t| t.0))
    } else if let Some(st) = template {
        let src = literal_string(st, "rr:template")?;
        TermMap::template(src, tt.map_or(defaults[1], |t| t.0))
            .map_err(|e| invalid(st.pos, format!("malformed template {src:?}: {e}")))?
    } else if let Some(st) = constant {
        match &st.object {
            Node::Iri(i) => {
                if let Some((TermType::Literal, pos)) = tt {
                    return Err(invalid(pos, "IRI constant cannot have rr:termType rr:Literal"));
                }
                TermMap::constant(i, defaults[2])
            }
            Node::Literal { lexical, datatype } => {
                if let Some((TermType::Iri, _)) = tt {
                    TermMap::constant(lexical, TermType::Iri)
                } else {
                    let tm = TermMap::constant(lexical, defaults[3]);
                    match datatype {
                        Some(dt) => tm.with_datatype(dt),
                        None => tm,
                    }
                }
            }
            Node::Blank(_) => return Err(invalid(st.pos, "rr:constant must be an IRI or literal")),
        }
    } else {
        if let Some((_, pos)) = tt {
            return Err(invalid(pos, "rr:termType without a value-producing property"));
        }
        return Ok(None);
    };
    if let Some(st) = g.take_one(node, &rr("datatype"), at, "rr:datatype")? {
        let dt = iri_object(st, "rr:datatype")?;
        if tm.term_type == TermType::Iri {
            if tt.is_some() || tm.kind == TermMapKind::Constant {
                return Err(invalid(st.pos, "rr:datatype requires a literal term map"));
            }
            tm.term_type = TermType::Literal;
        }
        if tm.datatype.is_some() {
            return Err(invalid(st.pos, "typed literal constant cannot take rr:datatype"));
        }
        tm.datatype = Some(dt.to_owned());
    }
    Ok(Some(tm))
}

fn subject_map(g: &mut Graph<'_>, node: &Node, at: Pos) -> Result<(TermMap, Vec<String>), MappingError> {
    g.consume_types(node);
    let tm = value_term_map(g, node, at, [TermType::Iri; 4])?
        .ok_or_else(|| invalid(at, "subject map needs rr:template, rml:reference or rr:constant"))?;
    if tm.term_type != TermType::Iri || tm.datatype.is_some() {
        return Err(invalid(at, "subject maps must produce IRIs"));
    }
    let mut classes = Vec::new();
    for st in g.take(node, &rr("class")) {
        classes.push(iri_object(st, "rr:class")?.to_owned());
    }
    Ok((tm, classes))
}

fn predicate_object_map(
    g: &mut Graph<'_>,
    node: &Node,
    at: Pos,
    tm_ids: &HashSet<String>,
) -> Result<Vec<PredicateObjectMap>, MappingError> {
    g.consume_types(node);
    let predicates = g.take(node, &rr("predicate"));
    if predicates.is_empty() {
        return Err(invalid(at, "predicate-object map without rr:predicate"));
    }
    let object_sts = g.take(node, &rr("objectMap"));
    if object_sts.is_empty() {
        return Err(invalid(at, "predicate-object map without rr:objectMap"));
    }
    let mut objects = Vec::with_capacity(object_sts.len());
    for st in object_sts {
        objects.push(object_map(g, resource_object(st, "rr:objectMap")?, st.pos, tm_ids)?);
    }
    let mut out = Vec::with_capacity(predicates.len() * objects.len());
    for p in predicates {
        let predicate = iri_object(p, "rr:predicate")?;
        for o in &objects {
            out.push(PredicateObjectMap {
                predicate: predicate.to_owned(),
                object: o.clone(),
            });
        }
    }
    Ok(out)
}

fn object_map(g: &mut Graph<'_>, node: &Node, at: Pos, tm_ids: &HashSet<String>) -> Result<ObjectMap, MappingError> {
    g.consume_types(node);
    if let Some(st) = g.take_one(node, &rr("parentTriplesMap"), at, "rr:parentTriplesMap")? {
        let parent = node_id(resource_object(st, "rr:parentTriplesMap")?).expect("resource node");
        if !tm_ids.contains(&parent) {
            return Err(MappingError::DanglingReference {
                line: st.pos.line,
                col: st.pos.col,
                id: parent,
            });
        }
        for p in ["rml:reference", "rr:template", "rr:constant", "rr:termType", "rr:datatype"] {
            let (ns, local) = p.split_once(':').unwrap();
            let iri = if ns == "rr" { rr(local) } else { rml(local) };
            if let Some(other) = g.take(node, &iri).first() {
                return Err(invalid(other.pos, format!("{p} cannot be combined with rr:parentTriplesMap")));
            }
        }
        let jc_sts = g.take(node, &rr("joinCondition"));
        if jc_sts.is_empty() {
            return Ok(ObjectMap::Reference { parent });
        }
        let mut conditions = Vec::with_capacity(jc_sts.len());
        for jc in jc_sts {
            let jc_node = resource_object(jc, "rr:joinCondition")?;
            g.consume_types(jc_node);
            let child = g.require_one(jc_node, &rr("child"), jc.pos, "rr:child")?;
            let par = g.require_one(jc_node, &rr("parent"), jc.pos, "rr:parent")?;
            let child = literal_string(child, "rr:child")?;
            let par = literal_string(par, "rr:parent")?;
            if child.is_empty() || par.is_empty() {
                return Err(invalid(jc.pos, "join condition attributes must be non-empty"));
            }
            conditions.push(JoinCondition::new(child, par));
        }
        return Ok(ObjectMap::Join { parent, conditions });
    }
    if let Some(jc) = g.take(node, &rr("joinCondition")).first() {
        return Err(invalid(jc.pos, "rr:joinCondition requires rr:parentTriplesMap"));
    }
    let tm = value_term_map(
        g,
        node,
        at,
        [TermType::Literal, TermType::Iri, TermType::Iri, TermType::Literal],
    )?
    .ok_or_else(|| invalid(at, "object map needs rml:reference, rr:template, rr:constant or rr:parentTriplesMap"))?;
    Ok(ObjectMap::Simple(tm))
}
