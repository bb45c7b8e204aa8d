//! Slow, direct reference implementations for checking the engine:
//! a CSV reader, template expansion, IRI encoding, exhaustive join
//! enumeration, N-Triples writing and an N-Triples parser. Nothing here
//! shares code with the engine.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

/// A CSV table read with a plain state machine (RFC 4180 quoting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn parse(text: &str) -> Table {
        let mut records: Vec<Vec<String>> = Vec::new();
        let mut field = String::new();
        let mut record = Vec::new();
        let mut quoted = false;
        let mut chars = text.chars().peekable();
        let mut any = false;
        while let Some(c) = chars.next() {
            any = true;
            if quoted {
                if c == '"' {
                    if chars.peek() == Some(&'"') {
                        chars.next();
                        field.push('"');
                    } else {
                        quoted = false;
                    }
                } else {
                    field.push(c);
                }
                continue;
            }
            match c {
                '"' => quoted = true,
                ',' => record.push(std::mem::take(&mut field)),
                '\r' => {}
                '\n' => {
                    record.push(std::mem::take(&mut field));
                    records.push(std::mem::take(&mut record));
                    any = false;
                }
                c => field.push(c),
            }
        }
        if any {
            record.push(field);
            records.push(record);
        }
        let mut it = records.into_iter();
        let header = it.next().unwrap_or_default();
        Table {
            header,
            rows: it.collect(),
        }
    }

    pub fn read(path: &std::path::Path) -> Table {
        Table::parse(&std::fs::read_to_string(path).expect("oracle input must be readable"))
    }

    /// Value of `attr` in `row`; absent or empty values are `None`.
    pub fn cell<'a>(&'a self, row: &'a [String], attr: &str) -> Option<&'a str> {
        let i = self.header.iter().position(|h| h == attr)?;
        row.get(i).map(String::as_str).filter(|v| !v.is_empty())
    }
}

/// Characters left unencoded in IRI templates: RFC 3987 `iunreserved`.
pub fn iunreserved(c: char) -> bool {
    const UCS: [(u32, u32); 17] = [
        (0xA0, 0xD7FF),
        (0xF900, 0xFDCF),
        (0xFDF0, 0xFFEF),
        (0x10000, 0x1FFFD),
        (0x20000, 0x2FFFD),
        (0x30000, 0x3FFFD),
        (0x40000, 0x4FFFD),
        (0x50000, 0x5FFFD),
        (0x60000, 0x6FFFD),
        (0x70000, 0x7FFFD),
        (0x80000, 0x8FFFD),
        (0x90000, 0x9FFFD),
        (0xA0000, 0xAFFFD),
        (0xB0000, 0xBFFFD),
        (0xC0000, 0xCFFFD),
        (0xD0000, 0xDFFFD),
        (0xE1000, 0xEFFFD),
    ];
    let u = c as u32;
    matches!(c, 'a'..='z' | 'A'..='Z' | '0'..='9' | '-' | '.' | '_' | '~') || UCS.iter().any(|&(lo, hi)| lo <= u && u <= hi)
}

pub fn iri_encode(value: &str) -> String {
    let mut out = String::new();
    for c in value.chars() {
        if iunreserved(c) {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                let _ = write!(out, "%{b:02X}");
            }
        }
    }
    out
}

/// Expands `{attr}` placeholders (with `\{`, `\}`, `\\` escapes).
pub fn expand(template: &str, lookup: impl Fn(&str) -> Option<String>, encode: bool) -> Option<String> {
    let mut out = String::new();
    let mut chars = template.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => out.push(chars.next()?),
            '{' => {
                let mut name = String::new();
                loop {
                    match chars.next()? {
                        '}' => break,
                        '\\' => name.push(chars.next()?),
                        c => name.push(c),
                    }
                }
                let v = lookup(&name)?;
                if encode {
                    out.push_str(&iri_encode(&v));
                } else {
                    out.push_str(&v);
                }
            }
            c => out.push(c),
        }
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Obj {
    Iri(String),
    Lit(String, Option<String>),
}

#[derive(Debug, Clone)]
pub enum ObjectSpec {
    Reference { attr: String, iri: bool, datatype: Option<String> },
    Template { template: String, iri: bool, datatype: Option<String> },
    Constant { value: String, iri: bool, datatype: Option<String> },
    /// Parent subject template evaluated on the child row.
    SameRow { parent_subject: String },
    /// Parent subject template evaluated on every parent row whose join
    /// attributes all equal the child's.
    Join {
        parent: Table,
        parent_subject: String,
        conditions: Vec<(String, String)>,
    },
}

#[derive(Debug, Clone)]
pub struct MapSpec {
    pub table: Table,
    pub subject: String,
    pub classes: Vec<String>,
    pub poms: Vec<(String, ObjectSpec)>,
}

const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

fn literal(v: String, dt: &Option<String>) -> Obj {
    Obj::Lit(v, dt.clone().filter(|d| d != XSD_STRING))
}

/// Calls `f` once per (map, row, POM) evaluation with every object it
/// yields, duplicates included. Join objects come one per matching parent
/// row.
fn evaluate(maps: &[MapSpec], mut f: impl FnMut(&str, &str, Vec<Obj>)) {
    for m in maps {
        for row in &m.table.rows {
            let get = |a: &str| m.table.cell(row, a).map(str::to_owned);
            let Some(s) = expand(&m.subject, get, true) else {
                continue;
            };
            for c in &m.classes {
                f(&s, RDF_TYPE, vec![Obj::Iri(c.clone())]);
            }
            for (p, o) in &m.poms {
                let objects: Vec<Obj> = match o {
                    ObjectSpec::Reference { attr, iri, datatype } => get(attr)
                        .map(|v| if *iri { Obj::Iri(v) } else { literal(v, datatype) })
                        .into_iter()
                        .collect(),
                    ObjectSpec::Template { template, iri, datatype } => expand(template, get, *iri)
                        .map(|v| if *iri { Obj::Iri(v) } else { literal(v, datatype) })
                        .into_iter()
                        .collect(),
                    ObjectSpec::Constant { value, iri, datatype } => {
                        vec![if *iri { Obj::Iri(value.clone()) } else { literal(value.clone(), datatype) }]
                    }
                    ObjectSpec::SameRow { parent_subject } => {
                        expand(parent_subject, get, true).map(Obj::Iri).into_iter().collect()
                    }
                    ObjectSpec::Join {
                        parent,
                        parent_subject,
                        conditions,
                    } => {
                        let child_key: Option<Vec<String>> = conditions.iter().map(|(c, _)| get(c)).collect();
                        let mut v = Vec::new();
                        let Some(child_key) = child_key else {
                            f(&s, p, v);
                            continue;
                        };
                        for prow in &parent.rows {
                            let all_match = conditions
                                .iter()
                                .zip(&child_key)
                                .all(|((_, pa), ck)| parent.cell(prow, pa) == Some(ck.as_str()));
                            if all_match {
                                let pget = |a: &str| parent.cell(prow, a).map(str::to_owned);
                                v.extend(expand(parent_subject, pget, true).map(Obj::Iri));
                            }
                        }
                        v
                    }
                };
                f(&s, p, objects);
            }
        }
    }
}

/// Every triple the maps produce, deduplicated by a set.
pub fn oracle_triples(maps: &[MapSpec]) -> BTreeSet<(String, String, Obj)> {
    let mut out = BTreeSet::new();
    evaluate(maps, |s, p, objects| {
        for o in objects {
            out.insert((s.to_owned(), p.to_owned(), o));
        }
    });
    out
}

/// Triples generated per predicate before any duplicate elimination. With
/// `distinct_join_subjects`, the objects of one join evaluation are counted
/// once per distinct parent subject (what an index holding subject sets
/// returns); otherwise once per matching parent row (a nested loop).
pub fn generated_counts(maps: &[MapSpec], distinct_join_subjects: bool) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    evaluate(maps, |_, p, objects| {
        let n = if distinct_join_subjects {
            objects.iter().collect::<BTreeSet<_>>().len()
        } else {
            objects.len()
        };
        *counts.entry(p.to_owned()).or_insert(0) += n as u64;
    });
    counts
}

fn write_iri(out: &mut String, iri: &str) {
    out.push('<');
    for c in iri.chars() {
        if c <= ' ' || "<>\"{}|^`\\".contains(c) {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

/// Canonical N-Triples line (with newline) for one triple.
pub fn ntriples_line(s: &str, p: &str, o: &Obj) -> String {
    let mut out = String::new();
    write_iri(&mut out, s);
    out.push(' ');
    write_iri(&mut out, p);
    out.push(' ');
    match o {
        Obj::Iri(i) => write_iri(&mut out, i),
        Obj::Lit(v, dt) => {
            out.push('"');
            for c in v.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    '\u{8}' => out.push_str("\\b"),
                    '\u{c}' => out.push_str("\\f"),
                    c if (c as u32) < 0x20 || c as u32 == 0x7F => {
                        let _ = write!(out, "\\u{:04X}", c as u32);
                    }
                    c => out.push(c),
                }
            }
            out.push('"');
            if let Some(dt) = dt {
                out.push_str("^^");
                write_iri(&mut out, dt);
            }
        }
    }
    out.push_str(" .\n");
    out
}

pub fn oracle_lines(maps: &[MapSpec]) -> BTreeSet<String> {
    oracle_triples(maps).iter().map(|(s, p, o)| ntriples_line(s, p, o)).collect()
}

/// One parsed N-Triples statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ParsedTriple {
    pub subject: String,
    pub predicate: String,
    pub object: Obj,
}

struct Cursor<'a> {
    s: &'a [char],
    i: usize,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.s.get(self.i).copied()
    }
    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        self.i += 1;
        c
    }
    fn ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.i += 1;
        }
    }
    fn expect(&mut self, c: char) -> Result<(), String> {
        match self.bump() {
            Some(x) if x == c => Ok(()),
            other => Err(format!("expected {c:?} at {}, found {other:?}", self.i - 1)),
        }
    }
    fn uchar(&mut self, n: usize) -> Result<char, String> {
        let mut v = 0u32;
        for _ in 0..n {
            let d = self.bump().and_then(|c| c.to_digit(16)).ok_or("bad hex digit in \\u escape")?;
            v = v * 16 + d;
        }
        char::from_u32(v).ok_or_else(|| format!("invalid code point {v:X}"))
    }
    fn iriref(&mut self) -> Result<String, String> {
        self.expect('<')?;
        let mut out = String::new();
        loop {
            match self.bump().ok_or("unterminated IRI")? {
                '>' => return Ok(out),
                '\\' => match self.bump() {
                    Some('u') => out.push(self.uchar(4)?),
                    Some('U') => out.push(self.uchar(8)?),
                    _ => return Err("bad escape in IRI".into()),
                },
                c if c <= ' ' || "<\"{}|^`".contains(c) => return Err(format!("character {c:?} not allowed in IRI")),
                c => out.push(c),
            }
        }
    }
    fn literal(&mut self) -> Result<Obj, String> {
        self.expect('"')?;
        let mut v = String::new();
        loop {
            match self.bump().ok_or("unterminated literal")? {
                '"' => break,
                '\\' => match self.bump().ok_or("dangling escape")? {
                    't' => v.push('\t'),
                    'b' => v.push('\u{8}'),
                    'n' => v.push('\n'),
                    'r' => v.push('\r'),
                    'f' => v.push('\u{c}'),
                    '"' => v.push('"'),
                    '\'' => v.push('\''),
                    '\\' => v.push('\\'),
                    'u' => v.push(self.uchar(4)?),
                    'U' => v.push(self.uchar(8)?),
                    c => return Err(format!("bad escape \\{c}")),
                },
                '\n' | '\r' => return Err("raw line break in literal".into()),
                c => v.push(c),
            }
        }
        let dt = if self.peek() == Some('^') {
            self.expect('^')?;
            self.expect('^')?;
            Some(self.iriref()?)
        } else {
            None
        };
        Ok(Obj::Lit(v, dt))
    }
}

/// Parses one N-Triples line (IRI subjects and predicates; no blank
/// nodes or language tags, which the engine never produces).
pub fn parse_ntriples_line(line: &str) -> Result<ParsedTriple, String> {
    let chars: Vec<char> = line.trim_end_matches('\n').chars().collect();
    let mut c = Cursor { s: &chars, i: 0 };
    c.ws();
    let subject = c.iriref()?;
    c.ws();
    let predicate = c.iriref()?;
    c.ws();
    let object = match c.peek() {
        Some('<') => Obj::Iri(c.iriref()?),
        Some('"') => c.literal()?,
        other => return Err(format!("unexpected object start {other:?}")),
    };
    c.ws();
    c.expect('.')?;
    c.ws();
    if c.peek().is_some() {
        return Err("trailing characters after '.'".into());
    }
    Ok(ParsedTriple {
        subject,
        predicate,
        object,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_reader() {
        let t = Table::parse("a,b\r\n\"x,\"\"y\"\"\",\n");
        assert_eq!(t.header, vec!["a", "b"]);
        assert_eq!(t.rows, vec![vec!["x,\"y\"".to_string(), String::new()]]);
        assert_eq!(t.cell(&t.rows[0], "b"), None);
    }

    #[test]
    fn encoder() {
        assert_eq!(iri_encode("x y/é"), "x%20y%2Fé");
    }

    #[test]
    fn parse_back() {
        let o = Obj::Lit("a\"b\nc\u{1}".into(), None);
        let l = ntriples_line("http://s", "http://p", &o);
        let t = parse_ntriples_line(&l).unwrap();
        assert_eq!(t.object, o);
        assert!(parse_ntriples_line("<a b> <p> <o> .").is_err());
    }
}

/// Oracle description of a parsed mapping. Only reads the model's fields;
/// all evaluation happens in [`oracle_triples`].
pub fn maps_from_system(dis: &rdfizer::DataIntegrationSystem) -> Vec<MapSpec> {
    use rdfizer::mapping::{ObjectMap, TermMap, TermMapKind, TermType};

    let table = |id: &str| {
        let m = dis.mapping(id).expect("parent exists");
        Table::read(&m.logical_source.source_path)
    };
    let object = |tm: &TermMap| {
        let iri = tm.term_type == TermType::Iri;
        let datatype = tm.datatype.clone();
        match tm.kind {
            TermMapKind::Reference => ObjectSpec::Reference {
                attr: tm.value.clone(),
                iri,
                datatype,
            },
            TermMapKind::Template => ObjectSpec::Template {
                template: tm.value.clone(),
                iri,
                datatype,
            },
            TermMapKind::Constant => ObjectSpec::Constant {
                value: tm.value.clone(),
                iri,
                datatype,
            },
        }
    };
    let subject_template = |id: &str| {
        let sm = &dis.mapping(id).expect("parent exists").subject_map;
        assert_eq!(sm.kind, TermMapKind::Template, "oracle supports template subjects only");
        sm.value.clone()
    };
    dis.mappings
        .iter()
        .map(|m| MapSpec {
            table: Table::read(&m.logical_source.source_path),
            subject: subject_template(&m.id),
            classes: m.subject_classes.clone(),
            poms: m
                .predicate_object_maps
                .iter()
                .map(|pom| {
                    let o = match &pom.object {
                        ObjectMap::Simple(tm) => object(tm),
                        ObjectMap::Reference { parent } => ObjectSpec::SameRow {
                            parent_subject: subject_template(parent),
                        },
                        ObjectMap::Join { parent, conditions } => ObjectSpec::Join {
                            parent: table(parent),
                            parent_subject: subject_template(parent),
                            conditions: conditions.iter().map(|c| (c.child.clone(), c.parent.clone())).collect(),
                        },
                    };
                    (pom.predicate.clone(), o)
                })
                .collect(),
        })
        .collect()
}
