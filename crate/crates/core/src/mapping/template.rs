//! `rr:template` strings: literal text interleaved with `{attribute}`
//! placeholders. `\{`, `\}` and `\\` escape the literal characters.

use std::fmt::Write as _;

use thiserror::Error;

use crate::ingest::Record;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("unbalanced '{{' at byte {0}")]
    UnclosedBrace(usize),
    #[error("unexpected '}}' at byte {0}")]
    StrayCloseBrace(usize),
    #[error("empty placeholder at byte {0}")]
    EmptyPlaceholder(usize),
    #[error("nested '{{' inside placeholder at byte {0}")]
    NestedBrace(usize),
    #[error("dangling escape at end of template")]
    DanglingEscape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Segment {
    Text(String),
    Attribute(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    segments: Vec<Segment>,
}

impl Template {
    pub fn parse(src: &str) -> Result<Self, TemplateError> {
        let mut segments = Vec::new();
        let mut text = String::new();
        let mut chars = src.char_indices();
        while let Some((pos, c)) = chars.next() {
            match c {
                '\\' => match chars.next() {
                    Some((_, e)) => text.push(e),
                    None => return Err(TemplateError::DanglingEscape),
                },
                '{' => {
                    let mut name = String::new();
                    let mut closed = false;
                    for (p, c) in chars.by_ref() {
                        match c {
                            '}' => {
                                closed = true;
                                break;
                            }
                            '{' => return Err(TemplateError::NestedBrace(p)),
                            _ => name.push(c),
                        }
                    }
                    if !closed {
                        return Err(TemplateError::UnclosedBrace(pos));
                    }
                    if name.is_empty() {
                        return Err(TemplateError::EmptyPlaceholder(pos));
                    }
                    if !text.is_empty() {
                        segments.push(Segment::Text(std::mem::take(&mut text)));
                    }
                    segments.push(Segment::Attribute(name));
                }
                '}' => return Err(TemplateError::StrayCloseBrace(pos)),
                _ => text.push(c),
            }
        }
        if !text.is_empty() {
            segments.push(Segment::Text(text));
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.segments.iter().filter_map(|s| match s {
            Segment::Attribute(a) => Some(a.as_str()),
            Segment::Text(_) => None,
        })
    }

    /// Substitutes record values. With `iri_safe`, substituted values are
    /// percent-encoded outside the iunreserved set; literal text is copied
    /// verbatim. Returns `None` when any placeholder is absent or empty.
    pub fn expand(&self, record: &Record, iri_safe: bool) -> Option<String> {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Attribute(a) => {
                    let v = record.value(a)?;
                    if iri_safe {
                        percent_encode_into(v, &mut out);
                    } else {
                        out.push_str(v);
                    }
                }
            }
        }
        Some(out)
    }

    /// Re-serializes to the escaped source form.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for seg in &self.segments {
            match seg {
                Segment::Text(t) => {
                    for c in t.chars() {
                        if matches!(c, '{' | '}' | '\\') {
                            out.push('\\');
                        }
                        out.push(c);
                    }
                }
                Segment::Attribute(a) => {
                    out.push('{');
                    out.push_str(a);
                    out.push('}');
                }
            }
        }
        out
    }
}

/// RFC 3987 `iunreserved`: ALPHA / DIGIT / "-" / "." / "_" / "~" / ucschar.
pub fn is_iunreserved(c: char) -> bool {
    if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_' | '~') {
        return true;
    }
    let cp = c as u32;
    matches!(cp,
        0xA0..=0xD7FF
        | 0xF900..=0xFDCF
        | 0xFDF0..=0xFFEF)
        || (cp >= 0x10000 && cp <= 0xEFFFD && (cp & 0xFFFF) <= 0xFFFD)
}

pub fn percent_encode_into(value: &str, out: &mut String) {
    let mut buf = [0u8; 4];
    for c in value.chars() {
        if is_iunreserved(c) {
            out.push(c);
        } else {
            for b in c.encode_utf8(&mut buf).bytes() {
                let _ = write!(out, "%{b:02X}");
            }
        }
    }
}

pub fn percent_encode(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    percent_encode_into(value, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(pairs: &[(&str, &str)]) -> Record {
        Record::from_pairs(pairs.iter().copied(), 0)
    }

    #[test]
    fn expands_iasis_template() {
        let t = Template::parse("http://iasis.eu/{uniprot}_{enst}").unwrap();
        let r = rec(&[("uniprot", "Q8WU90"), ("enst", "ENST00000415827")]);
        assert_eq!(
            t.expand(&r, true).as_deref(),
            Some("http://iasis.eu/Q8WU90_ENST00000415827")
        );
    }

    #[test]
    fn empty_value_yields_none() {
        let t = Template::parse("{a}").unwrap();
        assert_eq!(t.expand(&rec(&[("a", "")]), true), None);
        assert_eq!(t.expand(&rec(&[("b", "x")]), true), None);
    }

    #[test]
    fn spaces_are_percent_encoded_in_values_only() {
        let t = Template::parse("ex:{a} {b}").unwrap();
        let r = rec(&[("a", "x y"), ("b", "z")]);
        assert_eq!(t.expand(&r, true).as_deref(), Some("ex:x%20y z"));
        assert_eq!(t.expand(&r, false).as_deref(), Some("ex:x y z"));
    }

    #[test]
    fn ucschar_passes_reserved_encodes() {
        assert_eq!(percent_encode("é/ü?#"), "é%2Fü%3F%23");
        assert_eq!(percent_encode("\u{E000}"), "%EE%80%80");
    }

    #[test]
    fn malformed_templates() {
        assert_eq!(Template::parse("a{b"), Err(TemplateError::UnclosedBrace(1)));
        assert_eq!(Template::parse("a}b"), Err(TemplateError::StrayCloseBrace(1)));
        assert_eq!(Template::parse("{}"), Err(TemplateError::EmptyPlaceholder(0)));
        assert_eq!(Template::parse("{a{b}}"), Err(TemplateError::NestedBrace(2)));
        assert_eq!(Template::parse("x\\"), Err(TemplateError::DanglingEscape));
    }

    #[test]
    fn escaped_braces_round_trip() {
        let t = Template::parse(r"a\{b\}{c}\\").unwrap();
        assert_eq!(
            t.segments(),
            &[
                Segment::Text("a{b}".into()),
                Segment::Attribute("c".into()),
                Segment::Text("\\".into())
            ]
        );
        assert_eq!(Template::parse(&t.to_source()).unwrap(), t);
    }
}
