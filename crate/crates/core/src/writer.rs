//! Incremental N-Triples output. Each PTT has an emission cursor holding
//! the timestamp of the last entry written; an emission writes exactly the
//! newer log entries and advances the cursor only after the sink accepted
//! and flushed them.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;

use thiserror::Error;

use crate::structures::PredicateTupleTable;
use crate::term::{vocab, Term, TermRef};

#[derive(Debug, Error)]
pub enum WriteError {
    #[error("IRI <{iri}> contains control character U+{code:04X}")]
    IllegalIri { iri: String, code: u32 },
    #[error("output I/O error: {0}")]
    Io(#[from] std::io::Error),
}

fn push_iri(out: &mut String, iri: &str) -> Result<(), WriteError> {
    out.push('<');
    for c in iri.chars() {
        match c {
            '\u{0}'..='\u{1f}' => {
                return Err(WriteError::IllegalIri {
                    iri: iri.to_owned(),
                    code: c as u32,
                })
            }
            ' ' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('>');
    Ok(())
}

fn push_literal(out: &mut String, lexical: &str) {
    out.push('"');
    for c in lexical.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            '\u{0}'..='\u{1f}' | '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

/// Appends one canonical N-Triples line (with trailing newline) to `out`.
/// On error `out` may hold a partial line.
pub fn write_ntriples_line(out: &mut String, subject: &str, predicate: &str, object: &Term) -> Result<(), WriteError> {
    write_line(out, subject, predicate, object.as_ref())
}

fn write_line(out: &mut String, subject: &str, predicate: &str, object: TermRef<'_>) -> Result<(), WriteError> {
    push_iri(out, subject)?;
    out.push(' ');
    push_iri(out, predicate)?;
    out.push(' ');
    match object {
        TermRef::Iri(o) => push_iri(out, o)?,
        TermRef::Literal { lexical, datatype } => {
            push_literal(out, lexical);
            if let Some(dt) = datatype.filter(|dt| *dt != vocab::XSD_STRING) {
                out.push_str("^^");
                push_iri(out, dt)?;
            }
        }
    }
    out.push_str(" .\n");
    Ok(())
}

pub fn serialize_ntriples(subject: &str, predicate: &str, object: &Term) -> Result<String, WriteError> {
    let mut out = String::new();
    write_ntriples_line(&mut out, subject, predicate, object)?;
    Ok(out)
}

/// Timestamp of the last entry emitted from one PTT.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct EmissionCursor(u64);

impl EmissionCursor {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn at(timestamp: u64) -> Self {
        Self(timestamp)
    }

    pub fn timestamp(self) -> u64 {
        self.0
    }
}

/// Writes every entry of `ptt` newer than `cursor`, in timestamp order,
/// then flushes and advances the cursor. Nothing is written and the cursor
/// stays put if any entry fails to serialize or the sink fails.
pub fn emit_incremental<W: Write + ?Sized>(
    ptt: &PredicateTupleTable,
    cursor: &mut EmissionCursor,
    sink: &mut W,
) -> Result<usize, WriteError> {
    let pending = ptt.entries_after(cursor.0);
    let count = pending.len();
    if count == 0 {
        return Ok(0);
    }
    let mut chunk = String::new();
    for e in pending {
        write_line(&mut chunk, e.subject, ptt.predicate(), e.object)?;
    }
    sink.write_all(chunk.as_bytes())?;
    sink.flush()?;
    *cursor = EmissionCursor(ptt.last_timestamp());
    Ok(count)
}

/// Output graph with one cursor per PTT, keyed by predicate.
pub struct KgWriter<W: Write> {
    sink: W,
    cursors: HashMap<String, EmissionCursor>,
    lines: u64,
}

impl<W: Write> KgWriter<W> {
    pub fn new(sink: W) -> Self {
        Self {
            sink,
            cursors: HashMap::new(),
            lines: 0,
        }
    }

    pub fn emit(&mut self, ptt: &PredicateTupleTable) -> Result<usize, WriteError> {
        let cursor = self.cursors.entry(ptt.predicate().to_owned()).or_default();
        let n = emit_incremental(ptt, cursor, &mut self.sink)?;
        self.lines += n as u64;
        Ok(n)
    }

    pub fn cursor(&self, predicate: &str) -> EmissionCursor {
        self.cursors.get(predicate).copied().unwrap_or_default()
    }

    /// Writes pre-serialized lines (naive mode output).
    pub fn write_lines<'a>(&mut self, lines: impl IntoIterator<Item = &'a str>) -> Result<(), WriteError> {
        for l in lines {
            self.sink.write_all(l.as_bytes())?;
            self.lines += 1;
        }
        Ok(())
    }

    pub fn lines_written(&self) -> u64 {
        self.lines
    }

    pub fn finish(mut self) -> Result<W, WriteError> {
        self.sink.flush()?;
        Ok(self.sink)
    }
}
