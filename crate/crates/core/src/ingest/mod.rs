//! Record streams over CSV and JSON logical sources.

mod jsonpath;
mod record;

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::sync::Arc;

use serde_json::Value;
use thiserror::Error;

use crate::mapping::{LogicalSource, ReferenceFormulation};
pub use jsonpath::{JsonPath, Step};
pub use record::{project_attributes, Record, Schema};

/// Read-buffer size for source files.
pub const READ_BUFFER_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("cannot open source {path}: {message}")]
    Open { path: String, message: String },
    #[error("I/O error reading source: {0}")]
    Io(String),
    #[error("malformed CSV row at line {line}: expected {expected} fields, found {found}")]
    RowWidth { line: u64, expected: u64, found: u64 },
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("duplicate column name '{0}'")]
    DuplicateAttribute(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("invalid iterator '{expr}': {reason}")]
    InvalidIterator { expr: String, reason: String },
    #[error("iterator selects a {0}, expected an array")]
    IteratorNotArray(&'static str),
    #[error("iterator element {index} is a {kind}, expected an object")]
    ElementNotObject { index: usize, kind: &'static str },
    #[error("JSON sources need an rml:iterator")]
    MissingIterator,
}

/// Counters describing the reader's working set, for checking that
/// iteration stays bounded independent of file size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ReaderTelemetry {
    pub records: u64,
    /// Largest single record, in bytes of field data.
    pub peak_record_bytes: usize,
    pub read_buffer_bytes: usize,
}

/// Records of one logical source, in file order.
pub struct RecordStream {
    inner: Inner,
    telemetry: ReaderTelemetry,
}

enum Inner {
    Csv {
        reader: csv::Reader<Box<dyn Read>>,
        schema: Arc<Schema>,
        buf: csv::StringRecord,
        done: bool,
    },
    Json(std::vec::IntoIter<Record>),
    Failed(Option<SourceError>),
}

impl RecordStream {
    pub fn telemetry(&self) -> ReaderTelemetry {
        self.telemetry
    }

    /// CSV records from any reader (RFC 4180, header row required).
    pub fn csv(reader: impl Read + 'static) -> Self {
        let boxed: Box<dyn Read> = Box::new(reader);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .buffer_capacity(READ_BUFFER_BYTES)
            .from_reader(boxed);
        let telemetry = ReaderTelemetry {
            read_buffer_bytes: READ_BUFFER_BYTES,
            ..Default::default()
        };
        let headers = match reader.headers() {
            Ok(h) => h.iter().map(str::to_owned).collect::<Vec<_>>(),
            Err(e) => return Self::failed(csv_error(e), telemetry),
        };
        let schema = match Schema::new(headers) {
            Ok(s) => Arc::new(s),
            Err(dup) => return Self::failed(SourceError::DuplicateAttribute(dup), telemetry),
        };
        Self {
            inner: Inner::Csv {
                reader,
                schema,
                buf: csv::StringRecord::new(),
                done: false,
            },
            telemetry,
        }
    }

    /// JSON records selected by `iterator` from a complete document.
    pub fn json(bytes: &[u8], iterator: &str) -> Self {
        let telemetry = ReaderTelemetry::default();
        match json_records(bytes, iterator) {
            Ok(records) => {
                let peak = records
                    .iter()
                    .map(|r| r.iter().map(|(_, v)| v.len()).sum::<usize>())
                    .max()
                    .unwrap_or(0);
                Self {
                    inner: Inner::Json(records.into_iter()),
                    telemetry: ReaderTelemetry {
                        peak_record_bytes: peak,
                        read_buffer_bytes: bytes.len(),
                        ..telemetry
                    },
                }
            }
            Err(e) => Self::failed(e, telemetry),
        }
    }

    fn failed(e: SourceError, telemetry: ReaderTelemetry) -> Self {
        Self {
            inner: Inner::Failed(Some(e)),
            telemetry,
        }
    }
}

fn csv_error(e: csv::Error) -> SourceError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => SourceError::RowWidth {
            line,
            expected: *expected_len,
            found: *len,
        },
        csv::ErrorKind::Io(io) => SourceError::Io(io.to_string()),
        _ => SourceError::Csv {
            line,
            message: e.to_string(),
        },
    }
}

impl Iterator for RecordStream {
    type Item = Result<Record, SourceError>;

    fn next(&mut self) -> Option<Self::Item> {
        match &mut self.inner {
            Inner::Csv {
                reader,
                schema,
                buf,
                done,
            } => {
                if *done {
                    return None;
                }
                match reader.read_record(buf) {
                    Ok(true) => {
                        let bytes = buf.as_slice().len();
                        self.telemetry.peak_record_bytes = self.telemetry.peak_record_bytes.max(bytes);
                        let ordinal = self.telemetry.records;
                        self.telemetry.records += 1;
                        let values = buf.iter().map(str::to_owned).collect();
                        Some(Ok(Record::new(Arc::clone(schema), values, ordinal)))
                    }
                    Ok(false) => {
                        *done = true;
                        None
                    }
                    Err(e) => {
                        *done = true;
                        Some(Err(csv_error(e)))
                    }
                }
            }
            Inner::Json(it) => {
                let r = it.next()?;
                self.telemetry.records += 1;
                Some(Ok(r))
            }
            Inner::Failed(e) => e.take().map(Err),
        }
    }
}

/// Opens a logical source for streaming. The path is used as is; relative
/// paths are resolved by [`crate::mapping::load_mapping_file`].
pub fn open_source(ls: &LogicalSource) -> Result<RecordStream, SourceError> {
    let path: &Path = &ls.source_path;
    let open_err = |e: std::io::Error| SourceError::Open {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    match ls.reference_formulation {
        ReferenceFormulation::Csv => {
            let file = File::open(path).map_err(open_err)?;
            let stream = RecordStream::csv(BufReader::with_capacity(READ_BUFFER_BYTES, file));
            if let Inner::Failed(Some(e)) = &stream.inner {
                return Err(e.clone());
            }
            Ok(stream)
        }
        ReferenceFormulation::JsonPath => {
            let iterator = ls.iterator.as_deref().ok_or(SourceError::MissingIterator)?;
            let bytes = std::fs::read(path).map_err(open_err)?;
            Ok(RecordStream::json(&bytes, iterator))
        }
    }
}

/// Parses a JSON document and extracts the iterator's objects as records.
/// Nested objects are flattened with dotted names; arrays and nulls are
/// dropped; other scalars keep their JSON text.
pub fn json_records(bytes: &[u8], iterator: &str) -> Result<Vec<Record>, SourceError> {
    let path = JsonPath::parse(iterator)?;
    let root: Value = serde_json::from_slice(bytes).map_err(|e| SourceError::Json(e.to_string()))?;
    let selected = path.select(&root)?;
    let mut out = Vec::with_capacity(selected.len());
    for (index, v) in selected.into_iter().enumerate() {
        let Value::Object(map) = v else {
            return Err(SourceError::ElementNotObject {
                index,
                kind: jsonpath::kind_of(v),
            });
        };
        let mut names = Vec::new();
        let mut values = Vec::new();
        flatten("", map, &mut names, &mut values);
        // Flattened names can collide, e.g. {"a.b":1,"a":{"b":2}}.
        let schema = Schema::new(names).map_err(SourceError::DuplicateAttribute)?;
        out.push(Record::new(Arc::new(schema), values, index as u64));
    }
    Ok(out)
}

fn flatten(
    prefix: &str,
    map: &serde_json::Map<String, Value>,
    names: &mut Vec<String>,
    values: &mut Vec<String>,
) {
    for (k, v) in map {
        let name = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Null | Value::Array(_) => {}
            Value::Bool(b) => {
                names.push(name);
                values.push(b.to_string());
            }
            Value::Number(n) => {
                names.push(name);
                values.push(n.to_string());
            }
            Value::String(s) => {
                names.push(name);
                values.push(s.clone());
            }
            Value::Object(inner) => flatten(&name, inner, names, values),
        }
    }
}
