//! RML mapping documents: parsing, validation and operator classification.

mod interpret;
mod model;
mod serialize;
pub mod template;
pub mod turtle;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use model::*;
pub use serialize::to_turtle;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MappingError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}:{col}: undeclared prefix '{prefix}:'")]
    UndeclaredPrefix { line: usize, col: usize, prefix: String },
    #[error("{line}:{col}: unknown vocabulary term <{term}>")]
    UnknownTerm { line: usize, col: usize, term: String },
    #[error("{line}:{col}: rr:parentTriplesMap references missing triples map '{id}'")]
    DanglingReference { line: usize, col: usize, id: String },
    #[error("{line}:{col}: unsupported construct: {construct}")]
    Unsupported { line: usize, col: usize, construct: String },
    #[error("{line}:{col}: {message}")]
    Invalid { line: usize, col: usize, message: String },
}

impl MappingError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            MappingError::Syntax { line, col, .. }
            | MappingError::UndeclaredPrefix { line, col, .. }
            | MappingError::UnknownTerm { line, col, .. }
            | MappingError::DanglingReference { line, col, .. }
            | MappingError::Unsupported { line, col, .. }
            | MappingError::Invalid { line, col, .. } => (*line, *col),
        }
    }
}

/// Parses an RML document into a resolved mapping set. Source paths are
/// kept as written; see [`load_mapping_file`] for path resolution.
pub fn parse_mapping(document: &str) -> Result<DataIntegrationSystem, MappingError> {
    let doc = turtle::parse_document(document)?;
    interpret::interpret(&doc)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Mapping {
        path: String,
        #[source]
        source: MappingError,
    },
}

/// Reads and parses a mapping file, resolving relative `rml:source` paths
/// against the file's directory.
pub fn load_mapping_file(path: &Path) -> Result<DataIntegrationSystem, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut dis = parse_mapping(&text).map_err(|source| LoadError::Mapping {
        path: path.display().to_string(),
        source,
    })?;
    if let Some(dir) = path.parent() {
        dis.resolve_sources(dir);
    }
    Ok(dis)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "SOM")]
    SimpleObject,
    #[serde(rename = "ORM")]
    ObjectReference,
    #[serde(rename = "OJM")]
    ObjectJoin,
}

impl OperatorKind {
    pub fn short_name(self) -> &'static str {
        match self {
            OperatorKind::SimpleObject => "SOM",
            OperatorKind::ObjectReference => "ORM",
            OperatorKind::ObjectJoin => "OJM",
        }
    }
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SOM" => Ok(OperatorKind::SimpleObject),
            "ORM" => Ok(OperatorKind::ObjectReference),
            "OJM" => Ok(OperatorKind::ObjectJoin),
            _ => Err(format!("unknown operator kind '{s}' (expected SOM|ORM|OJM)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("triples map '{child}' references '{parent}' without a join but their logical sources differ")]
    SourceMismatch { child: String, parent: String },
    #[error("predicate-object map of '{child}' references '{expected}' but parent '{given}' was supplied")]
    WrongParent { child: String, expected: String, given: String },
    #[error("predicate-object map of '{child}' references '{parent}' but no parent was supplied")]
    MissingParent { child: String, parent: String },
    #[error("predicate-object map of '{child}' has no parent but one was supplied")]
    UnexpectedParent { child: String },
}

/// Picks the physical operator for a predicate-object map.
pub fn classify_pom(
    pom: &PredicateObjectMap,
    child: &TriplesMap,
    parent: Option<&TriplesMap>,
) -> Result<OperatorKind, ClassifyError> {
    match (&pom.object, parent) {
        (ObjectMap::Simple(_), None) => Ok(OperatorKind::SimpleObject),
        (ObjectMap::Simple(_), Some(_)) => Err(ClassifyError::UnexpectedParent {
            child: child.id.clone(),
        }),
        (ObjectMap::Reference { parent: id } | ObjectMap::Join { parent: id, .. }, None) => {
            Err(ClassifyError::MissingParent {
                child: child.id.clone(),
                parent: id.clone(),
            })
        }
        (ObjectMap::Reference { parent: id } | ObjectMap::Join { parent: id, .. }, Some(p)) if *id != p.id => {
            Err(ClassifyError::WrongParent {
                child: child.id.clone(),
                expected: id.clone(),
                given: p.id.clone(),
            })
        }
        (ObjectMap::Join { .. }, Some(_)) => Ok(OperatorKind::ObjectJoin),
        (ObjectMap::Reference { .. }, Some(p)) => {
            if p.logical_source == child.logical_source {
                Ok(OperatorKind::ObjectReference)
            } else {
                Err(ClassifyError::SourceMismatch {
                    child: child.id.clone(),
                    parent: p.id.clone(),
                })
            }
        }
    }
}
