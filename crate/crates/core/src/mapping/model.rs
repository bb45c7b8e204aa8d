use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::template::{Template, TemplateError};
use crate::ingest::Record;
use crate::term::{vocab, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Optimized,
    Naive,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimized" => Ok(Mode::Optimized),
            "naive" => Ok(Mode::Naive),
            other => Err(format!("unknown mode '{other}' (expected optimized|naive)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Optimized => "optimized",
            Mode::Naive => "naive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReferenceFormulation {
    Csv,
    JsonPath,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LogicalSource {
    pub source_path: PathBuf,
    pub reference_formulation: ReferenceFormulation,
    /// JSON only.
    pub iterator: Option<String>,
}

impl LogicalSource {
    pub fn csv(path: impl Into<PathBuf>) -> Self {
        Self {
            source_path: path.into(),
            reference_formulation: ReferenceFormulation::Csv,
            iterator: None,
        }
    }

    pub fn json(path: impl Into<PathBuf>, iterator: impl Into<String>) -> Self {
        Self {
            source_path: path.into(),
            reference_formulation: ReferenceFormulation::JsonPath,
            iterator: Some(iterator.into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermMapKind {
    Constant,
    Reference,
    Template,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermType {
    Iri,
    Literal,
}

/// A constant, reference or template term map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermMap {
    pub kind: TermMapKind,
    /// Constant IRI/lexical form, attribute name, or template source.
    pub value: String,
    pub term_type: TermType,
    pub datatype: Option<String>,
    compiled: Option<Template>,
}

impl TermMap {
    pub fn constant(value: impl Into<String>, term_type: TermType) -> Self {
        Self {
            kind: TermMapKind::Constant,
            value: value.into(),
            term_type,
            datatype: None,
            compiled: None,
        }
    }

    pub fn reference(attr: impl Into<String>, term_type: TermType) -> Self {
        Self {
            kind: TermMapKind::Reference,
            value: attr.into(),
            term_type,
            datatype: None,
            compiled: None,
        }
    }

    pub fn template(src: impl Into<String>, term_type: TermType) -> Result<Self, TemplateError> {
        let value = src.into();
        let compiled = Template::parse(&value)?;
        Ok(Self {
            kind: TermMapKind::Template,
            value,
            term_type,
            datatype: None,
            compiled: Some(compiled),
        })
    }

    pub fn with_datatype(mut self, datatype: impl Into<String>) -> Self {
        self.datatype = Some(datatype.into());
        self
    }

    pub fn compiled_template(&self) -> Option<&Template> {
        self.compiled.as_ref()
    }

    /// Attributes this term map reads from a record.
    pub fn attributes(&self) -> Vec<&str> {
        match self.kind {
            TermMapKind::Constant => Vec::new(),
            TermMapKind::Reference => vec![self.value.as_str()],
            TermMapKind::Template => self.compiled.iter().flat_map(|t| t.attributes()).collect(),
        }
    }

    /// The lexical/IRI string this map yields for `record`, or `None`.
    pub fn generate_string(&self, record: &Record) -> Option<String> {
        match self.kind {
            TermMapKind::Constant => Some(self.value.clone()),
            TermMapKind::Reference => record.value(&self.value).map(str::to_owned),
            TermMapKind::Template => self
                .compiled
                .as_ref()
                .and_then(|t| t.expand(record, self.term_type == TermType::Iri)),
        }
    }

    pub fn generate(&self, record: &Record) -> Option<Term> {
        let s = self.generate_string(record)?;
        Some(match self.term_type {
            TermType::Iri => Term::Iri(s),
            TermType::Literal => Term::Literal {
                lexical: s,
                datatype: self.datatype.clone().filter(|dt| dt != vocab::XSD_STRING),
            },
        })
    }
}

/// Expands a template-valued term map over `record`; `None` when the map is
/// not a template or a referenced attribute is missing or empty.
pub fn expand_template(term_map: &TermMap, record: &Record) -> Option<String> {
    if term_map.kind != TermMapKind::Template {
        return None;
    }
    term_map.generate_string(record)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinCondition {
    pub child: String,
    pub parent: String,
}

impl JoinCondition {
    pub fn new(child: impl Into<String>, parent: impl Into<String>) -> Self {
        Self {
            child: child.into(),
            parent: parent.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObjectMap {
    Simple(TermMap),
    Reference {
        parent: String,
    },
    Join {
        parent: String,
        conditions: Vec<JoinCondition>,
    },
}

impl ObjectMap {
    pub fn parent(&self) -> Option<&str> {
        match self {
            ObjectMap::Simple(_) => None,
            ObjectMap::Reference { parent } | ObjectMap::Join { parent, .. } => Some(parent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateObjectMap {
    pub predicate: String,
    pub object: ObjectMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriplesMap {
    pub id: String,
    pub logical_source: LogicalSource,
    pub subject_map: TermMap,
    pub subject_classes: Vec<String>,
    pub predicate_object_maps: Vec<PredicateObjectMap>,
}

/// A parsed and resolved mapping set plus run configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataIntegrationSystem {
    pub ontology_prefixes: BTreeMap<String, String>,
    /// Distinct logical sources in first-use order.
    pub sources: Vec<LogicalSource>,
    pub mappings: Vec<TriplesMap>,
    pub output_path: Option<PathBuf>,
    pub mode: Mode,
}

impl DataIntegrationSystem {
    pub fn new(ontology_prefixes: BTreeMap<String, String>, mappings: Vec<TriplesMap>) -> Self {
        let mut sources: Vec<LogicalSource> = Vec::new();
        for m in &mappings {
            if !sources.contains(&m.logical_source) {
                sources.push(m.logical_source.clone());
            }
        }
        Self {
            ontology_prefixes,
            sources,
            mappings,
            output_path: None,
            mode: Mode::Optimized,
        }
    }

    pub fn mapping(&self, id: &str) -> Option<&TriplesMap> {
        self.mappings.iter().find(|m| m.id == id)
    }

    /// Rewrites relative source paths against `base`.
    pub fn resolve_sources(&mut self, base: &Path) {
        let fix = |ls: &mut LogicalSource| {
            if ls.source_path.is_relative() {
                ls.source_path = base.join(&ls.source_path);
            }
        };
        self.sources.iter_mut().for_each(fix);
        self.mappings.iter_mut().for_each(|m| fix(&mut m.logical_source));
    }
}
