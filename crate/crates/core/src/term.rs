//! RDF terms produced by term maps.

use std::fmt;

/// An RDF term as emitted by the engine. Subjects and predicates are always
/// IRIs; objects may be IRIs or literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal {
        lexical: String,
        datatype: Option<String>,
    },
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: None,
        }
    }

    pub fn typed_literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            Term::Literal { .. } => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn as_ref(&self) -> TermRef<'_> {
        match self {
            Term::Iri(iri) => TermRef::Iri(iri),
            Term::Literal { lexical, datatype } => TermRef::Literal {
                lexical,
                datatype: datatype.as_deref(),
            },
        }
    }
}

/// Borrowed form of [`Term`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermRef<'a> {
    Iri(&'a str),
    Literal { lexical: &'a str, datatype: Option<&'a str> },
}

impl TermRef<'_> {
    pub fn to_owned(self) -> Term {
        match self {
            TermRef::Iri(iri) => Term::iri(iri),
            TermRef::Literal { lexical, datatype: None } => Term::literal(lexical),
            TermRef::Literal {
                lexical,
                datatype: Some(dt),
            } => Term::typed_literal(lexical, dt),
        }
    }
}

impl fmt::Display for Term {
    /// Debug-friendly rendering; use [`crate::writer::serialize_ntriples`]
    /// for canonical output.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal {
                lexical,
                datatype: None,
            } => write!(f, "{lexical:?}"),
            Term::Literal {
                lexical,
                datatype: Some(dt),
            } => write!(f, "{lexical:?}^^<{dt}>"),
        }
    }
}

/// A fully expanded triple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: Term,
}

pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RR: &str = "http://www.w3.org/ns/r2rml#";
    pub const RML: &str = "http://semweb.mmlab.be/ns/rml#";
    pub const QL: &str = "http://semweb.mmlab.be/ns/ql#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
}
