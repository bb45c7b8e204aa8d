//! Operator execution in optimized (PTT/PJTT) and naive (materialize, sort,
//! nested loop) modes.

pub mod naive;
pub mod operators;
pub mod predict;
mod run;

use std::time::Duration;

use thiserror::Error;

use crate::ingest::SourceError;
use crate::mapping::{
    classify_pom, ClassifyError, DataIntegrationSystem, Mode, ObjectMap, OperatorKind, PredicateObjectMap, TermMap,
    TermType, TriplesMap,
};
use crate::term::vocab;
use crate::writer::WriteError;

pub use predict::{merge_sort_band, predicted_ops, JoinCardinality, PredictError, PredictedOps};
pub use run::{run_system, EngineOptions, OperatorReport, PredicateReport, RunReport};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("triples map '{map}': {source}")]
    Source {
        map: String,
        #[source]
        source: SourceError,
    },
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Write(#[from] WriteError),
    #[error("run exceeded its time limit after {0:?}")]
    Timeout(Duration),
    #[error("naive execution would materialize more than the allowed {materialized} items")]
    Resource { materialized: u64 },
    #[error("operator plan is {found}, expected {expected}")]
    PlanMismatch { expected: OperatorKind, found: OperatorKind },
}

impl EngineError {
    pub fn source(map: &str, source: SourceError) -> Self {
        EngineError::Source {
            map: map.to_owned(),
            source,
        }
    }
}

/// One predicate-object map bound to its physical operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorPlan {
    pub kind: OperatorKind,
    pub child: TriplesMap,
    pub pom: PredicateObjectMap,
    /// Present exactly for ORM and OJM.
    pub parent: Option<TriplesMap>,
    pub mode: Mode,
}

impl OperatorPlan {
    pub fn new(
        child: &TriplesMap,
        pom: &PredicateObjectMap,
        parent: Option<&TriplesMap>,
        mode: Mode,
    ) -> Result<Self, ClassifyError> {
        let kind = classify_pom(pom, child, parent)?;
        Ok(Self {
            kind,
            child: child.clone(),
            pom: pom.clone(),
            parent: parent.cloned(),
            mode,
        })
    }

    /// rdf:type plan for one subject class.
    pub fn class(child: &TriplesMap, class: &str, mode: Mode) -> Self {
        Self {
            kind: OperatorKind::SimpleObject,
            child: child.clone(),
            pom: PredicateObjectMap {
                predicate: vocab::RDF_TYPE.to_owned(),
                object: ObjectMap::Simple(TermMap::constant(class, TermType::Iri)),
            },
            parent: None,
            mode,
        }
    }
}

/// Plans for one triples map: class plans first, then POMs in document order.
pub fn plans_for(dis: &DataIntegrationSystem, map: &TriplesMap, mode: Mode) -> Result<Vec<OperatorPlan>, ClassifyError> {
    let mut plans: Vec<OperatorPlan> = map.subject_classes.iter().map(|c| OperatorPlan::class(map, c, mode)).collect();
    for pom in &map.predicate_object_maps {
        let parent = match pom.object.parent() {
            None => None,
            Some(id) => Some(dis.mapping(id).ok_or_else(|| ClassifyError::MissingParent {
                child: map.id.clone(),
                parent: id.to_owned(),
            })?),
        };
        plans.push(OperatorPlan::new(map, pom, parent, mode)?);
    }
    Ok(plans)
}
