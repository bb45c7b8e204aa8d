//! The optimized operators. Each works one child record at a time so a
//! triples map's operators can share a single pass over its source; the
//! `exec_*` functions wrap them into whole-stream runs.

use std::io::Write;

use super::{EngineError, OperatorPlan};
use crate::ingest::{project_attributes, Record, SourceError};
use crate::mapping::{ObjectMap, OperatorKind, TermMap};
use crate::structures::{CostCounters, Insertion, PredicateJoinTupleTable, PredicateTupleTable};
use crate::term::Term;
use crate::writer::KgWriter;

fn accept(ptt: &mut PredicateTupleTable, subject: &str, object: &Term, counters: &mut CostCounters) -> bool {
    counters.triples_generated += 1;
    if ptt.check_insert(subject, object, counters) == Insertion::New {
        counters.kg_emissions += 1;
        true
    } else {
        false
    }
}

/// Simple object map over one record; returns 1 if a new triple was accepted.
pub fn som_step(
    object_map: &TermMap,
    subject: &str,
    record: &Record,
    ptt: &mut PredicateTupleTable,
    counters: &mut CostCounters,
) -> u64 {
    match object_map.generate(record) {
        Some(object) => accept(ptt, subject, &object, counters) as u64,
        None => 0,
    }
}

/// Object reference map: the object is the parent's subject map evaluated
/// over the same record.
pub fn orm_step(
    parent_subject_map: &TermMap,
    subject: &str,
    record: &Record,
    ptt: &mut PredicateTupleTable,
    counters: &mut CostCounters,
) -> u64 {
    match parent_subject_map.generate_string(record) {
        Some(object) => accept(ptt, subject, &Term::Iri(object), counters) as u64,
        None => 0,
    }
}

/// Object join map: one PJTT probe with the child's join values, then one
/// candidate triple per parent subject returned.
pub fn ojm_step<S: AsRef<str>>(
    child_attributes: &[S],
    subject: &str,
    record: &Record,
    pjtt: &mut PredicateJoinTupleTable,
    ptt: &mut PredicateTupleTable,
    counters: &mut CostCounters,
) -> u64 {
    let Some(key) = project_attributes(record, child_attributes) else {
        return 0;
    };
    let mut new = 0;
    // The probe borrows the PJTT; the PTT is a separate structure.
    for parent_subject in pjtt.probe(&key, counters).iter() {
        let object = Term::Iri(parent_subject.clone());
        new += accept(ptt, subject, &object, counters) as u64;
    }
    new
}

/// Child-side join attributes of an OJM plan, in join-condition order.
pub fn child_join_attributes(plan: &OperatorPlan) -> Vec<String> {
    match &plan.pom.object {
        ObjectMap::Join { conditions, .. } => conditions.iter().map(|c| c.child.clone()).collect(),
        _ => Vec::new(),
    }
}

/// Parent-side join attributes of an OJM plan, in join-condition order.
pub fn parent_join_attributes(plan: &OperatorPlan) -> Vec<String> {
    match &plan.pom.object {
        ObjectMap::Join { conditions, .. } => conditions.iter().map(|c| c.parent.clone()).collect(),
        _ => Vec::new(),
    }
}

const EMIT_EVERY: u64 = 4096;

fn run_stream<W: Write>(
    plan: &OperatorPlan,
    stream: impl IntoIterator<Item = Result<Record, SourceError>>,
    ptt: &mut PredicateTupleTable,
    writer: &mut KgWriter<W>,
    mut step: impl FnMut(&str, &Record, &mut PredicateTupleTable) -> u64,
) -> Result<u64, EngineError> {
    let mut emitted = 0;
    for (i, record) in stream.into_iter().enumerate() {
        let record = record.map_err(|e| EngineError::source(&plan.child.id, e))?;
        if let Some(subject) = plan.child.subject_map.generate_string(&record) {
            step(&subject, &record, ptt);
        }
        if (i as u64 + 1) % EMIT_EVERY == 0 {
            emitted += writer.emit(ptt)? as u64;
        }
    }
    emitted += writer.emit(ptt)? as u64;
    Ok(emitted)
}

fn expect_kind(plan: &OperatorPlan, kind: OperatorKind) -> Result<(), EngineError> {
    if plan.kind == kind {
        Ok(())
    } else {
        Err(EngineError::PlanMismatch {
            expected: kind,
            found: plan.kind,
        })
    }
}

pub fn exec_som<W: Write>(
    plan: &OperatorPlan,
    stream: impl IntoIterator<Item = Result<Record, SourceError>>,
    ptt: &mut PredicateTupleTable,
    writer: &mut KgWriter<W>,
    counters: &mut CostCounters,
) -> Result<u64, EngineError> {
    expect_kind(plan, OperatorKind::SimpleObject)?;
    let ObjectMap::Simple(object_map) = &plan.pom.object else {
        unreachable!("SOM plans carry simple object maps");
    };
    run_stream(plan, stream, ptt, writer, |s, r, ptt| som_step(object_map, s, r, ptt, counters))
}

pub fn exec_orm<W: Write>(
    plan: &OperatorPlan,
    stream: impl IntoIterator<Item = Result<Record, SourceError>>,
    ptt: &mut PredicateTupleTable,
    writer: &mut KgWriter<W>,
    counters: &mut CostCounters,
) -> Result<u64, EngineError> {
    expect_kind(plan, OperatorKind::ObjectReference)?;
    let parent = plan.parent.as_ref().expect("ORM plans have a parent");
    run_stream(plan, stream, ptt, writer, |s, r, ptt| {
        orm_step(&parent.subject_map, s, r, ptt, counters)
    })
}

pub fn exec_ojm<W: Write>(
    plan: &OperatorPlan,
    child_stream: impl IntoIterator<Item = Result<Record, SourceError>>,
    pjtt: &mut PredicateJoinTupleTable,
    ptt: &mut PredicateTupleTable,
    writer: &mut KgWriter<W>,
    counters: &mut CostCounters,
) -> Result<u64, EngineError> {
    expect_kind(plan, OperatorKind::ObjectJoin)?;
    let attrs = child_join_attributes(plan);
    run_stream(plan, child_stream, ptt, writer, |s, r, ptt| {
        ojm_step(&attrs, s, r, pjtt, ptt, counters)
    })
}
