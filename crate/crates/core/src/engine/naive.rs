//! Baseline execution: every candidate triple is materialized, then
//! duplicates are removed by a counted merge sort. Joins are nested loops.

use std::time::Instant;

use super::operators::{child_join_attributes, parent_join_attributes};
use super::{EngineError, OperatorPlan};
use crate::ingest::{open_source, project_attributes, Record, SourceError};
use crate::mapping::{ObjectMap, OperatorKind};
use crate::structures::CostCounters;
use crate::term::Term;
use crate::writer::write_ntriples_line;

/// Limits on a naive run.
#[derive(Debug, Clone, Copy, Default)]
pub struct NaiveLimits {
    pub deadline: Option<Instant>,
    /// Largest number of triples plus parent rows held in memory.
    pub max_materialized: Option<u64>,
}

impl NaiveLimits {
    fn check_time(&self, started: Instant) -> Result<(), EngineError> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(EngineError::Timeout(started.elapsed())),
            _ => Ok(()),
        }
    }
}

/// Top-down merge sort counting element comparisons. The left half takes
/// `ceil(n/2)` elements and ties go to the left, so the sort is stable.
pub fn counted_merge_sort<T: Ord>(mut v: Vec<T>, comparisons: &mut u64) -> Vec<T> {
    if v.len() <= 1 {
        return v;
    }
    let right = v.split_off(v.len().div_ceil(2));
    let left = counted_merge_sort(v, comparisons);
    let right = counted_merge_sort(right, comparisons);
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut l = left.into_iter().peekable();
    let mut r = right.into_iter().peekable();
    while let (Some(a), Some(b)) = (l.peek(), r.peek()) {
        *comparisons += 1;
        if b < a {
            out.extend(r.next());
        } else {
            out.extend(l.next());
        }
    }
    out.extend(l);
    out.extend(r);
    out
}

/// Sorts and removes duplicates, charging merge comparisons to
/// `sort_comparisons`.
pub fn sort_dedup<T: Ord>(items: Vec<T>, counters: &mut CostCounters) -> Vec<T> {
    let mut sorted = counted_merge_sort(items, &mut counters.sort_comparisons);
    sorted.dedup();
    sorted
}

/// Outcome of one naive plan.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NaiveOutput {
    /// Sorted, distinct N-Triples lines.
    pub lines: Vec<String>,
    pub n_parent: u64,
    pub n_child: u64,
}

struct Materializer<'a> {
    limits: &'a NaiveLimits,
    held: u64,
}

impl Materializer<'_> {
    fn admit<T>(&mut self, v: &mut Vec<T>, item: T) -> Result<(), EngineError> {
        self.held += 1;
        if self.limits.max_materialized.is_some_and(|m| self.held > m) || v.try_reserve(1).is_err() {
            return Err(EngineError::Resource {
                materialized: self.held - 1,
            });
        }
        v.push(item);
        Ok(())
    }
}

fn line(subject: &str, predicate: &str, object: &Term) -> Result<String, EngineError> {
    let mut s = String::new();
    write_ntriples_line(&mut s, subject, predicate, object)?;
    Ok(s)
}

/// Runs one plan naively over the given child records. OJM plans read the
/// parent's source themselves.
pub fn naive_execute(
    plan: &OperatorPlan,
    child: impl IntoIterator<Item = Result<Record, SourceError>>,
    counters: &mut CostCounters,
    limits: &NaiveLimits,
) -> Result<NaiveOutput, EngineError> {
    let started = Instant::now();
    let mut mat = Materializer { limits, held: 0 };
    let mut generated: Vec<String> = Vec::new();
    let predicate = plan.pom.predicate.as_str();
    let child_id = plan.child.id.as_str();
    let mut out = NaiveOutput::default();

    match plan.kind {
        OperatorKind::SimpleObject | OperatorKind::ObjectReference => {
            for record in child {
                let record = record.map_err(|e| EngineError::source(child_id, e))?;
                limits.check_time(started)?;
                let Some(subject) = plan.child.subject_map.generate_string(&record) else {
                    continue;
                };
                let object = match (&plan.pom.object, &plan.parent) {
                    (ObjectMap::Simple(tm), _) => tm.generate(&record),
                    (_, Some(parent)) => parent.subject_map.generate_string(&record).map(Term::Iri),
                    (_, None) => None,
                };
                if let Some(object) = object {
                    mat.admit(&mut generated, line(&subject, predicate, &object)?)?;
                }
            }
        }
        OperatorKind::ObjectJoin => {
            let parent = plan.parent.as_ref().expect("OJM plans have a parent");
            let parent_attrs = parent_join_attributes(plan);
            let child_attrs = child_join_attributes(plan);
            let parent_records =
                open_source(&parent.logical_source).map_err(|e| EngineError::source(&parent.id, e))?;
            let mut parents: Vec<(Vec<String>, String)> = Vec::new();
            for record in parent_records {
                let record = record.map_err(|e| EngineError::source(&parent.id, e))?;
                let (Some(subject), Some(key)) = (
                    parent.subject_map.generate_string(&record),
                    project_attributes(&record, &parent_attrs),
                ) else {
                    continue;
                };
                let key = key.into_iter().map(str::to_owned).collect();
                mat.admit(&mut parents, (key, subject))?;
            }
            out.n_parent = parents.len() as u64;
            for record in child {
                let record = record.map_err(|e| EngineError::source(child_id, e))?;
                limits.check_time(started)?;
                let (Some(subject), Some(key)) = (
                    plan.child.subject_map.generate_string(&record),
                    project_attributes(&record, &child_attrs),
                ) else {
                    continue;
                };
                out.n_child += 1;
                for (parent_key, parent_subject) in &parents {
                    counters.pairwise_comparisons += 1;
                    if parent_key.iter().map(String::as_str).eq(key.iter().copied()) {
                        let l = line(&subject, predicate, &Term::Iri(parent_subject.clone()))?;
                        mat.admit(&mut generated, l)?;
                    }
                }
            }
        }
    }

    counters.triples_generated += generated.len() as u64;
    limits.check_time(started)?;
    out.lines = sort_dedup(generated, counters);
    counters.kg_emissions += out.lines.len() as u64;
    Ok(out)
}

/// Merges two sorted distinct lists into one sorted distinct list.
pub fn union_sorted(a: Vec<String>, b: Vec<String>) -> Vec<String> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => match x.cmp(y) {
                std::cmp::Ordering::Less => out.extend(a.next()),
                std::cmp::Ordering::Greater => out.extend(b.next()),
                std::cmp::Ordering::Equal => {
                    out.extend(a.next());
                    b.next();
                }
            },
            _ => break,
        }
    }
    out.extend(a);
    out.extend(b);
    out
}
