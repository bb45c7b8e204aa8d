use std::collections::HashMap;

use indexmap::IndexSet;

use super::encode::encode_into;
use super::CostCounters;
use crate::ingest::{project_attributes, Record};
use crate::mapping::TermMap;

pub type SubjectSet = IndexSet<String>;

/// Index from encoded join-key values to the parent subjects carrying them.
#[derive(Debug, Clone)]
pub struct PredicateJoinTupleTable {
    parent_map_id: String,
    join_attributes: Vec<String>,
    index: HashMap<Box<[u8]>, SubjectSet>,
    empty: SubjectSet,
    scratch: Vec<u8>,
}

impl PredicateJoinTupleTable {
    pub fn new(parent_map_id: impl Into<String>, join_attributes: Vec<String>) -> Self {
        Self {
            parent_map_id: parent_map_id.into(),
            join_attributes,
            index: HashMap::new(),
            empty: SubjectSet::new(),
            scratch: Vec::new(),
        }
    }

    /// Builds the index from parent records. Records whose join values or
    /// subject are NONE are skipped and tallied in `pjtt_skipped`; every
    /// other record costs one read and one insertion.
    pub fn build<E>(
        parent_map_id: impl Into<String>,
        subject_map: &TermMap,
        records: impl IntoIterator<Item = Result<Record, E>>,
        join_attributes: Vec<String>,
        counters: &mut CostCounters,
    ) -> Result<Self, E> {
        let mut table = Self::new(parent_map_id, join_attributes);
        for record in records {
            let record = record?;
            let Some(subject) = subject_map.generate_string(&record) else {
                counters.pjtt_skipped += 1;
                continue;
            };
            let Some(key) = project_attributes(&record, &table.join_attributes) else {
                counters.pjtt_skipped += 1;
                continue;
            };
            counters.pjtt_reads += 1;
            counters.pjtt_insertions += 1;
            encode_into(&key, &mut table.scratch);
            match table.index.get_mut(table.scratch.as_slice()) {
                Some(set) => {
                    set.insert(subject);
                }
                None => {
                    let mut set = SubjectSet::new();
                    set.insert(subject);
                    table.index.insert(table.scratch.as_slice().into(), set);
                }
            }
        }
        Ok(table)
    }

    /// Identifier `<parent>_<attr>[_<attr>...]`.
    pub fn identifier(&self) -> String {
        let mut id = self.parent_map_id.clone();
        for a in &self.join_attributes {
            id.push('_');
            id.push_str(a);
        }
        id
    }

    pub fn parent_map_id(&self) -> &str {
        &self.parent_map_id
    }

    pub fn join_attributes(&self) -> &[String] {
        &self.join_attributes
    }

    /// Exact-match lookup; one probe per call.
    pub fn probe<S: AsRef<str>>(&mut self, key_values: &[S], counters: &mut CostCounters) -> &SubjectSet {
        assert_eq!(key_values.len(), self.join_attributes.len(), "probe arity must match the join condition");
        counters.pjtt_probes += 1;
        encode_into(key_values, &mut self.scratch);
        self.index.get(self.scratch.as_slice()).unwrap_or(&self.empty)
    }

    pub fn key_count(&self) -> usize {
        self.index.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SourceError;
    use crate::mapping::TermType;

    fn exon_map() -> TermMap {
        TermMap::template("http://iasis.eu/exon/{ense}", TermType::Iri).unwrap()
    }

    fn recs(rows: &[(&str, &str)]) -> Vec<Result<Record, SourceError>> {
        rows.iter()
            .enumerate()
            .map(|(i, (enst, ense))| Ok(Record::from_pairs([("enst", *enst), ("ense", *ense)], i as u64)))
            .collect()
    }

    #[test]
    fn groups_subjects_by_join_key() {
        let mut c = CostCounters::default();
        let mut t = PredicateJoinTupleTable::build(
            "TriplesMap2",
            &exon_map(),
            recs(&[
                ("ENST00000415827", "ENSE00003628092"),
                ("ENST00000415827", "ENSE00003642731"),
                ("ENST00000000001", "ENSE00000000009"),
            ]),
            vec!["enst".into()],
            &mut c,
        )
        .unwrap();
        assert_eq!(t.identifier(), "TriplesMap2_enst");
        assert_eq!((c.pjtt_reads, c.pjtt_insertions), (3, 3));
        let hits: Vec<_> = t.probe(&["ENST00000415827"], &mut c).iter().cloned().collect();
        assert_eq!(
            hits,
            vec![
                "http://iasis.eu/exon/ENSE00003628092",
                "http://iasis.eu/exon/ENSE00003642731"
            ]
        );
        assert!(t.probe(&["unseen"], &mut c).is_empty());
        assert_eq!(c.pjtt_probes, 2);
    }

    #[test]
    fn empty_parent_stream() {
        let mut c = CostCounters::default();
        let t = PredicateJoinTupleTable::build("P", &exon_map(), recs(&[]), vec!["enst".into()], &mut c).unwrap();
        assert_eq!(t.key_count(), 0);
        assert_eq!(c, CostCounters::default());
    }

    #[test]
    fn identical_parent_rows_collapse() {
        let mut c = CostCounters::default();
        let mut t =
            PredicateJoinTupleTable::build("P", &exon_map(), recs(&[("k", "e"), ("k", "e")]), vec!["enst".into()], &mut c)
                .unwrap();
        assert_eq!(t.probe(&["k"], &mut c).len(), 1);
        assert_eq!(c.pjtt_insertions, 2);
    }

    #[test]
    fn none_values_are_skipped() {
        let mut c = CostCounters::default();
        let mut t =
            PredicateJoinTupleTable::build("P", &exon_map(), recs(&[("", "e"), ("k", ""), ("k", "f")]), vec!["enst".into()], &mut c)
                .unwrap();
        assert_eq!(c.pjtt_skipped, 2);
        assert_eq!(c.pjtt_insertions, 1);
        assert_eq!(t.probe(&["k"], &mut c).len(), 1);
    }
}
