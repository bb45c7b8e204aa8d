use std::hash::BuildHasher;

use foldhash::fast::RandomState;
use hashbrown::HashTable;

use super::CostCounters;
use crate::term::{Term, TermRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insertion {
    New,
    Duplicate,
}

/// One logged pair, borrowed from its table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogEntry<'a> {
    pub timestamp: u64,
    pub subject: &'a str,
    pub object: TermRef<'a>,
}

const IRI: u8 = 0;
const PLAIN: u8 = 1;
const TYPED: u8 = 2;

/// Location of one pair in the arena: subject, then the object's lexical
/// form or IRI, then the datatype.
#[derive(Debug, Clone, Copy)]
struct Span {
    start: usize,
    subject: u32,
    lexical: u32,
    datatype: u32,
    kind: u8,
}

fn parts(object: &Term) -> (u8, &str, &str) {
    match object {
        Term::Iri(o) => (IRI, o, ""),
        Term::Literal { lexical, datatype: None } => (PLAIN, lexical, ""),
        Term::Literal {
            lexical,
            datatype: Some(dt),
        } => (TYPED, lexical, dt),
    }
}

fn split_in(arena: &str, span: Span) -> (&str, u8, &str, &str) {
    let s = span.start;
    let l = s + span.subject as usize;
    let d = l + span.lexical as usize;
    let e = d + span.datatype as usize;
    (&arena[s..l], span.kind, &arena[l..d], &arena[d..e])
}

fn len32(s: &str) -> u32 {
    u32::try_from(s.len()).expect("term shorter than 4 GiB")
}

/// Per-predicate set of accepted (subject, object) pairs plus an
/// append-only insertion log. Timestamps start at 1 and are contiguous,
/// so entry `t` lives at log index `t - 1`. Each pair's text is stored
/// once, in a shared arena.
#[derive(Debug, Clone)]
pub struct PredicateTupleTable {
    predicate: String,
    entries: HashTable<Span>,
    hasher: RandomState,
    arena: String,
    log: Vec<Span>,
}

impl PredicateTupleTable {
    pub fn new(predicate: impl Into<String>) -> Self {
        Self {
            predicate: predicate.into(),
            entries: HashTable::new(),
            hasher: RandomState::default(),
            arena: String::new(),
            log: Vec::new(),
        }
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    fn split(&self, span: Span) -> (&str, u8, &str, &str) {
        split_in(&self.arena, span)
    }

    fn find(&self, hash: u64, subject: &str, kind: u8, lexical: &str, datatype: &str) -> bool {
        self.entries
            .find(hash, |&span| self.split(span) == (subject, kind, lexical, datatype))
            .is_some()
    }

    /// Inserts the pair unless already present. Always costs one lookup;
    /// a new pair also costs one insertion and is logged.
    pub fn check_insert(&mut self, subject: &str, object: &Term, counters: &mut CostCounters) -> Insertion {
        counters.ptt_lookups += 1;
        let (kind, lexical, datatype) = parts(object);
        let hash = self.hasher.hash_one((subject, kind, lexical, datatype));
        if self.find(hash, subject, kind, lexical, datatype) {
            return Insertion::Duplicate;
        }
        counters.ptt_insertions += 1;
        let span = Span {
            start: self.arena.len(),
            subject: len32(subject),
            lexical: len32(lexical),
            datatype: len32(datatype),
            kind,
        };
        self.arena.push_str(subject);
        self.arena.push_str(lexical);
        self.arena.push_str(datatype);
        let (arena, hasher) = (&self.arena, &self.hasher);
        self.entries
            .insert_unique(hash, span, |&s| hasher.hash_one(split_in(arena, s)));
        self.log.push(span);
        Insertion::New
    }

    pub fn contains(&self, subject: &str, object: &Term) -> bool {
        let (kind, lexical, datatype) = parts(object);
        let hash = self.hasher.hash_one((subject, kind, lexical, datatype));
        self.find(hash, subject, kind, lexical, datatype)
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    pub fn last_timestamp(&self) -> u64 {
        self.log.len() as u64
    }

    fn entry(&self, index: usize) -> LogEntry<'_> {
        let (subject, kind, lexical, datatype) = self.split(self.log[index]);
        let object = match kind {
            IRI => TermRef::Iri(lexical),
            PLAIN => TermRef::Literal { lexical, datatype: None },
            _ => TermRef::Literal {
                lexical,
                datatype: Some(datatype),
            },
        };
        LogEntry {
            timestamp: index as u64 + 1,
            subject,
            object,
        }
    }

    /// Log entries with timestamp greater than `cursor`, oldest first.
    pub fn entries_after(&self, cursor: u64) -> impl ExactSizeIterator<Item = LogEntry<'_>> + '_ {
        let start = (cursor as usize).min(self.log.len());
        (start..self.log.len()).map(|i| self.entry(i))
    }

    pub fn log(&self) -> impl ExactSizeIterator<Item = LogEntry<'_>> + '_ {
        self.entries_after(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: &str = "http://iasis.eu/Q8WU90_ENST00000415827";

    #[test]
    fn first_insert_is_new_repeat_is_duplicate() {
        let mut c = CostCounters::default();
        let mut t = PredicateTupleTable::new("http://iasis.eu/interactionScore");
        let o = Term::literal("0.665");
        assert_eq!(t.check_insert(S, &o, &mut c), Insertion::New);
        assert_eq!(t.check_insert(S, &o, &mut c), Insertion::Duplicate);
        assert_eq!((c.ptt_lookups, c.ptt_insertions), (2, 1));
    }

    #[test]
    fn twenty_identical_inserts() {
        let mut c = CostCounters::default();
        let mut t = PredicateTupleTable::new("p");
        let o = Term::literal("0.665");
        let outcomes: Vec<_> = (0..20).map(|_| t.check_insert(S, &o, &mut c)).collect();
        // Replay oracle: only the first occurrence of a value is new.
        let mut seen = Vec::new();
        let expected: Vec<_> = (0..20)
            .map(|_| {
                if seen.contains(&(S, "0.665")) {
                    Insertion::Duplicate
                } else {
                    seen.push((S, "0.665"));
                    Insertion::New
                }
            })
            .collect();
        assert_eq!(outcomes, expected);
        assert_eq!((c.ptt_lookups, c.ptt_insertions), (20, 1));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn term_kinds_do_not_collide() {
        let mut c = CostCounters::default();
        let mut t = PredicateTupleTable::new("p");
        for o in [
            Term::iri("x"),
            Term::literal("x"),
            Term::typed_literal("x", "dt"),
            Term::typed_literal("x", "dt2"),
        ] {
            assert_eq!(t.check_insert("s", &o, &mut c), Insertion::New);
        }
    }

    #[test]
    fn log_is_timestamp_ordered() {
        let mut c = CostCounters::default();
        let mut t = PredicateTupleTable::new("p");
        for o in ["a", "b", "a", "c"] {
            t.check_insert("s", &Term::literal(o), &mut c);
        }
        let ts: Vec<_> = t.log().map(|e| e.timestamp).collect();
        assert_eq!(ts, vec![1, 2, 3]);
        assert_eq!(t.entries_after(1).len(), 2);
        assert_eq!(t.entries_after(3).len(), 0);
        assert_eq!(t.entries_after(99).len(), 0);
    }
}
