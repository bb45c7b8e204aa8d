//! Predicate Tuple Tables (duplicate elimination) and Predicate Join Tuple
//! Tables (index joins).

mod counters;
pub mod encode;
mod pjtt;
mod ptt;

pub use counters::CostCounters;
pub use pjtt::{PredicateJoinTupleTable, SubjectSet};
pub use ptt::{Insertion, LogEntry, PredicateTupleTable};
