use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Main-memory operation tallies. One operation is one structure read,
/// one structure insert, or one graph emission; comparison counters are
/// only used by the naive operators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCounters {
    pub ptt_lookups: u64,
    pub ptt_insertions: u64,
    pub kg_emissions: u64,
    pub pjtt_insertions: u64,
    pub pjtt_reads: u64,
    pub pjtt_probes: u64,
    /// Nested-loop join key comparisons.
    pub pairwise_comparisons: u64,
    /// Merge-sort comparisons in naive duplicate elimination.
    pub sort_comparisons: u64,
    /// Triples produced before duplicate elimination (|N_p|).
    pub triples_generated: u64,
    /// Parent records left out of a PJTT because a key or subject was NONE.
    pub pjtt_skipped: u64,
}

impl CostCounters {
    /// Sum of the structure operations charged to the optimized operators.
    pub fn optimized_total(&self) -> u64 {
        self.ptt_lookups
            + self.ptt_insertions
            + self.kg_emissions
            + self.pjtt_reads
            + self.pjtt_insertions
            + self.pjtt_probes
    }

    /// Generation, emission and comparison work of the naive operators.
    pub fn naive_total(&self) -> u64 {
        self.triples_generated + self.kg_emissions + self.sort_comparisons + self.pairwise_comparisons
    }
}

impl AddAssign for CostCounters {
    fn add_assign(&mut self, o: Self) {
        self.ptt_lookups += o.ptt_lookups;
        self.ptt_insertions += o.ptt_insertions;
        self.kg_emissions += o.kg_emissions;
        self.pjtt_insertions += o.pjtt_insertions;
        self.pjtt_reads += o.pjtt_reads;
        self.pjtt_probes += o.pjtt_probes;
        self.pairwise_comparisons += o.pairwise_comparisons;
        self.sort_comparisons += o.sort_comparisons;
        self.triples_generated += o.triples_generated;
        self.pjtt_skipped += o.pjtt_skipped;
    }
}
