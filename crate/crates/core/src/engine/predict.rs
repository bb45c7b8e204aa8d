//! Operation-count model for the three operators in both modes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{Mode, OperatorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinCardinality {
    pub n_parent: u64,
    pub n_child: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("object join maps need parent and child cardinalities")]
    MissingJoinCardinality,
    #[error("{0} does not take join cardinalities")]
    UnexpectedJoinCardinality(OperatorKind),
    #[error("distinct count {s_p} exceeds generated count {n_p}")]
    DistinctExceedsGenerated { n_p: u64, s_p: u64 },
}

/// A predicted operation count: `exact`, plus the merge-sort band for naive
/// duplicate elimination when present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedOps {
    pub exact: u64,
    pub sort_band: Option<(f64, f64)>,
}

impl PredictedOps {
    pub fn lower(&self) -> f64 {
        self.exact as f64 + self.sort_band.map_or(0.0, |b| b.0)
    }

    pub fn upper(&self) -> f64 {
        self.exact as f64 + self.sort_band.map_or(0.0, |b| b.1)
    }

    pub fn admits(&self, measured: u64) -> bool {
        match self.sort_band {
            None => measured == self.exact,
            Some(_) => {
                let m = measured as f64;
                m >= self.lower() && m <= self.upper()
            }
        }
    }
}

/// `[n·log2(n)/2, n·log2(n) + n]`; zero for n ≤ 1 apart from the `+ n` term.
pub fn merge_sort_band(n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let nf = n as f64;
    let nlog = nf * nf.log2();
    (nlog / 2.0, nlog + nf)
}

pub fn predicted_ops(
    kind: OperatorKind,
    mode: Mode,
    n_p: u64,
    s_p: u64,
    join: Option<JoinCardinality>,
) -> Result<PredictedOps, PredictError> {
    if s_p > n_p {
        return Err(PredictError::DistinctExceedsGenerated { n_p, s_p });
    }
    let join_ops = match (kind, join) {
        (OperatorKind::ObjectJoin, None) => return Err(PredictError::MissingJoinCardinality),
        (OperatorKind::ObjectJoin, Some(j)) => Some(j),
        (k, Some(_)) => return Err(PredictError::UnexpectedJoinCardinality(k)),
        (_, None) => None,
    };
    Ok(match mode {
        Mode::Optimized => PredictedOps {
            exact: n_p + 2 * s_p + join_ops.map_or(0, |j| 2 * j.n_parent + j.n_child),
            sort_band: None,
        },
        Mode::Naive => PredictedOps {
            exact: n_p + s_p + join_ops.map_or(0, |j| j.n_parent * j.n_child),
            sort_band: Some(merge_sort_band(n_p)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use OperatorKind::*;

    #[test]
    fn optimized_join() {
        let j = JoinCardinality {
            n_parent: 100,
            n_child: 200,
        };
        let p = predicted_ops(ObjectJoin, Mode::Optimized, 300, 150, Some(j)).unwrap();
        assert_eq!(p.exact, 1000);
        assert!(p.admits(1000) && !p.admits(999));
    }

    #[test]
    fn optimized_empty() {
        assert_eq!(predicted_ops(SimpleObject, Mode::Optimized, 0, 0, None).unwrap().exact, 0);
    }

    #[test]
    fn optimized_simple_and_reference_agree() {
        let a = predicted_ops(SimpleObject, Mode::Optimized, 1000, 250, None).unwrap();
        let b = predicted_ops(ObjectReference, Mode::Optimized, 1000, 250, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.exact, 1500);
    }

    #[test]
    fn naive_simple_band() {
        let p = predicted_ops(SimpleObject, Mode::Naive, 1000, 250, None).unwrap();
        assert_eq!(p.exact, 1250);
        let l = 1000.0 * 1000f64.log2();
        assert_eq!(p.sort_band, Some((l / 2.0, l + 1000.0)));
    }

    #[test]
    fn naive_join_adds_nested_loop() {
        let j = JoinCardinality {
            n_parent: 100,
            n_child: 200,
        };
        assert_eq!(predicted_ops(ObjectJoin, Mode::Naive, 10, 5, Some(j)).unwrap().exact, 20015);
    }

    #[test]
    fn cardinality_preconditions() {
        assert_eq!(
            predicted_ops(ObjectJoin, Mode::Optimized, 1, 1, None),
            Err(PredictError::MissingJoinCardinality)
        );
        let j = JoinCardinality { n_parent: 1, n_child: 1 };
        assert!(predicted_ops(SimpleObject, Mode::Naive, 1, 1, Some(j)).is_err());
        assert!(predicted_ops(SimpleObject, Mode::Naive, 1, 2, None).is_err());
    }
}
