//! Synthetic datasets and mappings with a controlled duplicate rate.
//!
//! A dataset of `rows` rows holds `d` duplicate rows, drawn from
//! `d / repeat_factor` distinct tuples each repeated `repeat_factor` times;
//! every other row is unique. Rows are shuffled by the seed.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::OperatorKind;

pub const CHILD_FILE: &str = "data.csv";
pub const PARENT_FILE: &str = "parent.csv";
pub const COLUMNS: [&str; 5] = ["id", "key", "value1", "value2", "value3"];
pub const VOCAB: &str = "http://example.com/vocab/";
pub const ENTITY_BASE: &str = "http://example.com/entity/";
pub const PARENT_BASE: &str = "http://example.com/parent/";
pub const KEY_BASE: &str = "http://example.com/key/";
pub const MAX_POMS: u8 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestbedSpec {
    pub rows: u64,
    pub duplicate_rate: f64,
    pub repeat_factor: u64,
    pub pom_kind: OperatorKind,
    pub pom_count: u8,
    pub seed: u64,
    /// OJM only: parent rows (defaults to `rows`).
    pub parent_rows: Option<u64>,
    /// OJM only: fraction of distinct parent tuples whose key occurs in the child.
    pub match_rate: f64,
    /// OJM only: distinct child tuples sharing one join key.
    pub join_fanout: u64,
}

impl TestbedSpec {
    pub fn new(rows: u64, duplicate_rate: f64, pom_kind: OperatorKind, pom_count: u8, seed: u64) -> Self {
        Self {
            rows,
            duplicate_rate,
            repeat_factor: 20,
            pom_kind,
            pom_count,
            seed,
            parent_rows: None,
            match_rate: 1.0,
            join_fanout: 2,
        }
    }

    pub fn validate(&self) -> Result<(), TestbedError> {
        let frac = |name: &'static str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(TestbedError::Fraction { name, value: v })
            }
        };
        frac("duplicate_rate", self.duplicate_rate)?;
        frac("match_rate", self.match_rate)?;
        if self.repeat_factor < 2 {
            return Err(TestbedError::RepeatFactor(self.repeat_factor));
        }
        if !(1..=MAX_POMS).contains(&self.pom_count) {
            return Err(TestbedError::PomCount(self.pom_count));
        }
        if self.join_fanout == 0 {
            return Err(TestbedError::Fanout);
        }
        Ok(())
    }

    /// Duplicate rows for `rows`, rounded down to a multiple of the repeat
    /// factor, with a warning when rounding changed the value.
    pub fn duplicate_rows(&self, rows: u64) -> (u64, Option<String>) {
        let wanted = (self.duplicate_rate * rows as f64).round() as u64;
        let adjusted = wanted - wanted % self.repeat_factor;
        let warning = (adjusted != wanted).then(|| {
            format!(
                "duplicate rows {wanted} are not divisible by repeat factor {}; using {adjusted}",
                self.repeat_factor
            )
        });
        (adjusted, warning)
    }

    /// Number of distinct tuples in a dataset of `rows` rows.
    pub fn distinct_tuples(&self, rows: u64) -> u64 {
        let (d, _) = self.duplicate_rows(rows);
        rows - d + d / self.repeat_factor
    }
}

#[derive(Debug, Error)]
pub enum TestbedError {
    #[error("{name} must be within [0, 1], got {value}")]
    Fraction { name: &'static str, value: f64 },
    #[error("repeat factor must be at least 2, got {0}")]
    RepeatFactor(u64),
    #[error("POM count must be within 1..=5, got {0}")]
    PomCount(u8),
    #[error("join fanout must be positive")]
    Fanout,
    #[error("cannot write dataset: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write dataset: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedDataset {
    pub child: PathBuf,
    pub parent: Option<PathBuf>,
    pub child_distinct: u64,
    pub parent_distinct: Option<u64>,
    pub warnings: Vec<String>,
}

/// 64-bit mixer used to derive cell values from (seed, tuple, column).
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Tuple indices in file order: unique tuples once, repeated tuples
/// `repeat_factor` times, shuffled.
fn row_order(rows: u64, dup_rows: u64, repeat: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    let unique = rows - dup_rows;
    let mut order: Vec<u64> = (0..unique).collect();
    order.extend((0..dup_rows).map(|i| unique + i / repeat));
    order.shuffle(rng);
    order
}

fn write_rows(
    path: &Path,
    order: &[u64],
    seed: u64,
    mut cells: impl FnMut(u64, &mut [String; 5]),
) -> Result<(), TestbedError> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(COLUMNS)?;
    let mut row: [String; 5] = Default::default();
    for &t in order {
        for c in row.iter_mut() {
            c.clear();
        }
        cells(t, &mut row);
        for (k, c) in row[2..].iter_mut().enumerate() {
            let _ = write!(c, "{:012x}", mix(seed ^ mix(t.wrapping_mul(3) + k as u64)) >> 16);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `data.csv` (and `parent.csv` for OJM specs) into `dir`.
pub fn generate_dataset(spec: &TestbedSpec, dir: &Path) -> Result<GeneratedDataset, TestbedError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut warnings = Vec::new();

    let (dup, warn) = spec.duplicate_rows(spec.rows);
    warnings.extend(warn);
    let order = row_order(spec.rows, dup, spec.repeat_factor, &mut rng);
    let fanout = spec.join_fanout;
    let join = spec.pom_kind == OperatorKind::ObjectJoin;
    let child = dir.join(CHILD_FILE);
    write_rows(&child, &order, spec.seed, |t, row| {
        let _ = write!(row[0], "E{t}");
        if join {
            let _ = write!(row[1], "K{}", t / fanout);
        } else {
            let _ = write!(row[1], "G{}", t % 1000);
        }
    })?;

    let (parent, parent_distinct) = if join {
        let rows = spec.parent_rows.unwrap_or(spec.rows);
        let (dup, warn) = spec.duplicate_rows(rows);
        warnings.extend(warn);
        let order = row_order(rows, dup, spec.repeat_factor, &mut rng);
        let distinct = spec.distinct_tuples(rows);
        let matching: Vec<bool> = (0..distinct).map(|_| rng.gen_bool(spec.match_rate)).collect();
        let path = dir.join(PARENT_FILE);
        write_rows(&path, &order, spec.seed.rotate_left(17), |t, row| {
            let _ = write!(row[0], "P{t}");
            if matching[t as usize] {
                let _ = write!(row[1], "K{}", t / fanout);
            } else {
                let _ = write!(row[1], "U{t}");
            }
        })?;
        (Some(path), Some(distinct))
    } else {
        (None, None)
    };

    Ok(GeneratedDataset {
        child,
        parent,
        child_distinct: spec.distinct_tuples(spec.rows),
        parent_distinct,
        warnings,
    })
}

/// Value column read by POM `i` (1-based).
pub fn value_column(i: u8) -> String {
    format!("value{}", (i - 1) % 3 + 1)
}

/// Predicate of POM `i` (1-based).
pub fn predicate(i: u8) -> String {
    format!("{VOCAB}p{i}")
}

/// A mapping document over the files written by [`generate_dataset`].
/// SOM: one map. ORM: the child map plus a key-subject map on the same
/// source. OJM: a child map joining a map over `parent.csv` on `key`.
pub fn generate_mappings(kind: OperatorKind, pom_count: u8) -> Result<String, TestbedError> {
    if !(1..=MAX_POMS).contains(&pom_count) {
        return Err(TestbedError::PomCount(pom_count));
    }
    let mut doc = String::from(
        "@prefix rr: <http://www.w3.org/ns/r2rml#> .\n\
         @prefix rml: <http://semweb.mmlab.be/ns/rml#> .\n\
         @prefix ql: <http://semweb.mmlab.be/ns/ql#> .\n",
    );
    let _ = writeln!(doc, "@prefix ex: <{VOCAB}> .");
    doc.push_str("@prefix map: <http://example.com/mapping#> .\n\n");
    let source = |file: &str| {
        format!("  rml:logicalSource [\n    rml:source \"{file}\" ;\n    rml:referenceFormulation ql:CSV\n  ] ;\n")
    };

    doc.push_str("map:TriplesMap1\n");
    doc.push_str(&source(CHILD_FILE));
    let _ = write!(doc, "  rr:subjectMap [ rr:template \"{ENTITY_BASE}{{id}}\" ]");
    for i in 1..=pom_count {
        let object = match kind {
            OperatorKind::SimpleObject => format!("rml:reference \"{}\"", value_column(i)),
            OperatorKind::ObjectReference => "rr:parentTriplesMap map:TriplesMap2".to_owned(),
            OperatorKind::ObjectJoin => "rr:parentTriplesMap map:TriplesMap2 ;\n      \
                 rr:joinCondition [ rr:child \"key\" ; rr:parent \"key\" ]"
                .to_owned(),
        };
        let _ = write!(
            doc,
            " ;\n  rr:predicateObjectMap [\n    rr:predicate ex:p{i} ;\n    rr:objectMap [\n      {object}\n    ]\n  ]"
        );
    }
    doc.push_str(" .\n");

    match kind {
        OperatorKind::SimpleObject => {}
        OperatorKind::ObjectReference => {
            doc.push_str("\nmap:TriplesMap2\n");
            doc.push_str(&source(CHILD_FILE));
            let _ = writeln!(doc, "  rr:subjectMap [ rr:template \"{KEY_BASE}{{key}}\" ] .");
        }
        OperatorKind::ObjectJoin => {
            doc.push_str("\nmap:TriplesMap2\n");
            doc.push_str(&source(PARENT_FILE));
            let _ = writeln!(doc, "  rr:subjectMap [ rr:template \"{PARENT_BASE}{{id}}\" ] .");
        }
    }
    Ok(doc)
}
