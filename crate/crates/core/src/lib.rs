//! An RML engine that removes duplicate triples with per-predicate hash
//! tables and evaluates joins through per-parent hash indexes.

pub mod engine;
pub mod ingest;
pub mod mapping;
pub mod structures;
pub mod term;
pub mod testbed;
pub mod writer;

pub use engine::{run_system, EngineError, EngineOptions, RunReport};
pub use mapping::{load_mapping_file, parse_mapping, DataIntegrationSystem, Mode, OperatorKind};
pub use term::{Term, Triple};
