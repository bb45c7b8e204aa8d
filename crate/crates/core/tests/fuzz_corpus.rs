//! Replays the checked-in fuzz seeds through the same entry points as the
//! fuzz targets, so they run on stable toolchains too.

use std::path::Path;

use rdfizer::ingest::{json_records, JsonPath, RecordStream};
use rdfizer::mapping::template::Template;
use rdfizer::mapping::to_turtle;
use rdfizer::parse_mapping;
use rdfizer::term::Term;
use rdfizer::writer::serialize_ntriples;

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| std::fs::read(e.unwrap().path()).unwrap())
        .collect();
    assert!(!out.is_empty(), "no seeds for {target}");
    out.sort();
    out
}

#[test]
fn parse_mapping_seeds() {
    let mut parsed = 0;
    for data in seeds("parse_mapping") {
        if let Ok(dis) = parse_mapping(std::str::from_utf8(&data).unwrap()) {
            assert_eq!(parse_mapping(&to_turtle(&dis)).unwrap(), dis);
            parsed += 1;
        }
    }
    assert!(parsed >= 4);
}

#[test]
fn csv_seeds() {
    for data in seeds("csv_records") {
        for record in RecordStream::csv(std::io::Cursor::new(data)).take(10_000) {
            if record.is_err() {
                break;
            }
        }
    }
}

#[test]
fn json_seeds() {
    for data in seeds("json_records") {
        let split = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
        let iterator = std::str::from_utf8(&data[..split]).unwrap();
        let _ = json_records(data.get(split + 1..).unwrap_or_default(), iterator);
    }
}

#[test]
fn jsonpath_and_template_seeds() {
    for data in seeds("jsonpath") {
        let _ = JsonPath::parse(std::str::from_utf8(&data).unwrap());
    }
    for data in seeds("template") {
        let _ = Template::parse(std::str::from_utf8(&data).unwrap());
    }
}

#[test]
fn ntriples_seeds() {
    for data in seeds("ntriples") {
        let text = std::str::from_utf8(&data).unwrap();
        let f: Vec<&str> = text.split('\0').collect();
        let object = match f.len() {
            3 => Term::literal(f[2]),
            4 => Term::typed_literal(f[2], f[3]),
            _ => Term::iri(text),
        };
        if let Ok(line) = serialize_ntriples(f[0], f.get(1).unwrap_or(&"p"), &object) {
            assert!(line.ends_with(" .\n"));
            assert_eq!(line.matches('\n').count(), 1);
        }
    }
}
