#![no_main]

use libfuzzer_sys::fuzz_target;
use rdfizer::term::Term;
use rdfizer::writer::serialize_ntriples;

// NUL-separated subject, predicate, object; a fourth field is a datatype.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
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
});
