#![no_main]

use libfuzzer_sys::fuzz_target;

// First line is the iterator, the rest the document.
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
    if let Ok(iterator) = std::str::from_utf8(&data[..split]) {
        let _ = rdfizer::ingest::json_records(data.get(split + 1..).unwrap_or_default(), iterator);
    }
});
