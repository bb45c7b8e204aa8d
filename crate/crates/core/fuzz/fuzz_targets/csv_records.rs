#![no_main]

use libfuzzer_sys::fuzz_target;
use rdfizer::ingest::RecordStream;

fuzz_target!(|data: &[u8]| {
    for record in RecordStream::csv(std::io::Cursor::new(data.to_vec())).take(10_000) {
        if record.is_err() {
            break;
        }
    }
});
