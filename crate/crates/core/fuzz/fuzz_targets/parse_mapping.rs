#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(dis) = rdfizer::parse_mapping(text) {
            let again = rdfizer::parse_mapping(&rdfizer::mapping::to_turtle(&dis)).expect("serialized mapping parses");
            assert_eq!(again, dis);
        }
    }
});
