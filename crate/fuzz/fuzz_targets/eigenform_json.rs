#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(f) = anticyc::formats::parse_eigenform(text) {
            // accepted forms start with a(1) = 1
            assert!(f.a(1).is_one());
        }
    }
});
