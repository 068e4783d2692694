#![no_main]

use heavylight::pipeline::parse_constants_bytes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = parse_constants_bytes(data) {
        c.validate().expect("parsed constants are valid");
    }
});
