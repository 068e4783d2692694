#![no_main]

use heavylight::lll::{lll_condition_check, parse_event_fixture_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(sys) = parse_event_fixture_bytes(data) {
        let _ = lll_condition_check(&sys, 0.5);
    }
});
