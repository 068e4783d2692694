#![no_main]

use heavylight::canonical::{canonical_to_json, check_canonical, parse_canonical, parse_canonical_bytes, CanonicalParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(ci) = parse_canonical_bytes(data) {
        // the checker must not panic on any parsed instance
        let _ = check_canonical(&ci, &CanonicalParams::of(&ci));
        let again = parse_canonical(&canonical_to_json(&ci)).expect("serialized instance parses");
        assert_eq!(again, ci);
    }
});
