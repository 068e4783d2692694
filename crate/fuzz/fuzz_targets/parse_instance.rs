#![no_main]

use heavylight::instance::{instance_to_json, parse_instance, parse_instance_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(inst) = parse_instance_bytes(data) {
        let again = parse_instance(&instance_to_json(&inst)).expect("serialized instance parses");
        assert_eq!(again, inst);
    }
});
