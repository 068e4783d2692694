#![no_main]

use heavylight::instance::{parse_instance, parse_schedule, parse_schedule_bytes, schedule_to_json};
use libfuzzer_sys::fuzz_target;

const INSTANCE: &str = r#"{"eps": "1/3", "machines": ["a", "b", "c"],
  "heavy": [{"id": "h0", "eligible": ["a", "b"]}, {"id": "h1", "eligible": ["c"]}],
  "light": [{"id": "l0", "eligible": ["a", "c"]}, {"id": "l1", "eligible": ["b"]}]}"#;

fuzz_target!(|data: &[u8]| {
    let inst = parse_instance(INSTANCE).expect("fixed instance parses");
    if let Ok(s) = parse_schedule_bytes(&inst, data) {
        let again = parse_schedule(&inst, &schedule_to_json(&inst, &s)).expect("serialized schedule parses");
        assert_eq!(again, s);
    }
});
