#![no_main]

use heavylight_cli::experiment::parse_experiment_config_bytes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_experiment_config_bytes(data);
});
