#![no_main]
use libfuzzer_sys::fuzz_target;

use discordlab_core::scenario_file::parse_scenario;

fuzz_target!(|data: &str| {
    if let Ok(file) = parse_scenario(data) {
        let _ = file.model();
        let _ = file.with_points(3);
    }
});
