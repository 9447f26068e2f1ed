#![no_main]
use libfuzzer_sys::fuzz_target;

use discordlab_core::matrix_json::{matrix_to_json, parse_matrix};

fuzz_target!(|data: &str| {
    if let Ok(m) = parse_matrix(data) {
        let text = matrix_to_json(&m);
        let again = parse_matrix(&text).expect("serialized matrix parses");
        assert_eq!(m, again);
    }
});
