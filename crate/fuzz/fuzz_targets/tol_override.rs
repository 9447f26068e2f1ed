#![no_main]
use libfuzzer_sys::fuzz_target;

use discordlab_core::scenarios::{parse_tol_override, Tolerances};

fuzz_target!(|data: &str| {
    if let Ok((name, value)) = parse_tol_override(data) {
        assert!(value.is_finite() && value >= 0.0);
        Tolerances::default().set(&name, value).expect("accepted names are settable");
    }
});
