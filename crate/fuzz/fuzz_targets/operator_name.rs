#![no_main]
use libfuzzer_sys::fuzz_target;

use discordlab_core::operators::named;

fuzz_target!(|input: (u8, &str)| {
    let (dim, name) = input;
    let dim = usize::from(dim % 64);
    if let Ok(m) = named(name, dim) {
        assert_eq!((m.nrows(), m.ncols()), (dim, dim));
    }
});
