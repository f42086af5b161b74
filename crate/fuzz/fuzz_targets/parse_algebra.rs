#![no_main]

use ea_lab_core::problem::parse_algebra;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_algebra(text) {
        let _ = spec.build();
    }
});
