#![no_main]

use ea_lab_core::problem::parse_problem;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_problem(text) {
        // building may reject the values, but must not panic
        let _ = p.algebra.build();
        let _ = p.metric.build();
    }
});
