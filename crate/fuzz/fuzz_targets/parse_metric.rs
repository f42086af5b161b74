#![no_main]

use ea_lab_core::problem::{parse_metric, MetricSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_metric(text) {
        if let MetricSpec::Matrix(m) = &spec {
            assert!(m.iter().flatten().all(|x| x.is_finite()));
        }
        let _ = spec.build();
    }
});
