#![no_main]

use ea_lab_core::report::Report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(report) = Report::from_toml(text) {
        // a decoded report re-encodes; its self-check may fail but must not panic
        if let Ok(again) = report.to_toml() {
            let _ = Report::from_toml(&again);
        }
        let _ = report.check();
        let _ = report.strongest_evidence();
    }
});
