#![no_main]

use ea_lab_core::problem::{parse_vector, parse_vector_list};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(list) = parse_vector_list(text) {
        assert!(list.iter().flatten().all(|x| x.is_finite()));
        let rendered: Vec<String> = list.iter().map(|v| format!("{},{},{}", v[0], v[1], v[2])).collect();
        assert_eq!(parse_vector_list(&rendered.join("\n")).unwrap(), list);
    }
    let _ = parse_vector(text);
});
