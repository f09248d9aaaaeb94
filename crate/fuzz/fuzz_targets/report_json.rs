#![no_main]

use cqs_cli::report::{from_json, to_json};
use libfuzzer_sys::fuzz_target;

// Anything that parses as a report renders back to an equal report.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = from_json(s) {
        let text = to_json(&r);
        assert_eq!(from_json(&text).unwrap(), r);
        for c in &r.components {
            let _ = c.d.to_matrix();
        }
    }
});
