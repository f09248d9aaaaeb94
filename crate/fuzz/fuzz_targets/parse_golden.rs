#![no_main]

use cqs_cli::parse::parse_golden;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = parse_golden(s) {
        for c in &g.components {
            assert_eq!(c.d.data.len(), c.d.rows * c.d.cols);
            assert_eq!(c.cum_d.data.len(), c.cum_d.rows * c.cum_d.cols);
        }
    }
});
