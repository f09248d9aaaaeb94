#![no_main]

use cqs_cli::parse::{parse_int, parse_pair};
use libfuzzer_sys::fuzz_target;

// Input is "P Q" or "P\nQ".
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(n) = parse_int(s) {
        assert_eq!(parse_int(&n.to_string()).unwrap(), n);
    }
    let mut parts = s.splitn(2, [' ', '\n']);
    let (Some(p), Some(q)) = (parts.next(), parts.next()) else { return };
    if let Ok((p, q)) = parse_pair(p, q) {
        assert!(p > q && q > 0.into());
    }
});
