#![no_main]

use cqs_cli::parse::parse_sequence;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_sequence(s) {
        assert!(!x.is_empty());
        let joined: Vec<String> = x.iter().map(i64::to_string).collect();
        assert_eq!(parse_sequence(&joined.join(",")).unwrap(), x);
    }
});
