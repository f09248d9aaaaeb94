#![no_main]

use cqs_cli::parse::parse_checks;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(checks) = parse_checks(s) {
        assert!(!checks.is_empty() && checks.windows(2).all(|w| w[0] < w[1]));
        let names: Vec<&str> = checks.iter().map(|c| c.name()).collect();
        assert_eq!(parse_checks(&names.join(",")).unwrap(), checks);
    }
});
