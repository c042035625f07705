#![no_main]

use libfuzzer_sys::fuzz_target;
use twistedqd::group::build_group;
use twistedqd::spec::{group_spec, parse_term};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(term) = parse_term(text) else { return };
    // printing a parsed term must give an expression that parses to the same term
    assert_eq!(parse_term(&term.to_string()).unwrap(), term);
    if let Ok(spec) = group_spec(&term) {
        let _ = build_group(&spec);
    }
});
