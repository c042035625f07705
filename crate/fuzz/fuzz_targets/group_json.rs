#![no_main]

use libfuzzer_sys::fuzz_target;
use twistedqd::group::{parse_group_json, GroupFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = parse_group_json(text) else { return };
    // an accepted table must survive a write/read cycle unchanged
    let again = serde_json::to_string(&GroupFile::from_group(&g)).unwrap();
    let h = parse_group_json(&again).unwrap();
    assert_eq!(g.table_rows(), h.table_rows());
});
