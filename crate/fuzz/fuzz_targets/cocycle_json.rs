#![no_main]

use std::sync::Arc;

use libfuzzer_sys::fuzz_target;
use twistedqd::cohomology::{parse_cocycle_json, CheckMode};
use twistedqd::group::builtin_group;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_cocycle_json(text) else { return };
    let group = Arc::new(builtin_group("dihedral", &[3]).unwrap());
    let _ = file.into_cocycle(group, CheckMode::Exhaustive);
});
