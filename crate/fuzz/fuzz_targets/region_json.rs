#![no_main]

use libfuzzer_sys::fuzz_target;
use twistedqd::lattice::builtin_lattice;
use twistedqd::region::parse_region_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let lattice = builtin_lattice("square_patch", &[4, 4]).unwrap();
    let _ = parse_region_json(&lattice, text);
});
