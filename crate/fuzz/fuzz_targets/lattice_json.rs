#![no_main]

use libfuzzer_sys::fuzz_target;
use twistedqd::lattice::parse_lattice_json;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(l) = parse_lattice_json(text) else { return };
    let again = serde_json::to_string(&l.to_file()).unwrap();
    assert_eq!(parse_lattice_json(&again).unwrap().to_file(), l.to_file());
});
