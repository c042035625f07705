#![no_main]

use libfuzzer_sys::fuzz_target;
use twistedqd_cli::{output_path, RunManifest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = RunManifest::from_json(text) else { return };
    let again = serde_json::to_string(&m).unwrap();
    assert_eq!(RunManifest::from_json(&again).unwrap(), m);
    let _ = output_path(&m, Some(std::path::Path::new("out")));
});
