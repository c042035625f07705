use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;
use twistedqd::cohomology::{parse_cocycle_json, CheckMode};
use twistedqd::group::{build_group, builtin_group, parse_group_json, GroupFile};
use twistedqd::lattice::{builtin_lattice, parse_lattice_json};
use twistedqd::region::parse_region_json;
use twistedqd::spec::{group_spec, parse_term};

fn seeds(target: &str) -> Vec<Vec<u8>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    assert!(!paths.is_empty(), "no seeds in {}", dir.display());
    paths.iter().map(|p| fs::read(p).unwrap()).collect()
}

// The bodies below mirror the fuzz targets so the corpus is exercised on stable.

fn group_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(g) = parse_group_json(text) else { return };
    let again = serde_json::to_string(&GroupFile::from_group(&g)).unwrap();
    assert_eq!(parse_group_json(&again).unwrap().table_rows(), g.table_rows());
}

fn cocycle_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(file) = parse_cocycle_json(text) else { return };
    let group = Arc::new(builtin_group("dihedral", &[3]).unwrap());
    let _ = file.into_cocycle(group, CheckMode::Exhaustive);
}

fn lattice_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(l) = parse_lattice_json(text) else { return };
    let again = serde_json::to_string(&l.to_file()).unwrap();
    assert_eq!(parse_lattice_json(&again).unwrap().to_file(), l.to_file());
}

fn region_json(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let lattice = builtin_lattice("square_patch", &[4, 4]).unwrap();
    let _ = parse_region_json(&lattice, text);
}

fn family_spec(data: &[u8]) {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(term) = parse_term(text) else { return };
    assert_eq!(parse_term(&term.to_string()).unwrap(), term);
    if let Ok(spec) = group_spec(&term) {
        let _ = build_group(&spec);
    }
}

type Target = (&'static str, fn(&[u8]));

const TARGETS: [Target; 5] = [
    ("group_json", group_json),
    ("cocycle_json", cocycle_json),
    ("lattice_json", lattice_json),
    ("region_json", region_json),
    ("family_spec", family_spec),
];

#[test]
fn corpus_seeds_replay() {
    for (name, f) in TARGETS {
        for s in seeds(name) {
            f(&s);
        }
    }
}

#[test]
fn valid_seeds_are_accepted() {
    for s in seeds("lattice_json") {
        assert!(parse_lattice_json(std::str::from_utf8(&s).unwrap()).is_ok());
    }
    let l = builtin_lattice("square_patch", &[4, 4]).unwrap();
    let ok = seeds("region_json").iter().filter(|s| parse_region_json(&l, std::str::from_utf8(s).unwrap()).is_ok()).count();
    assert_eq!(ok, 2);
}

#[test]
fn hostile_inputs_are_rejected_without_panicking() {
    family_spec(b"direct_product(cyclic(256),cyclic(256),cyclic(256),cyclic(256),cyclic(256),cyclic(256),cyclic(256),cyclic(256))");
    family_spec(b"dihedral(4611686018427387904)");
    family_spec(b"quaternion(4611686018427387904)");
    family_spec(b"-");
    family_spec(&b"cyclic(".repeat(100));
    cocycle_json(br#"{"group_ref":"x","entries":[[1,1,1,[-9223372036854775808,-1]]]}"#);
    cocycle_json(br#"{"group_ref":"x","entries":[[1,2,1,[1,65521]],[2,1,1,[1,65519]],[1,1,2,[1,65537]]]}"#);
    lattice_json(br#"{"vertices":[{"label":0,"class":0}],"edges":[],"faces":[[-9223372036854775808,1,2]],"mode":"open"}"#);
    region_json(br#"{"edges":[18446744073709551615],"boundary":[]}"#);
}

fn mutate(seed: &[u8], edits: &[(usize, u8)]) -> Vec<u8> {
    let mut out = seed.to_vec();
    for &(pos, byte) in edits {
        if out.is_empty() {
            out.push(byte);
        } else {
            let i = pos % out.len();
            match byte % 3 {
                0 => out[i] = byte,
                1 => {
                    out.remove(i);
                }
                _ => out.insert(i, byte),
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mutated_seeds_never_panic(pick in 0usize..1000, edits in prop::collection::vec((any::<usize>(), any::<u8>()), 1..8)) {
        let (name, f) = TARGETS[pick % TARGETS.len()];
        let all = seeds(name);
        f(&mutate(&all[pick % all.len()], &edits));
    }
}
