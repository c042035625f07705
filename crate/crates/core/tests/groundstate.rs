use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::Arc;
use twistedqd::cohomology::*;
use twistedqd::group::*;
use twistedqd::groundstate::*;
use twistedqd::lattice::*;
use twistedqd::operators::*;
use twistedqd::phase::Phase;

fn group(name: &str, params: &[i64]) -> Arc<FiniteGroup> {
    Arc::new(builtin_group(name, params).unwrap())
}

fn model(lattice: &str, lp: &[i64], alpha: Cocycle3) -> Model {
    Model::new(builtin_lattice(lattice, lp).unwrap(), alpha)
}

fn tricharacter() -> Cocycle3 {
    builtin_cocycle(group("direct_product", &[4, 4, 4]), "product_tricharacter", &[4]).unwrap()
}

fn d3_sign() -> Cocycle3 {
    builtin_cocycle(group("dihedral", &[3]), "dihedral_sign", &[3, 1]).unwrap()
}

fn dim(m: &Model) -> usize {
    ground_state_dimension(m).unwrap().dimension
}

/// Orbits of tuples satisfying `relation` under simultaneous conjugation,
/// counted by brute force.
fn conjugation_orbits(g: &FiniteGroup, arity: usize, relation: impl Fn(&[Elem]) -> bool) -> (usize, usize) {
    let n = g.order();
    let total = n.pow(arity as u32);
    let decode = |mut i: usize| -> Vec<Elem> {
        (0..arity)
            .map(|_| {
                let x = (i % n) as Elem;
                i /= n;
                x
            })
            .collect()
    };
    let homs: Vec<Vec<Elem>> = (0..total).map(decode).filter(|t| relation(t)).collect();
    let mut seen: BTreeSet<Vec<Elem>> = BTreeSet::new();
    let mut orbits = 0;
    for t in &homs {
        if seen.contains(t) {
            continue;
        }
        orbits += 1;
        for x in g.elements() {
            seen.insert(t.iter().map(|&a| g.conj(x, a)).collect());
        }
    }
    (homs.len(), orbits)
}

fn commutator(g: &FiniteGroup, a: Elem, b: Elem) -> Elem {
    g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b)))
}

/// The flat genus-2 coloring with the given side colors (chords are forced).
fn genus2_coloring(m: &Model, sides: [Elem; 4]) -> Coloring {
    let flats = enumerate_flat(m, &Scope::full(m));
    let found = flats.iter().find(|c| c[..4] == sides);
    found.expect("sides do not extend to a flat coloring")
}

#[test]
fn flat_counts() {
    let m = model("torus_minimal", &[], Cocycle3::trivial(group("cyclic", &[4])));
    assert_eq!(enumerate_flat(&m, &Scope::full(&m)).len(), 16);
    let m = model("torus_minimal", &[], Cocycle3::trivial(group("dihedral", &[3])));
    assert_eq!(enumerate_flat(&m, &Scope::full(&m)).len(), 18);
    for (name, p) in [("torus_minimal", vec![]), ("genus_polygon", vec![3]), ("refined_torus", vec![3]), ("square_patch", vec![3, 2])] {
        let m = model(name, &p, Cocycle3::trivial(group("cyclic", &[1])));
        assert_eq!(enumerate_flat(&m, &Scope::full(&m)).len(), 1);
    }
}

#[test]
fn flat_set_matches_brute_force() {
    let m = model("refined_torus", &[2], Cocycle3::trivial(group("dihedral", &[3])));
    let flats = enumerate_flat(&m, &Scope::full(&m));
    let n = 6u64;
    let mut count = 0;
    let mut c = vec![0; m.num_edges()];
    for i in 0..n.pow(m.num_edges() as u32) {
        let mut k = i;
        for x in c.iter_mut() {
            *x = (k % n) as Elem;
            k /= n;
        }
        if m.is_flat(&c) {
            count += 1;
            assert!(flats.position(&c).is_some());
        }
    }
    assert_eq!(flats.len(), count);
    // colorings are sorted and the index is consistent
    for i in 0..flats.len() {
        assert_eq!(flats.position(&flats.get(i)), Some(i));
        if i > 0 {
            assert!(flats.get(i - 1) < flats.get(i));
        }
    }
}

#[test]
fn genus_two_flats_satisfy_the_side_relation() {
    let m = model("genus_polygon", &[2], Cocycle3::trivial(group("dihedral", &[3])));
    let g = m.group().clone();
    let flats = enumerate_flat(&m, &Scope::full(&m));
    assert_eq!(flats.len(), 486);
    for c in flats.iter() {
        // side pairing g1 g2 g3 g4 g1^-1 g2^-1 g3^-1 g4^-1
        let fwd = c[..4].iter().fold(0, |a, &b| g.mul(a, b));
        let back = c[..4].iter().fold(0, |a, &b| g.mul(a, g.inv(b)));
        assert_eq!(g.mul(fwd, back), 0);
    }
}

#[test]
fn torus_stabilizer_is_centralizer() {
    let m = model("torus_minimal", &[], Cocycle3::trivial(group("dihedral", &[3])));
    let g = m.group().clone();
    for a in g.elements() {
        for b in g.centralizer(&[a]).members().iter().copied() {
            let st = stabilizer(&m, &[a, b, g.mul(a, b)]).unwrap();
            assert_eq!(st.len(), 1);
            assert_eq!(st[0].subgroup.members(), g.centralizer(&[a, b]).members());
        }
    }
    let st = stabilizer(&m, &[0, 0, 0]).unwrap();
    assert_eq!(st[0].subgroup.len(), 6);
}

#[test]
fn genus_two_rotation_stabilizer() {
    let m = model("genus_polygon", &[2], Cocycle3::trivial(group("dihedral", &[3])));
    let c = genus2_coloring(&m, [1, 2, 1, 2]);
    let st = stabilizer(&m, &c).unwrap();
    assert_eq!(st.len(), 1);
    assert_eq!(st[0].subgroup.members(), &[0, 1, 2]);
}

#[test]
fn regularity_examples() {
    let m = model("torus_minimal", &[], Cocycle3::trivial(group("dihedral", &[3])));
    let g = m.group().clone();
    for a in g.elements() {
        for b in g.centralizer(&[a]).members().iter().copied() {
            assert!(is_regular(&m, &[a, b, g.mul(a, b)]).unwrap().regular);
        }
    }
    let m = model("genus_polygon", &[2], d3_sign());
    let flats = enumerate_flat(&m, &Scope::full(&m));
    for c in flats.iter().step_by(7) {
        assert!(is_regular(&m, &c).unwrap().regular);
    }
    let m = model("torus_minimal", &[], tricharacter());
    let g = m.group().clone();
    let el = |x: u8, y: u8, z: u8| x * 16 + y * 4 + z;
    let (a, b) = (el(1, 2, 3), el(3, 3, 2));
    let r = is_regular(&m, &[a, b, g.mul(a, b)]).unwrap();
    assert!(!r.regular);
    let (_, phase) = r.witness.expect("witness");
    assert_ne!(phase, Phase::ONE);
    assert!(matches!(is_regular(&m, &[a, b, 0]), Err(GroundStateError::NotFlat)));
}

#[test]
fn orbit_examples() {
    let m = model("genus_polygon", &[2], Cocycle3::trivial(group("cyclic", &[1])));
    let o = orbit_bfs(&m, &vec![0; m.num_edges()]).unwrap();
    assert_eq!(o.elements.len(), 1);
    assert!(o.regular);

    let m = model("genus_polygon", &[2], d3_sign());
    let c = genus2_coloring(&m, [1, 2, 1, 2]);
    let o = orbit_bfs(&m, &c).unwrap();
    // index of the rotation subgroup, with transversal {e, s}
    assert_eq!(o.elements.len(), 2);
    let (img, _) = m.vertex_op_fast(0, 3, &c);
    assert!(o.elements.iter().any(|(x, _)| x == &img));

    let m = model("torus_minimal", &[], builtin_cocycle(group("cyclic", &[4]), "cyclic", &[4, 1]).unwrap());
    let flats = enumerate_flat(&m, &Scope::full(&m));
    for c in flats.iter() {
        assert_eq!(orbit_bfs(&m, &c).unwrap().elements.len(), 1);
    }
}

#[test]
fn orbit_regularity_agrees_with_stabilizer_phases() {
    for m in [model("torus_minimal", &[], tricharacter()), model("genus_polygon", &[2], d3_sign()), model("refined_torus", &[2], builtin_cocycle(group("cyclic", &[4]), "cyclic", &[4, 1]).unwrap())] {
        let d = decompose(&m, &Scope::full(&m)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let gsize = m.group().order();
        for o in &d.orbits {
            let rep = d.flats.get(o.representative);
            let r = is_regular(&m, &rep).unwrap();
            assert_eq!(r.regular, o.regular);
            // orbit-stabilizer: |orbit| * |stabilizer| = |G|^{active vertices}
            assert_eq!(o.elements.len() * r.stabilizer_size, gsize.pow(m.active_vertices().len() as u32));
            for _ in 0..3 {
                let (i, _) = o.elements[rng.gen_range(0..o.elements.len())];
                assert_eq!(is_regular(&m, &d.flats.get(i)).unwrap().regular, o.regular);
            }
        }
    }
}

#[test]
fn closed_form_agrees_on_one_vertex_surfaces() {
    for m in [model("torus_minimal", &[], tricharacter()), model("genus_polygon", &[2], d3_sign())] {
        let g = m.group().clone();
        let d = decompose(&m, &Scope::full(&m)).unwrap();
        let sides = m.lattice().num_edge_classes().min(if m.lattice().faces().len() == 2 { 2 } else { 4 });
        for o in &d.orbits {
            let c = d.flats.get(o.representative);
            let cent = g.centralizer(&c[..sides]);
            let cf = cent.members().iter().all(|&x| genus_closed_form(m.alpha(), &c[..sides], x).is_one());
            assert_eq!(cf, o.regular);
        }
    }
}

#[test]
fn cyclic_torus_dimensions() {
    for mm in 2..=4i64 {
        let g = group("cyclic", &[mm]);
        for p in 0..mm {
            let a = builtin_cocycle(g.clone(), "cyclic", &[mm, p]).unwrap();
            assert_eq!(dim(&model("torus_minimal", &[], a)), (mm * mm) as usize);
        }
    }
    let a = builtin_cocycle(group("cyclic", &[4]), "cyclic", &[4, 1]).unwrap();
    assert_eq!(dim(&model("refined_torus", &[2], a)), 16);
    assert_eq!(dim(&model("refined_torus", &[3], Cocycle3::trivial(group("cyclic", &[2])))), 4);
}

#[test]
fn tricharacter_torus_dimensions() {
    assert_eq!(dim(&model("torus_minimal", &[], tricharacter())), 400);
    assert_eq!(dim(&model("torus_minimal", &[], Cocycle3::trivial(group("direct_product", &[4, 4, 4])))), 4096);
}

#[test]
fn d3_genus_two_dimension() {
    let c = ground_state_dimension(&model("genus_polygon", &[2], Cocycle3::trivial(group("dihedral", &[3])))).unwrap();
    assert_eq!((c.dimension, c.flat_count, c.orbit_count), (116, 486, 116));
    assert_eq!(dim(&model("genus_polygon", &[2], d3_sign())), 116);
}

#[test]
fn trivial_cocycle_counts_representations() {
    for g in [group("dihedral", &[3]), group("dihedral", &[4]), group("quaternion", &[2]), group("cyclic", &[5])] {
        let (_, orbits) = conjugation_orbits(&g, 2, |t| g.mul(t[0], t[1]) == g.mul(t[1], t[0]));
        assert_eq!(dim(&model("torus_minimal", &[], Cocycle3::trivial(g.clone()))), orbits);
    }
    let g = group("dihedral", &[3]);
    let (homs, orbits) = conjugation_orbits(&g, 4, |t| g.mul(commutator(&g, t[0], t[1]), commutator(&g, t[2], t[3])) == 0);
    assert_eq!((homs, orbits), (486, 116));
    assert_eq!(dim(&model("genus_polygon", &[2], Cocycle3::trivial(g))), orbits);
    let g = group("direct_product", &[2, 2]);
    let (_, orbits) = conjugation_orbits(&g, 4, |t| g.mul(commutator(&g, t[0], t[1]), commutator(&g, t[2], t[3])) == 0);
    assert_eq!(dim(&model("genus_polygon", &[2], Cocycle3::trivial(g))), orbits);
}

#[test]
fn projector_oracle_agrees() {
    let z2 = group("cyclic", &[2]);
    let cases = [
        model("refined_torus", &[2], builtin_cocycle(z2.clone(), "cyclic", &[2, 1]).unwrap()),
        model("genus_polygon", &[2], Cocycle3::trivial(z2.clone())),
        model("torus_minimal", &[], d3_sign()),
        model("torus_minimal", &[], builtin_cocycle(group("cyclic", &[6]), "cyclic", &[6, 5]).unwrap()),
    ];
    for m in cases {
        let r = projector_oracle(&m, 10_000, 512).unwrap();
        assert!(r.idempotent && r.hermitian);
        assert_eq!(r.trace, Some(dim(&m) as i64));
        if let Some(k) = r.numeric_rank {
            assert_eq!(k, dim(&m));
        }
    }
    let m = model("refined_torus", &[3], Cocycle3::trivial(z2));
    assert!(projector_oracle(&m, 10_000, 0).is_err());
}

#[test]
fn basis_vectors_are_invariant() {
    let z2 = group("cyclic", &[2]);
    let m = model("torus_minimal", &[], Cocycle3::trivial(z2.clone()));
    let b = ground_state_basis(&m).unwrap();
    assert_eq!(b.vectors.len(), 4);
    verify_ground_state(&m, &b).unwrap();
    for m in [model("refined_torus", &[2], builtin_cocycle(z2, "cyclic", &[2, 1]).unwrap()), model("genus_polygon", &[2], d3_sign()), model("torus_minimal", &[], tricharacter())] {
        let b = ground_state_basis(&m).unwrap();
        assert_eq!(b.vectors.len(), dim(&m));
        verify_ground_state(&m, &b).unwrap();
        // disjoint supports make the basis orthogonal
        let mut seen = BTreeSet::new();
        for v in &b.vectors {
            for (c, _) in v.iter() {
                assert!(seen.insert(c.clone()));
            }
        }
    }
    let m = model("genus_polygon", &[2], Cocycle3::trivial(group("cyclic", &[1])));
    let b = ground_state_basis(&m).unwrap();
    assert_eq!(b.vectors.len(), 1);
    assert_eq!(b.orbits[0].representative, vec![0; m.num_edges()]);
}

#[test]
fn d3_rotation_orbit_basis_vector() {
    let m = model("genus_polygon", &[2], d3_sign());
    let c = genus2_coloring(&m, [1, 2, 1, 2]);
    let b = ground_state_basis(&m).unwrap();
    let k = b.vectors.iter().position(|v| v.get(&c).is_some()).unwrap();
    assert_eq!(b.vectors[k].len(), 2);
    let (img, _) = m.vertex_op_fast(0, 3, &c);
    assert!(b.vectors[k].get(&img).is_some());
}

#[test]
fn non_regular_orbit_sum_is_not_invariant() {
    let m = model("torus_minimal", &[], tricharacter());
    let g = m.group().clone();
    let el = |x: u8, y: u8, z: u8| x * 16 + y * 4 + z;
    let (a, b) = (el(1, 2, 3), el(3, 3, 2));
    let c = vec![a, b, g.mul(a, b)];
    let forced = GroundStateBasis {
        vectors: vec![State::basis(c.clone())],
        orbits: vec![Orbit { representative: c.clone(), elements: vec![(c, Phase::ONE)], regular: false }],
    };
    assert!(matches!(verify_ground_state(&m, &forced), Err(GroundStateError::NotInvariant { .. })));
    let empty = GroundStateBasis { vectors: vec![], orbits: vec![] };
    verify_ground_state(&m, &empty).unwrap();
}

#[test]
fn basis_export_is_stable() {
    let m = model("genus_polygon", &[2], d3_sign());
    let b = ground_state_basis(&m).unwrap();
    let first = serde_json::to_string(&export_basis(&b)).unwrap();
    let again = serde_json::to_string(&export_basis(&ground_state_basis(&m).unwrap())).unwrap();
    assert_eq!(first, again);
    let entries: Vec<BasisEntry> = serde_json::from_str(&first).unwrap();
    assert_eq!(entries.len(), 116);
}

#[test]
fn invariance_between_tori() {
    let z2 = group("cyclic", &[2]);
    for a in [Cocycle3::trivial(z2.clone()), builtin_cocycle(z2.clone(), "cyclic", &[2, 1]).unwrap()] {
        let r = topological_invariance_check(&model("torus_minimal", &[], a.clone()), &model("refined_torus", &[2], a.clone())).unwrap();
        assert_eq!((r.dimension_1, r.dimension_2), (4, 4));
        let same = topological_invariance_check(&model("torus_minimal", &[], a.clone()), &model("torus_minimal", &[], a)).unwrap();
        assert_eq!(same.dimension_1, same.dimension_2);
    }
    let r = topological_invariance_check(&model("torus_minimal", &[], Cocycle3::trivial(z2.clone())), &model("genus_polygon", &[2], Cocycle3::trivial(z2)));
    assert!(matches!(r, Err(GroundStateError::Mismatch(4, 16))));
}
