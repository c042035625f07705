use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use twistedqd::cohomology::*;
use twistedqd::group::*;
use twistedqd::lattice::*;
use twistedqd::operators::*;
use twistedqd::phase::{Cyclo, Phase};

fn group(name: &str, params: &[i64]) -> Arc<FiniteGroup> {
    Arc::new(builtin_group(name, params).unwrap())
}

fn model(lattice: &str, lp: &[i64], alpha: Cocycle3) -> Model {
    Model::new(builtin_lattice(lattice, lp).unwrap(), alpha)
}

fn d3_sign() -> Cocycle3 {
    builtin_cocycle(group("dihedral", &[3]), "dihedral_sign", &[3, 1]).unwrap()
}

fn z2_twisted() -> Cocycle3 {
    builtin_cocycle(group("cyclic", &[2]), "cyclic", &[2, 1]).unwrap()
}

fn random_coloring(rng: &mut ChaCha8Rng, m: &Model) -> Coloring {
    let n = m.group().order();
    (0..m.num_edges()).map(|_| rng.gen_range(0..n) as Elem).collect()
}

/// Planar star of degree 4: v1 top, v2 left, v3 center, v4 right, v5 bottom.
const DIAMOND: &str = r#"{"vertices":[{"label":1,"class":0},{"label":2,"class":1},{"label":3,"class":2},{"label":4,"class":3},{"label":5,"class":4}],
"edges":[{"u":1,"v":2,"class":0},{"u":1,"v":3,"class":1},{"u":1,"v":4,"class":2},{"u":2,"v":3,"class":3},{"u":2,"v":5,"class":4},{"u":3,"v":4,"class":5},{"u":3,"v":5,"class":6},{"u":4,"v":5,"class":7}],
"faces":[[1,4,-2],[2,6,-3],[5,-7,-4],[7,-8,-6]],"mode":"patch"}"#;

#[test]
fn holonomy_of_trivial_coloring_is_identity() {
    let l = builtin_lattice("genus_polygon", &[2]).unwrap();
    let g = group("dihedral", &[3]);
    let c = vec![0; l.num_edge_classes()];
    for f in l.faces() {
        assert_eq!(holonomy(&l, &g, &c, &f.steps).unwrap(), 0);
    }
    assert!(matches!(holonomy(&l, &g, &c, &[]), Err(OperatorError::NotAClosedCycle(_))));
}

#[test]
fn open_path_is_not_a_cycle() {
    let l = builtin_lattice("square_patch", &[2, 2]).unwrap();
    let g = group("cyclic", &[2]);
    let c = vec![0; l.num_edge_classes()];
    let steps = &l.faces()[0].steps;
    assert!(matches!(holonomy(&l, &g, &c, &steps[..2]), Err(OperatorError::NotAClosedCycle(_))));
}

#[test]
fn square_face_holonomy_is_ordered_product() {
    let l = builtin_lattice("square_patch", &[1, 1]).unwrap();
    let geom = PatchGeometry { w: 1, h: 1 };
    let g = group("dihedral", &[3]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let c: Coloring = (0..4).map(|_| rng.gen_range(0..6)).collect();
        let (b, r, t, lf) = (c[geom.h_edge(0, 0)], c[geom.v_edge(1, 0)], c[geom.h_edge(0, 1)], c[geom.v_edge(0, 0)]);
        // counterclockwise from the bottom left corner; the face may start at another corner
        let word = [b, r, g.inv(t), g.inv(lf)];
        let rotations: Vec<Elem> = (0..4).map(|s| (0..4).fold(0, |acc, k| g.mul(acc, word[(s + k) % 4]))).collect();
        let h = holonomy(&l, &g, &c, &l.faces()[0].steps).unwrap();
        assert!(rotations.contains(&h));
    }
}

#[test]
fn torus_face_projector() {
    let m = model("torus_minimal", &[], Cocycle3::trivial(group("cyclic", &[4])));
    let g = m.group().clone();
    for a in 0..4 {
        for b in 0..4 {
            let flat = vec![a, b, g.mul(a, b)];
            assert!(m.is_flat(&flat));
            let off = vec![a, b, g.mul(g.mul(a, b), 1)];
            assert!(!m.is_flat(&off));
            let s = State::basis(off.clone());
            assert!(m.apply_face_projector(0, &s).is_empty() || m.apply_face_projector(1, &s).is_empty());
        }
    }
    assert!(m.is_flat(&[0, 0, 0]));
}

#[test]
fn face_projector_is_idempotent() {
    let m = model("refined_torus", &[2], d3_sign());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut s = State::zero();
    for _ in 0..30 {
        s.add(random_coloring(&mut rng, &m), &Cyclo::one());
    }
    for f in 0..m.num_faces() {
        let once = m.apply_face_projector(f, &s);
        assert_eq!(m.apply_face_projector(f, &once), once);
    }
}

#[test]
fn trivial_cocycle_gives_pure_permutations() {
    let m = model("refined_torus", &[2], Cocycle3::trivial(group("dihedral", &[3])));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let c = random_coloring(&mut rng, &m);
        let v = rng.gen_range(0..m.num_vertices());
        let (_, ph) = m.vertex_op_fast(v, rng.gen_range(0..6), &c);
        assert!(ph.is_one());
    }
}

#[test]
fn identity_element_acts_trivially() {
    let m = model("genus_polygon", &[2], d3_sign());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let c = random_coloring(&mut rng, &m);
        assert_eq!(m.vertex_op_fast(0, 0, &c), (c.clone(), Phase::ONE));
    }
}

#[test]
fn torus_phase_is_beta_ratio() {
    for alpha in [d3_sign(), builtin_cocycle(group("direct_product", &[4, 4, 4]), "product_tricharacter", &[4]).unwrap()] {
        let g = alpha.group().clone();
        let m = model("torus_minimal", &[], alpha.clone());
        for a in g.elements() {
            for b in g.elements() {
                if g.mul(a, b) != g.mul(b, a) {
                    continue;
                }
                let c = vec![a, b, g.mul(a, b)];
                for x in g.centralizer(&[a, b]).members().iter().copied() {
                    let (img, ph) = m.vertex_op_fast(0, x, &c);
                    assert_eq!(img, c);
                    assert_eq!(ph, beta(&alpha, x, a, b) * beta(&alpha, x, b, a).inv());
                }
            }
        }
    }
}

#[test]
fn tricharacter_phase_i() {
    let alpha = builtin_cocycle(group("direct_product", &[4, 4, 4]), "product_tricharacter", &[4]).unwrap();
    let g = alpha.group().clone();
    let m = model("torus_minimal", &[], alpha);
    let el = |x: u8, y: u8, z: u8| x * 16 + y * 4 + z;
    let (a, b) = (el(1, 2, 3), el(3, 3, 2));
    let c = vec![a, b, g.mul(a, b)];
    let (img, ph) = m.vertex_op_fast(0, el(0, 0, 1), &c);
    assert_eq!(img, c);
    assert_eq!(ph, Phase::new(1, 4));
    assert_eq!(m.vertex_op(0, el(0, 0, 1), &c), Some((c, Phase::new(1, 4))));
}

#[test]
fn degree_four_vertex_matches_four_factor_formula() {
    let l = parse_lattice_json(DIAMOND).unwrap();
    for alpha in [d3_sign(), builtin_cocycle(group("cyclic", &[4]), "cyclic", &[4, 1]).unwrap()] {
        let g = alpha.group().clone();
        let m = Model::new(l.clone(), alpha.clone());
        assert_eq!(m.active_vertices(), &[2]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let c = random_coloring(&mut rng, &m);
            let x = rng.gen_range(0..g.order()) as Elem;
            let xi = g.inv(x);
            // classes: 12, 13, 14, 23, 25, 34, 35, 45
            let want = alpha.get(c[0], g.mul(c[3], xi), x)
                * alpha.get(g.mul(c[1], xi), x, c[5]).inv()
                * alpha.get(g.mul(c[3], xi), x, c[6])
                * alpha.get(x, c[5], c[7]).inv();
            let mut moved = c.clone();
            moved[1] = g.mul(c[1], xi);
            moved[3] = g.mul(c[3], xi);
            moved[5] = g.mul(x, c[5]);
            moved[6] = g.mul(x, c[6]);
            assert_eq!(m.vertex_op_fast(2, x, &c), (moved.clone(), want));
            assert_eq!(m.vertex_op(2, x, &c), Some((moved, want)));
        }
    }
}

#[test]
fn reference_path_agrees_and_never_leaves_the_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alphas = [d3_sign(), z2_twisted(), builtin_cocycle(group("cyclic", &[4]), "cyclic", &[4, 1]).unwrap()];
    for alpha in alphas {
        for (name, p) in [("torus_minimal", vec![]), ("genus_polygon", vec![2]), ("refined_torus", vec![2]), ("square_patch", vec![2, 2])] {
            let m = model(name, &p, alpha.clone());
            let n = m.group().order();
            for _ in 0..1500 {
                let c = random_coloring(&mut rng, &m);
                let v = rng.gen_range(0..m.num_vertices());
                let x = rng.gen_range(0..n) as Elem;
                let fast = m.vertex_op_fast(v, x, &c);
                let slow = m.vertex_op(v, x, &c).expect("image left the extension");
                assert_eq!(fast, slow, "{name}");
                let tri = m.extend_coloring(&c);
                assert_eq!(m.restrict_coloring(&tri), c);
                assert!(m.in_image(&tri));
            }
        }
    }
}

#[test]
fn triangular_lattice_needs_no_extension() {
    let m = model("genus_polygon", &[2], d3_sign());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = random_coloring(&mut rng, &m);
    let tri = m.extend_coloring(&c);
    assert!(tri.ghosts.is_empty());
    assert_eq!(tri.classes, c);
    let (out, ph) = m.vertex_op_tri(0, 3, &tri);
    assert_eq!((out.classes, ph), m.vertex_op_fast(0, 3, &c));
}

#[test]
fn toric_code_star_is_uniform_superposition() {
    let m = model("square_patch", &[2, 2], Cocycle3::trivial(group("cyclic", &[2])));
    let geom = PatchGeometry { w: 2, h: 2 };
    let v = geom.vertex(1, 1);
    assert_eq!(m.active_vertices(), &[v]);
    let c = vec![0; m.num_edges()];
    let out = m.apply_vertex_projector(v, &State::basis(c.clone()));
    let mut flipped = c.clone();
    for k in m.lattice().star_classes(v) {
        flipped[k] = 1;
    }
    let half = Cyclo::rational(Ratio::new(1, 2));
    assert_eq!(out.len(), 2);
    assert_eq!(out.get(&c), Some(&half));
    assert_eq!(out.get(&flipped), Some(&half));
}

fn random_flat_state(m: &Model, rng: &mut ChaCha8Rng, terms: usize) -> State {
    let mut s = State::zero();
    while s.len() < terms {
        let c = random_coloring(rng, m);
        if m.is_flat(&c) {
            s.add(c, &Cyclo::from_phase(Phase::new(rng.gen_range(0..4), 4), Ratio::from_integer(1)));
        }
    }
    s
}

#[test]
fn vertex_projectors_are_idempotent_and_commute() {
    let m = model("refined_torus", &[2], z2_twisted());
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = random_flat_state(&m, &mut rng, 6);
    for v in 0..m.num_vertices() {
        let once = m.apply_vertex_projector(v, &s);
        assert_eq!(m.apply_vertex_projector(v, &once), once);
        for u in 0..m.num_vertices() {
            let uv = m.apply_vertex_projector(u, &m.apply_vertex_projector(v, &s));
            let vu = m.apply_vertex_projector(v, &m.apply_vertex_projector(u, &s));
            assert_eq!(uv, vu);
        }
        for f in 0..m.num_faces() {
            let af = m.apply_vertex_projector(v, &m.apply_face_projector(f, &s));
            let fa = m.apply_face_projector(f, &m.apply_vertex_projector(v, &s));
            assert_eq!(af, fa);
        }
    }
}

#[test]
fn group_law_on_flat_colorings() {
    let m = model("genus_polygon", &[2], d3_sign());
    let g = m.group().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = random_flat_state(&m, &mut rng, 20);
    for (c, _) in s.iter() {
        for x in g.elements() {
            for y in g.elements() {
                let (c1, p1) = m.vertex_op_fast(0, y, c);
                let (c2, p2) = m.vertex_op_fast(0, x, &c1);
                let (c3, p3) = m.vertex_op_fast(0, g.mul(x, y), c);
                assert_eq!((c2, p1 * p2), (c3, p3));
            }
        }
    }
}

#[test]
fn relations_on_small_closed_surfaces() {
    let r = verify_relations(&model("torus_minimal", &[], z2_twisted()), Coverage::Exhaustive);
    assert!(r.passed && r.exhaustive, "{r:?}");
    assert_eq!(r.colorings_checked, 8);
    let r = verify_relations(&model("torus_minimal", &[], d3_sign()), Coverage::Exhaustive);
    assert!(r.passed && r.exhaustive, "{r:?}");
    assert_eq!(r.flat_colorings_checked, 18);
    let r = verify_relations(&model("genus_polygon", &[2], Cocycle3::trivial(group("cyclic", &[3]))), Coverage::Exhaustive);
    assert!(r.passed && r.exhaustive, "{r:?}");
    let r = verify_relations(&model("genus_polygon", &[2], Cocycle3::trivial(group("dihedral", &[3]))), Coverage::Sampled { samples: 20_000, seed: 1 });
    assert!(r.passed && !r.exhaustive, "{r:?}");
    let r = verify_relations(&model("refined_torus", &[2], builtin_cocycle(group("cyclic", &[4]), "cyclic", &[4, 1]).unwrap()), Coverage::Sampled { samples: 5_000, seed: 2 });
    assert!(r.passed, "{r:?}");
}

#[test]
fn corrupted_sign_breaks_group_law() {
    // phases of order two are their own inverses, so use Z3
    let mut m = model("torus_minimal", &[], builtin_cocycle(group("cyclic", &[3]), "cyclic", &[3, 1]).unwrap());
    assert!(verify_relations(&m, Coverage::Exhaustive).passed);
    let terms = m.program(0).num_terms();
    let caught = (0..terms).any(|t| {
        let mut bad = m.clone();
        bad.program_mut(0).corrupt_sign(t);
        let r = verify_relations(&bad, Coverage::Exhaustive);
        !r.group_law && r.first_violation.is_some()
    });
    assert!(caught);
    m.program_mut(0).corrupt_sign(0);
    m.program_mut(0).corrupt_sign(0);
    assert!(verify_relations(&m, Coverage::Exhaustive).passed);
}

#[test]
fn coloring_checks() {
    let m = model("torus_minimal", &[], z2_twisted());
    assert!(m.check_coloring(&[0, 1, 1]).is_ok());
    assert!(matches!(m.check_coloring(&[0, 1]), Err(OperatorError::WrongLength { .. })));
    assert!(matches!(m.check_coloring(&[0, 1, 2]), Err(OperatorError::BadElement(_))));
}

#[test]
fn dense_projector_cap() {
    let m = model("refined_torus", &[2], z2_twisted());
    assert!(matches!(m.materialize_projector(100), Err(OperatorError::RegionTooLargeToMaterialize { .. })));
    let p = m.materialize_projector(1 << 10).unwrap();
    assert_eq!(p.dim, 256);
    assert!(p.is_idempotent() && p.is_hermitian());
}
