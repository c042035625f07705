//! Colorings, exact sparse states, face projectors and twisted vertex
//! operators.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohomology::Cocycle3;
use crate::group::{Elem, FiniteGroup};
use crate::lattice::{triangulate, EdgeRef, Mode, Step, SurfaceLattice, Triangulation};
use crate::phase::{Cyclo, Phase};

/// One group element per edge class.
pub type Coloring = Vec<Elem>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("cycle is not closed: {0}")]
    NotAClosedCycle(String),
    #[error("coloring has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("coloring entry {0} is not a group element")]
    BadElement(usize),
    #[error("the cocycle is defined on a group of order {cocycle}, the model uses order {model}")]
    GroupMismatch { cocycle: usize, model: usize },
    #[error("materializing {dim} basis states exceeds the cap of {cap}")]
    RegionTooLargeToMaterialize { dim: u128, cap: u128 },
}

/// Ordered product along a closed sequence of drawn-edge steps.
pub fn holonomy(l: &SurfaceLattice, group: &FiniteGroup, c: &[Elem], cycle: &[Step]) -> Result<Elem, OperatorError> {
    if cycle.is_empty() {
        return Err(OperatorError::NotAClosedCycle("empty cycle".into()));
    }
    for k in 0..cycle.len() {
        let next = cycle[(k + 1) % cycle.len()];
        if l.vertices()[l.step_head(cycle[k])].class != l.vertices()[l.step_tail(next)].class {
            return Err(OperatorError::NotAClosedCycle(format!("step {k} does not meet step {}", (k + 1) % cycle.len())));
        }
    }
    let mut x = group.identity();
    for s in cycle {
        let y = c[l.edges()[s.edge].class];
        x = group.mul(x, if s.forward { y } else { group.inv(y) });
    }
    Ok(x)
}

/// A coloring of the triangulated lattice: edge classes plus ghost edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriColoring {
    pub classes: Coloring,
    pub ghosts: Vec<Elem>,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    class: usize,
    left: bool,
    right: bool,
}

#[derive(Debug, Clone, Copy)]
struct PathStep {
    class: usize,
    forward: bool,
    left: bool,
    right: bool,
}

#[derive(Debug, Clone)]
struct Term {
    position: u8,
    negate: bool,
    a: (usize, usize),
    b: (usize, usize),
}

/// Precompiled action of `A_v^g` (or of its restriction to a region) as a
/// function of `g`.
#[derive(Debug, Clone)]
pub struct VertexProgram {
    slots: Vec<Slot>,
    steps: Vec<PathStep>,
    terms: Vec<Term>,
}

impl VertexProgram {
    /// Compiles the operator for vertex class `v`, keeping only star slots
    /// with `edge_ok(class)` and triangles of faces with `face_ok(face)`.
    pub fn compile(
        l: &SurfaceLattice,
        tri: &Triangulation,
        v: usize,
        edge_ok: impl Fn(usize) -> bool,
        face_ok: impl Fn(usize) -> bool,
    ) -> VertexProgram {
        let slots = l
            .star_classes(v)
            .into_iter()
            .filter(|&c| edge_ok(c))
            .map(|class| {
                let (a, b) = l.edge_class_ends(class);
                Slot { class, left: a == v, right: b == v }
            })
            .collect();
        let mut steps = Vec::new();
        let mut terms = Vec::new();
        let in_class = |x: usize| l.vertices()[x].class == v;
        // corners are processed in ascending label order; drawn indices are label-sorted
        for &k in l.class_vertices(v) {
            let before = |x: usize| in_class(x) && x < k;
            let push_path = |r: EdgeRef, steps: &mut Vec<PathStep>| -> (usize, usize) {
                let start = steps.len();
                let drawn = |s: Step, steps: &mut Vec<PathStep>| {
                    let e = l.edges()[s.edge];
                    steps.push(PathStep { class: e.class, forward: s.forward, left: before(e.u), right: before(e.v) });
                };
                match r {
                    EdgeRef::Drawn(e) => drawn(Step { edge: e, forward: true }, steps),
                    EdgeRef::Ghost(gi) => {
                        for &s in &tri.ghosts[gi].path {
                            drawn(s, steps);
                        }
                    }
                }
                (start, steps.len())
            };
            for &(t, pos) in &tri.vertex_triangles[k] {
                let tr = &tri.triangles[t];
                if !face_ok(tr.face) {
                    continue;
                }
                let a = push_path(tr.edges[0], &mut steps);
                let b = push_path(tr.edges[1], &mut steps);
                let negate = (pos % 2 == 1) == tr.ascending;
                terms.push(Term { position: pos as u8, negate, a, b });
            }
        }
        VertexProgram { slots, steps, terms }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Star edge classes moved by the operator.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().map(|s| s.class)
    }

    #[inline]
    fn path(&self, group: &FiniteGroup, c: &[Elem], g: Elem, ginv: Elem, (s, e): (usize, usize)) -> Elem {
        let mut x = group.identity();
        for st in &self.steps[s..e] {
            let mut y = c[st.class];
            if st.left {
                y = group.mul(g, y);
            }
            if st.right {
                y = group.mul(y, ginv);
            }
            if !st.forward {
                y = group.inv(y);
            }
            x = group.mul(x, y);
        }
        x
    }

    /// Writes the image coloring into `out` (which must equal `c` on entry)
    /// and returns the phase exponent in units of `1/alpha.den()`.
    #[inline]
    pub fn apply(&self, alpha: &Cocycle3, g: Elem, c: &[Elem], out: &mut [Elem]) -> u64 {
        let group = alpha.group();
        let ginv = group.inv(g);
        let den = alpha.den() as u64;
        let mut total = 0u64;
        for t in &self.terms {
            let a = self.path(group, c, g, ginv, t.a);
            let b = self.path(group, c, g, ginv, t.b);
            let x = match t.position {
                0 => alpha.exp(g, a, b),
                1 => alpha.exp(group.mul(a, ginv), g, b),
                _ => alpha.exp(a, group.mul(b, ginv), g),
            } as u64;
            total += if t.negate { den - x } else { x };
        }
        for s in &self.slots {
            let mut y = c[s.class];
            if s.left {
                y = group.mul(g, y);
            }
            if s.right {
                y = group.mul(y, ginv);
            }
            out[s.class] = y;
        }
        total % den
    }

    /// Flips the sign of one phase factor. Used to check that the relation
    /// verifier detects a corrupted operator.
    pub fn corrupt_sign(&mut self, term: usize) {
        self.terms[term].negate = !self.terms[term].negate;
    }
}

/// A lattice, its canonical triangulation and a 3-cocycle, with compiled
/// vertex programs and face step lists.
#[derive(Debug, Clone)]
pub struct Model {
    lattice: SurfaceLattice,
    tri: Triangulation,
    alpha: Cocycle3,
    faces: Vec<Vec<(usize, bool)>>,
    programs: Vec<VertexProgram>,
    active: Vec<usize>,
}

impl Model {
    pub fn new(lattice: SurfaceLattice, alpha: Cocycle3) -> Model {
        let tri = triangulate(&lattice);
        let faces = lattice
            .faces()
            .iter()
            .map(|f| f.steps.iter().map(|s| (lattice.edges()[s.edge].class, s.forward)).collect())
            .collect();
        let programs = (0..lattice.num_vertex_classes())
            .map(|v| VertexProgram::compile(&lattice, &tri, v, |_| true, |_| true))
            .collect();
        let mut uses = vec![0usize; lattice.num_edge_classes()];
        for f in lattice.faces() {
            for s in &f.steps {
                uses[lattice.edges()[s.edge].class] += 1;
            }
        }
        let active = (0..lattice.num_vertex_classes())
            .filter(|&v| lattice.mode() == Mode::Closed || lattice.star_classes(v).iter().all(|&c| uses[c] == 2))
            .collect();
        Model { lattice, tri, alpha, faces, programs, active }
    }

    pub fn lattice(&self) -> &SurfaceLattice {
        &self.lattice
    }

    pub fn triangulation(&self) -> &Triangulation {
        &self.tri
    }

    pub fn alpha(&self) -> &Cocycle3 {
        &self.alpha
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        self.alpha.group()
    }

    pub fn num_edges(&self) -> usize {
        self.lattice.num_edge_classes()
    }

    pub fn num_vertices(&self) -> usize {
        self.lattice.num_vertex_classes()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    /// Vertex classes carrying vertex operators: all of them on closed
    /// surfaces; on patches, those whose incident edges are all shared by two
    /// faces.
    pub fn active_vertices(&self) -> &[usize] {
        &self.active
    }

    pub fn program(&self, v: usize) -> &VertexProgram {
        &self.programs[v]
    }

    pub fn program_mut(&mut self, v: usize) -> &mut VertexProgram {
        &mut self.programs[v]
    }

    pub fn check_coloring(&self, c: &[Elem]) -> Result<(), OperatorError> {
        if c.len() != self.num_edges() {
            return Err(OperatorError::WrongLength { expected: self.num_edges(), got: c.len() });
        }
        match c.iter().position(|&x| x as usize >= self.group().order()) {
            Some(i) => Err(OperatorError::BadElement(i)),
            None => Ok(()),
        }
    }

    pub fn phase_from_exp(&self, e: u64) -> Phase {
        Phase::new(e as i64, self.alpha.den())
    }

    /// Counterclockwise boundary holonomy of a face.
    #[inline]
    pub fn face_holonomy(&self, f: usize, c: &[Elem]) -> Elem {
        let group = self.group();
        let mut x = group.identity();
        for &(class, fwd) in &self.faces[f] {
            let y = c[class];
            x = group.mul(x, if fwd { y } else { group.inv(y) });
        }
        x
    }

    #[inline]
    pub fn face_flat(&self, f: usize, c: &[Elem]) -> bool {
        self.face_holonomy(f, c) == self.group().identity()
    }

    pub fn is_flat(&self, c: &[Elem]) -> bool {
        (0..self.faces.len()).all(|f| self.face_flat(f, c))
    }

    pub fn face_steps(&self, f: usize) -> &[(usize, bool)] {
        &self.faces[f]
    }

    /// `A_v^g` through the compiled program.
    pub fn vertex_op_fast(&self, v: usize, g: Elem, c: &[Elem]) -> (Coloring, Phase) {
        let mut out = c.to_vec();
        let e = self.programs[v].apply(&self.alpha, g, c, &mut out);
        (out, self.phase_from_exp(e))
    }

    /// Color of every ghost edge from the boundary path of its face.
    pub fn extend_coloring(&self, c: &[Elem]) -> TriColoring {
        let group = self.group();
        let ghosts = self
            .tri
            .ghosts
            .iter()
            .map(|gh| {
                gh.path.iter().fold(group.identity(), |x, s| {
                    let y = c[self.lattice.edges()[s.edge].class];
                    group.mul(x, if s.forward { y } else { group.inv(y) })
                })
            })
            .collect();
        TriColoring { classes: c.to_vec(), ghosts }
    }

    pub fn restrict_coloring(&self, c: &TriColoring) -> Coloring {
        c.classes.clone()
    }

    pub fn in_image(&self, c: &TriColoring) -> bool {
        self.extend_coloring(&c.classes).ghosts == c.ghosts
    }

    /// `A'_v^g` on the triangulated lattice, where ghost edges carry
    /// independent colors. Drawn corners of the class act one after another in
    /// ascending label order; each contributes the phase of its triangles
    /// evaluated on the colors produced by the corners already processed.
    pub fn vertex_op_tri(&self, v: usize, g: Elem, c: &TriColoring) -> (TriColoring, Phase) {
        let l = &self.lattice;
        let group = self.group();
        let ginv = group.inv(g);
        let in_class = |x: usize| l.vertices()[x].class == v;
        let mut phase = Phase::ONE;
        for &k in l.class_vertices(v) {
            let before = |x: usize| in_class(x) && x < k;
            let current = |r: EdgeRef| -> Elem {
                let (base, tail, head) = match r {
                    EdgeRef::Drawn(e) => {
                        let d = l.edges()[e];
                        (c.classes[d.class], d.u, d.v)
                    }
                    EdgeRef::Ghost(gi) => {
                        let gh = &self.tri.ghosts[gi];
                        (c.ghosts[gi], gh.from, gh.to)
                    }
                };
                let mut y = base;
                if before(tail) {
                    y = group.mul(g, y);
                }
                if before(head) {
                    y = group.mul(y, ginv);
                }
                y
            };
            for &(t, pos) in &self.tri.vertex_triangles[k] {
                let tr = &self.tri.triangles[t];
                let a = current(tr.edges[0]);
                let b = current(tr.edges[1]);
                let zeta = match pos {
                    0 => self.alpha.get(g, a, b),
                    1 => self.alpha.get(group.mul(a, ginv), g, b),
                    _ => self.alpha.get(a, group.mul(b, ginv), g),
                };
                let sign = if pos % 2 == 0 { 1 } else { -1 } * if tr.ascending { 1 } else { -1 };
                phase = phase * zeta.pow(sign);
            }
        }
        let mut out = c.clone();
        for class in l.star_classes(v) {
            let (a, b) = l.edge_class_ends(class);
            let mut y = c.classes[class];
            if a == v {
                y = group.mul(g, y);
            }
            if b == v {
                y = group.mul(y, ginv);
            }
            out.classes[class] = y;
        }
        for (gi, gh) in self.tri.ghosts.iter().enumerate() {
            let mut y = c.ghosts[gi];
            if in_class(gh.from) {
                y = group.mul(g, y);
            }
            if in_class(gh.to) {
                y = group.mul(y, ginv);
            }
            out.ghosts[gi] = y;
        }
        (out, phase)
    }

    /// `A_v^g` as extend, act on the triangulated lattice, restrict.
    /// Returns `None` if the image leaves the image of the extension map.
    pub fn vertex_op(&self, v: usize, g: Elem, c: &[Elem]) -> Option<(Coloring, Phase)> {
        let (out, phase) = self.vertex_op_tri(v, g, &self.extend_coloring(c));
        if self.in_image(&out) {
            Some((self.restrict_coloring(&out), phase))
        } else {
            None
        }
    }

    pub fn apply_vertex_op(&self, v: usize, g: Elem, s: &State) -> State {
        let mut out = State::zero();
        let mut buf = Vec::new();
        for (c, amp) in s.iter() {
            buf.clear();
            buf.extend_from_slice(c);
            let e = self.programs[v].apply(&self.alpha, g, c, &mut buf);
            out.add(buf.clone(), &amp.mul_phase(self.phase_from_exp(e)));
        }
        out
    }

    /// `A_v = (1/|G|) sum_g A_v^g`.
    pub fn apply_vertex_projector(&self, v: usize, s: &State) -> State {
        let n = self.group().order() as i128;
        let mut out = State::zero();
        for g in self.group().elements() {
            out.add_state(&self.apply_vertex_op(v, g, s));
        }
        out.scale(Ratio::new(1, n))
    }

    pub fn apply_face_projector(&self, f: usize, s: &State) -> State {
        let mut out = State::zero();
        for (c, amp) in s.iter() {
            if self.face_flat(f, c) {
                out.add(c.clone(), amp);
            }
        }
        out
    }
}

/// Sparse vector over the coloring basis with exact cyclotomic amplitudes.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct State {
    terms: BTreeMap<Coloring, Cyclo>,
}

impl State {
    pub fn zero() -> State {
        State { terms: BTreeMap::new() }
    }

    pub fn basis(c: Coloring) -> State {
        let mut s = State::zero();
        s.terms.insert(c, Cyclo::one());
        s
    }

    pub fn add(&mut self, c: Coloring, amp: &Cyclo) {
        if amp.is_zero() {
            return;
        }
        match self.terms.get_mut(&c) {
            Some(x) => {
                let y = &*x + amp;
                if y.is_zero() {
                    self.terms.remove(&c);
                } else {
                    *x = y;
                }
            }
            None => {
                self.terms.insert(c, amp.clone());
            }
        }
    }

    pub fn add_state(&mut self, other: &State) {
        for (c, a) in &other.terms {
            self.add(c.clone(), a);
        }
    }

    pub fn scale(&self, q: Ratio<i128>) -> State {
        if q == Ratio::from_integer(0) {
            return State::zero();
        }
        State { terms: self.terms.iter().map(|(c, a)| (c.clone(), a.scale(q))).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Coloring, &Cyclo)> {
        self.terms.iter()
    }

    pub fn get(&self, c: &[Elem]) -> Option<&Cyclo> {
        self.terms.get(c)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &State) -> Cyclo {
        let mut acc = Cyclo::zero();
        for (c, a) in &self.terms {
            if let Some(b) = other.terms.get(c) {
                acc = &acc + &(&a.conj() * b);
            }
        }
        acc
    }
}

/// How many colorings [`verify_relations`] inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Violation {
    pub relation: String,
    pub coloring: Vec<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationReport {
    pub colorings_checked: u64,
    pub flat_colorings_checked: u64,
    pub exhaustive: bool,
    pub seed: Option<u64>,
    pub normalization: bool,
    pub group_law: bool,
    pub group_law_off_flat: bool,
    pub vertex_commutation: bool,
    pub vertex_face_commutation: bool,
    pub face_commutation: bool,
    pub vertex_idempotence: bool,
    pub face_idempotence: bool,
    pub passed: bool,
    pub first_violation: Option<Violation>,
}

/// Multiset of roots of unity `sum_k n_k zeta_den^k`, kept unreduced.
fn root_sum(den: usize) -> Vec<i64> {
    vec![0; den]
}

/// Exact equality of `sum_k a_k z^k` and `sum_k b_k z^k` in `Q(zeta_den)`.
fn root_sums_equal(den: usize, a: &[i64], b: &[i64]) -> bool {
    if a == b {
        return true;
    }
    let to_cyclo = |v: &[i64]| {
        let mut acc = Cyclo::zero();
        for (k, &n) in v.iter().enumerate() {
            if n != 0 {
                acc = &acc + &Cyclo::from_phase(Phase::new(k as i64, den as i64), Ratio::from_integer(n as i128));
            }
        }
        acc
    };
    to_cyclo(a) == to_cyclo(b)
}

fn coloring_from_index(mut idx: u64, n: u64, len: usize, out: &mut [Elem]) {
    for x in out.iter_mut().take(len) {
        *x = (idx % n) as Elem;
        idx /= n;
    }
}

/// Checks the operator relations on every coloring (or on a seeded sample):
/// normalization `A_v^e = 1`, the group law `A_v^g A_v^h = A_v^{gh}` with
/// exact phases, `A_v A_u = A_u A_v`, `A_v B_f = B_f A_v`, `B_f B_h = B_h B_f`
/// and idempotence of `A_v` and `B_f`.
///
/// The group law and the projector relations are required on flat
/// colorings; `group_law_off_flat` records whether the group law also holds
/// on the first `OFF_FLAT_BUDGET` non-flat colorings visited, which is
/// informational.
pub const OFF_FLAT_BUDGET: u64 = 20_000;

pub fn verify_relations(model: &Model, coverage: Coverage) -> RelationReport {
    let group = model.group().clone();
    let n = group.order();
    let m = model.num_edges();
    let nv = model.num_vertices();
    let active = model.active_vertices().to_vec();
    let den = model.alpha().den() as u64;
    let total = (n as u64).checked_pow(m as u32);
    let (count, exhaustive, seed) = match (coverage, total) {
        (Coverage::Exhaustive, Some(t)) => (t, true, None),
        (Coverage::Sampled { samples, seed }, _) => (samples as u64, false, Some(seed)),
        (Coverage::Exhaustive, None) => (1_000_000, false, Some(0)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
    let mut report = RelationReport {
        colorings_checked: 0,
        flat_colorings_checked: 0,
        exhaustive,
        seed,
        normalization: true,
        group_law: true,
        group_law_off_flat: true,
        vertex_commutation: true,
        vertex_face_commutation: true,
        face_commutation: true,
        vertex_idempotence: true,
        face_idempotence: true,
        passed: true,
        first_violation: None,
    };
    let fail = |report: &mut RelationReport, relation: &str, c: &[Elem], detail: String| {
        if report.first_violation.is_none() {
            report.first_violation =
                Some(Violation { relation: relation.to_string(), coloring: c.iter().map(|&x| x as usize).collect(), detail });
        }
    };

    let mut c = vec![0 as Elem; m];
    // images[v][g] = (coloring, exponent)
    let mut images: Vec<Vec<(Coloring, u64)>> = vec![vec![(Vec::new(), 0); n]; nv];
    let mut buf = vec![0 as Elem; m];
    let mut acc_a: BTreeMap<Coloring, Vec<i64>> = BTreeMap::new();
    let mut acc_aa: BTreeMap<Coloring, Vec<i64>> = BTreeMap::new();
    let mut off_flat_seen = 0u64;
    for it in 0..count {
        if exhaustive {
            coloring_from_index(it, n as u64, m, &mut c);
        } else {
            for x in c.iter_mut() {
                *x = rng.gen_range(0..n) as Elem;
            }
        }
        report.colorings_checked += 1;
        let flat = model.is_flat(&c);
        if flat {
            report.flat_colorings_checked += 1;
        }
        let face_flags: Vec<bool> = (0..model.num_faces()).map(|f| model.face_flat(f, &c)).collect();
        let group_law_here = flat || off_flat_seen < OFF_FLAT_BUDGET;
        if !flat {
            off_flat_seen += 1;
        }
        for &v in model.active_vertices() {
            let prog = model.program(v);
            for g in group.elements() {
                let slot = &mut images[v][g as usize];
                slot.0.clear();
                slot.0.extend_from_slice(&c);
                slot.1 = prog.apply(model.alpha(), g, &c, &mut slot.0);
            }
            let (e_img, e_exp) = &images[v][group.identity() as usize];
            if (e_img != &c || *e_exp != 0) && report.normalization {
                report.normalization = false;
                fail(&mut report, "normalization", &c, format!("A^e at vertex {v} is not the identity"));
            }
            // vertex-face commutation: A_v^g preserves every face flag
            for g in group.elements() {
                let img = &images[v][g as usize].0;
                for (f, &ff) in face_flags.iter().enumerate() {
                    if model.face_flat(f, img) != ff && report.vertex_face_commutation {
                        report.vertex_face_commutation = false;
                        fail(&mut report, "vertex-face commutation", &c, format!("A_{v}^{g} changes the flatness of face {f}"));
                    }
                }
            }
            // group law and idempotence
            if !group_law_here {
                continue;
            }
            acc_a.clear();
            acc_aa.clear();
            for h in group.elements() {
                let (img_h, exp_h) = &images[v][h as usize];
                let exp_h = *exp_h;
                if flat {
                    acc_a.entry(img_h.clone()).or_insert_with(|| root_sum(den as usize))[exp_h as usize] += 1;
                }
                for g in group.elements() {
                    buf.copy_from_slice(img_h);
                    let exp_g = prog.apply(model.alpha(), g, img_h, &mut buf);
                    let (want_img, want_exp) = &images[v][group.mul(g, h) as usize];
                    let got_exp = (exp_g + exp_h) % den;
                    if &buf != want_img || got_exp != *want_exp {
                        if flat && report.group_law {
                            report.group_law = false;
                            fail(&mut report, "group law", &c, format!("A_{v}^{g} A_{v}^{h} != A_{v}^{{gh}}"));
                        }
                        report.group_law_off_flat = false;
                    }
                    if flat {
                        acc_aa.entry(buf.clone()).or_insert_with(|| root_sum(den as usize))[got_exp as usize] += 1;
                    }
                }
            }
            // A_v^2 c = (1/n^2) acc_aa, A_v c = (1/n) acc_a; compare n * acc_a with acc_aa
            if flat {
                let same_keys = acc_a.len() == acc_aa.len() && acc_a.keys().zip(acc_aa.keys()).all(|(a, b)| a == b);
                let ok = same_keys
                    && acc_a.iter().all(|(k, va)| {
                        let scaled: Vec<i64> = va.iter().map(|x| x * n as i64).collect();
                        root_sums_equal(den as usize, &scaled, &acc_aa[k])
                    });
                if !ok && report.vertex_idempotence {
                    report.vertex_idempotence = false;
                    fail(&mut report, "vertex idempotence", &c, format!("A_{v}^2 != A_{v}"));
                }
            }
        }
        // distinct vertices: A_u A_v c == A_v A_u c, exactly
        if flat && active.len() > 1 {
            for (i, &v) in active.iter().enumerate() {
                for &u in &active[i + 1..] {
                    if !projectors_commute(model, u, v, &c, &images, den) && report.vertex_commutation {
                        report.vertex_commutation = false;
                        fail(&mut report, "vertex commutation", &c, format!("A_{u} A_{v} != A_{v} A_{u}"));
                    }
                }
            }
        }
        // face projectors are diagonal 0/1 multipliers; commutation and
        // idempotence reduce to the flags being well defined
        for (f, &ff) in face_flags.iter().enumerate() {
            if model.face_flat(f, &c) != ff {
                report.face_commutation = false;
                report.face_idempotence = false;
            }
        }
    }
    report.passed = report.normalization
        && report.group_law
        && report.vertex_commutation
        && report.vertex_face_commutation
        && report.face_commutation
        && report.vertex_idempotence
        && report.face_idempotence;
    report
}

fn projectors_commute(model: &Model, u: usize, v: usize, c: &[Elem], images: &[Vec<(Coloring, u64)>], den: u64) -> bool {
    let group = model.group();
    let mut uv: BTreeMap<Coloring, Vec<i64>> = BTreeMap::new();
    let mut vu: BTreeMap<Coloring, Vec<i64>> = BTreeMap::new();
    let mut buf = c.to_vec();
    for (first, second, acc) in [(u, v, &mut vu), (v, u, &mut uv)] {
        for g in group.elements() {
            let (img, e1) = &images[first][g as usize];
            for h in group.elements() {
                buf.copy_from_slice(img);
                let e2 = model.program(second).apply(model.alpha(), h, img, &mut buf);
                acc.entry(buf.clone()).or_insert_with(|| root_sum(den as usize))[((e1 + e2) % den) as usize] += 1;
            }
        }
    }
    uv.len() == vu.len()
        && uv.iter().zip(vu.iter()).all(|((ka, va), (kb, vb))| ka == kb && root_sums_equal(den as usize, va, vb))
}

/// Dense exact projector `prod_v A_v prod_f B_f` on all colorings.
#[derive(Debug, Clone)]
pub struct DenseProjector {
    pub dim: usize,
    /// column-major sparse columns: `cols[j]` lists `(row, entry)`
    pub cols: Vec<Vec<(usize, Cyclo)>>,
}

impl Model {
    /// Materializes the ground projector column by column. Fails when
    /// `|G|^|E|` exceeds `cap`.
    pub fn materialize_projector(&self, cap: u128) -> Result<DenseProjector, OperatorError> {
        let n = self.group().order() as u128;
        let m = self.num_edges() as u32;
        let dim = n.checked_pow(m).unwrap_or(u128::MAX);
        if dim > cap {
            return Err(OperatorError::RegionTooLargeToMaterialize { dim, cap });
        }
        let dim = dim as usize;
        let mut cols = Vec::with_capacity(dim);
        let mut c = vec![0 as Elem; self.num_edges()];
        for j in 0..dim {
            coloring_from_index(j as u64, n as u64, self.num_edges(), &mut c);
            let mut s = State::basis(c.clone());
            for f in 0..self.num_faces() {
                s = self.apply_face_projector(f, &s);
            }
            for &v in self.active_vertices() {
                s = self.apply_vertex_projector(v, &s);
            }
            let col = s.iter().map(|(k, a)| (coloring_index(k, n as u64), a.clone())).collect();
            cols.push(col);
        }
        Ok(DenseProjector { dim, cols })
    }
}

/// Mixed-radix index of a coloring, first edge least significant.
pub fn coloring_index(c: &[Elem], n: u64) -> usize {
    c.iter().rev().fold(0u64, |acc, &x| acc * n + x as u64) as usize
}

impl DenseProjector {
    pub fn entry(&self, i: usize, j: usize) -> Cyclo {
        self.cols[j].iter().find(|(r, _)| *r == i).map(|(_, a)| a.clone()).unwrap_or_else(Cyclo::zero)
    }

    /// `P^2 == P` exactly.
    pub fn is_idempotent(&self) -> bool {
        (0..self.dim).all(|j| {
            let mut acc: BTreeMap<usize, Cyclo> = BTreeMap::new();
            for (k, a) in &self.cols[j] {
                for (i, b) in &self.cols[*k] {
                    let e = acc.entry(*i).or_insert_with(Cyclo::zero);
                    *e = &*e + &(b * a);
                }
            }
            let lhs: Vec<(usize, Cyclo)> = acc.into_iter().filter(|(_, a)| !a.is_zero()).collect();
            let mut rhs = self.cols[j].clone();
            rhs.sort_by_key(|(i, _)| *i);
            lhs == rhs
        })
    }

    /// `P^dagger == P` exactly.
    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|j| self.cols[j].iter().all(|(i, a)| self.entry(j, *i) == a.conj()))
    }

    /// Exact trace, which equals the rank for an orthogonal projector.
    pub fn trace(&self) -> Cyclo {
        let mut t = Cyclo::zero();
        for j in 0..self.dim {
            t = &t + &self.entry(j, j);
        }
        t
    }
}
