//! Flat colorings, vertex-move orbits with exact phase labels, regularity and
//! the ground space.

use std::collections::{HashMap, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cohomology::{beta, Cocycle3};
use crate::group::{Elem, Subgroup};
use crate::operators::{Coloring, Model, OperatorError, State};
use crate::phase::{Cyclo, Phase};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundStateError {
    #[error("invalid scope: {0}")]
    BadScope(String),
    #[error("coloring is not flat")]
    NotFlat,
    #[error("vertex operator A_{vertex}^{g} maps a flat coloring outside the flat set")]
    LeftFlatSet { vertex: usize, g: usize },
    #[error("ground-state dimensions differ: {0} vs {1}")]
    Mismatch(usize, usize),
    #[error("basis vector {vector} is not fixed by {operator}")]
    NotInvariant { vector: usize, operator: String },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// The part of a lattice a ground space lives on: edge classes that vary
/// (the rest stay at the identity), faces whose flatness is imposed and
/// vertices whose projectors are applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    edges: Vec<usize>,
    faces: Vec<usize>,
    vertices: Vec<usize>,
}

impl Scope {
    /// Whole lattice with its active vertices.
    pub fn full(model: &Model) -> Scope {
        Scope {
            edges: (0..model.num_edges()).collect(),
            faces: (0..model.num_faces()).collect(),
            vertices: model.active_vertices().to_vec(),
        }
    }

    /// Every vertex must have its star inside `edges` and every face must
    /// have its boundary inside `edges`.
    pub fn new(model: &Model, mut edges: Vec<usize>, mut faces: Vec<usize>, mut vertices: Vec<usize>) -> Result<Scope, GroundStateError> {
        edges.sort_unstable();
        edges.dedup();
        faces.sort_unstable();
        faces.dedup();
        vertices.sort_unstable();
        vertices.dedup();
        let l = model.lattice();
        if edges.iter().any(|&e| e >= model.num_edges()) {
            return Err(GroundStateError::BadScope("unknown edge class".into()));
        }
        let inside = |c: &usize| edges.binary_search(c).is_ok();
        for &f in &faces {
            if f >= model.num_faces() || !l.face_edge_classes(f).iter().all(inside) {
                return Err(GroundStateError::BadScope(format!("face {f} leaves the scope")));
            }
        }
        for &v in &vertices {
            if v >= model.num_vertices() || !l.star_classes(v).iter().all(inside) {
                return Err(GroundStateError::BadScope(format!("star of vertex {v} leaves the scope")));
            }
        }
        Ok(Scope { edges, faces, vertices })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn faces(&self) -> &[usize] {
        &self.faces
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }
}

/// Flat colorings sorted lexicographically. Only the scope's edge classes
/// are stored; every other edge carries the identity.
#[derive(Debug, Clone)]
pub struct FlatColoringSet {
    edges: Vec<usize>,
    full_width: usize,
    identity: Elem,
    count: usize,
    data: Vec<Elem>,
    index: HashMap<Box<[Elem]>, u32>,
}

impl FlatColoringSet {
    pub fn full_width(&self) -> usize {
        self.full_width
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The scope entries of coloring `i`.
    pub fn compact(&self, i: usize) -> &[Elem] {
        let w = self.edges.len();
        &self.data[i * w..(i + 1) * w]
    }

    pub fn get(&self, i: usize) -> Coloring {
        let mut c = vec![self.identity; self.full_width];
        self.fill(i, &mut c);
        c
    }

    /// Writes the scope entries of coloring `i` into `buf`.
    pub fn fill(&self, i: usize, buf: &mut [Elem]) {
        for (&e, &x) in self.edges.iter().zip(self.compact(i)) {
            buf[e] = x;
        }
    }

    pub fn position(&self, c: &[Elem]) -> Option<usize> {
        let mut key = Vec::with_capacity(self.edges.len());
        let mut k = 0;
        for (e, &x) in c.iter().enumerate() {
            if k < self.edges.len() && self.edges[k] == e {
                key.push(x);
                k += 1;
            } else if x != self.identity {
                return None;
            }
        }
        self.index.get(key.as_slice()).map(|&i| i as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = Coloring> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }
}

/// Backtracking over the scope's edge classes, ordered so faces close early.
/// When an edge completes a face in which it occurs once, its color is solved
/// for instead of enumerated.
pub fn enumerate_flat(model: &Model, scope: &Scope) -> FlatColoringSet {
    let group = model.group();
    let m = model.num_edges();
    let n = group.order();
    let e = group.identity();

    let mut assigned = vec![true; m];
    for &c in scope.edges() {
        assigned[c] = false;
    }
    let mut order: Vec<usize> = Vec::new();
    let mut done = vec![false; scope.faces().len()];
    loop {
        let pick = scope
            .faces()
            .iter()
            .enumerate()
            .filter(|(i, _)| !done[*i])
            .map(|(i, &f)| (model.face_steps(f).iter().filter(|(c, _)| !assigned[*c]).count(), i))
            .min();
        match pick {
            Some((_, i)) => {
                done[i] = true;
                for &(c, _) in model.face_steps(scope.faces()[i]) {
                    if !assigned[c] {
                        assigned[c] = true;
                        order.push(c);
                    }
                }
            }
            None => break,
        }
    }
    for &c in scope.edges() {
        if !assigned[c] {
            assigned[c] = true;
            order.push(c);
        }
    }
    let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &c)| (c, p)).collect();
    // faces checked at each position; the first one with a single occurrence forces the edge
    let mut checks: Vec<Vec<usize>> = vec![Vec::new(); order.len()];
    let mut forced: Vec<Option<usize>> = vec![None; order.len()];
    for &f in scope.faces() {
        let last = model.face_steps(f).iter().filter_map(|(c, _)| pos.get(c).copied()).max();
        if let Some(p) = last {
            let occurrences = model.face_steps(f).iter().filter(|(c, _)| *c == order[p]).count();
            if occurrences == 1 && forced[p].is_none() {
                forced[p] = Some(f);
            } else {
                checks[p].push(f);
            }
        }
    }

    let mut c: Coloring = vec![e; m];
    let mut found: Vec<Elem> = Vec::new();
    let mut count = 0usize;
    // iterative depth-first search; next[p] is the next candidate at depth p
    let depth_max = order.len();
    if depth_max == 0 {
        if scope.faces().iter().all(|&f| model.face_flat(f, &c)) {
            found.extend(scope.edges().iter().map(|&k| c[k]));
            count = 1;
        }
    } else {
        let mut next: Vec<usize> = vec![0; depth_max];
        let mut p = 0usize;
        loop {
            let edge = order[p];
            let candidate = match forced[p] {
                Some(f) => {
                    if next[p] > 0 {
                        None
                    } else {
                        next[p] = n;
                        Some(solve_forced(model, f, edge, &c))
                    }
                }
                None => {
                    if next[p] < n {
                        next[p] += 1;
                        Some((next[p] - 1) as Elem)
                    } else {
                        None
                    }
                }
            };
            match candidate {
                None => {
                    c[edge] = e;
                    next[p] = 0;
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                }
                Some(x) => {
                    c[edge] = x;
                    if checks[p].iter().all(|&f| model.face_flat(f, &c)) {
                        if p + 1 == depth_max {
                            found.extend(scope.edges().iter().map(|&k| c[k]));
                            count += 1;
                        } else {
                            p += 1;
                        }
                    }
                }
            }
        }
    }
    FlatColoringSet::build(scope.edges().to_vec(), m, e, count, &found)
}

fn solve_forced(model: &Model, f: usize, edge: usize, c: &[Elem]) -> Elem {
    let group = model.group();
    let steps = model.face_steps(f);
    let k = steps.iter().position(|(cl, _)| *cl == edge).unwrap_or(0);
    let prod = |s: &[(usize, bool)]| {
        s.iter().fold(group.identity(), |x, &(cl, fwd)| group.mul(x, if fwd { c[cl] } else { group.inv(c[cl]) }))
    };
    let a = prod(&steps[..k]);
    let b = prod(&steps[k + 1..]);
    // a y b = e
    let y = group.mul(group.inv(a), group.inv(b));
    if steps[k].1 {
        y
    } else {
        group.inv(y)
    }
}

impl FlatColoringSet {
    fn build(edges: Vec<usize>, full_width: usize, identity: Elem, count: usize, compact: &[Elem]) -> FlatColoringSet {
        let w = edges.len();
        let mut idx: Vec<usize> = (0..count).collect();
        idx.sort_unstable_by(|&a, &b| compact[a * w..(a + 1) * w].cmp(&compact[b * w..(b + 1) * w]));
        let mut data = Vec::with_capacity(compact.len());
        for &i in &idx {
            data.extend_from_slice(&compact[i * w..(i + 1) * w]);
        }
        let index = (0..count).map(|i| (data[i * w..(i + 1) * w].to_vec().into_boxed_slice(), i as u32)).collect();
        FlatColoringSet { edges, full_width, identity, count, data, index }
    }
}

/// One orbit of flat colorings under single-vertex moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitRecord {
    /// index of the lexicographically smallest member
    pub representative: usize,
    /// members with the exponent (units of `1/den`) of their phase label
    pub elements: Vec<(usize, u64)>,
    pub regular: bool,
    /// a move whose phase disagrees with the labels, when not regular
    pub witness: Option<PhaseWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseWitness {
    pub coloring: Vec<usize>,
    pub vertex: usize,
    pub g: usize,
    /// ratio of the phase reached by the move to the recorded label
    pub phase: Phase,
}

#[derive(Debug, Clone)]
pub struct OrbitDecomposition {
    pub flats: FlatColoringSet,
    pub orbits: Vec<OrbitRecord>,
    /// orbit of each flat coloring
    pub orbit_of: Vec<u32>,
    /// phase label exponent of each flat coloring
    pub label: Vec<u64>,
    pub den: u64,
}

impl OrbitDecomposition {
    pub fn regular_count(&self) -> usize {
        self.orbits.iter().filter(|o| o.regular).count()
    }

    pub fn phase(&self, flat: usize) -> Phase {
        Phase::new(self.label[flat] as i64, self.den as i64)
    }
}

/// Partitions the scope's flat colorings into orbits of the vertex moves
/// `A_v^g` (v in the scope) and labels each member with the phase of the
/// first path reaching it. A revisit with a different phase proves the orbit
/// is not regular.
pub fn decompose(model: &Model, scope: &Scope) -> Result<OrbitDecomposition, GroundStateError> {
    let flats = enumerate_flat(model, scope);
    let group = model.group();
    let den = model.alpha().den() as u64;
    let nflat = flats.len();
    let mut orbit_of = vec![u32::MAX; nflat];
    let mut label = vec![0u64; nflat];
    let mut orbits = Vec::new();
    let mut buf: Coloring = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..nflat {
        if orbit_of[start] != u32::MAX {
            continue;
        }
        let id = orbits.len() as u32;
        orbit_of[start] = id;
        label[start] = 0;
        queue.push_back(start);
        let mut elements = Vec::new();
        let mut witness = None;
        while let Some(i) = queue.pop_front() {
            elements.push((i, label[i]));
            let c = flats.get(i);
            for &v in scope.vertices() {
                let prog = model.program(v);
                for g in group.elements() {
                    buf.clear();
                    buf.extend_from_slice(&c);
                    let ex = prog.apply(model.alpha(), g, &c, &mut buf);
                    let j = flats.position(&buf).ok_or(GroundStateError::LeftFlatSet { vertex: v, g: g as usize })?;
                    let want = (label[i] + ex) % den;
                    if orbit_of[j] == u32::MAX {
                        orbit_of[j] = id;
                        label[j] = want;
                        queue.push_back(j);
                    } else if label[j] != want && witness.is_none() {
                        witness = Some(PhaseWitness {
                            coloring: c.iter().map(|&x| x as usize).collect(),
                            vertex: v,
                            g: g as usize,
                            phase: Phase::new(want as i64 - label[j] as i64, den as i64),
                        });
                    }
                }
            }
        }
        elements.sort_unstable();
        orbits.push(OrbitRecord { representative: start, elements, regular: witness.is_none(), witness });
    }
    Ok(OrbitDecomposition { flats, orbits, orbit_of, label, den })
}

/// Orbit of a single flat coloring on the whole lattice, with colorings
/// spelled out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub representative: Coloring,
    pub elements: Vec<(Coloring, Phase)>,
    pub regular: bool,
}

pub fn orbit_bfs(model: &Model, c: &[Elem]) -> Result<Orbit, GroundStateError> {
    model.check_coloring(c)?;
    if !model.is_flat(c) {
        return Err(GroundStateError::NotFlat);
    }
    let group = model.group();
    let den = model.alpha().den() as u64;
    let mut seen: HashMap<Coloring, u64> = HashMap::new();
    let mut order = vec![c.to_vec()];
    seen.insert(c.to_vec(), 0);
    let mut regular = true;
    let mut head = 0;
    while head < order.len() {
        let x = order[head].clone();
        head += 1;
        let lx = seen[&x];
        for &v in model.active_vertices() {
            for g in group.elements() {
                let mut y = x.clone();
                let ex = model.program(v).apply(model.alpha(), g, &x, &mut y);
                let want = (lx + ex) % den;
                match seen.get(&y) {
                    Some(&ly) => regular &= ly == want,
                    None => {
                        seen.insert(y.clone(), want);
                        order.push(y);
                    }
                }
            }
        }
    }
    // relabel relative to the smallest member
    let rep = order.iter().min().cloned().unwrap_or_default();
    let shift = seen[&rep];
    let mut elements: Vec<(Coloring, Phase)> = seen
        .into_iter()
        .map(|(k, l)| (k, Phase::new(l as i64 - shift as i64, den as i64)))
        .collect();
    elements.sort();
    Ok(Orbit { representative: rep, elements, regular })
}

/// Stabilizer of a flat coloring: for each connected component of the vertex
/// graph, the admissible values at its base vertex, where an element
/// `(g_v)` fixes the coloring iff `g_u [uv] g_v^-1 = [uv]` on every edge.
/// Inactive vertices are pinned to the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentStabilizer {
    pub base: usize,
    pub vertices: Vec<usize>,
    pub subgroup: Subgroup,
}

pub fn stabilizer(model: &Model, c: &[Elem]) -> Result<Vec<ComponentStabilizer>, GroundStateError> {
    model.check_coloring(c)?;
    let l = model.lattice();
    let group = model.group();
    let nv = model.num_vertices();
    let active: Vec<bool> = (0..nv).map(|v| model.active_vertices().contains(&v)).collect();
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); nv];
    for class in 0..model.num_edges() {
        let (a, b) = l.edge_class_ends(class);
        adj[a].push((b, class, true));
        adj[b].push((a, class, false));
    }
    let mut comp = vec![usize::MAX; nv];
    let mut out = Vec::new();
    for s in 0..nv {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut members = vec![s];
        comp[s] = out.len();
        let mut k = 0;
        while k < members.len() {
            let u = members[k];
            k += 1;
            for &(w, _, _) in &adj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = out.len();
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        let base = members.iter().copied().find(|&v| !active[v]).unwrap_or(members[0]);
        let candidates: Vec<Elem> = if active[base] { group.elements().collect() } else { vec![group.identity()] };
        let ok: Vec<Elem> = candidates.into_iter().filter(|&h| transport(model, &adj, &members, base, h, c, &active).is_some()).collect();
        out.push(ComponentStabilizer { base, vertices: members, subgroup: Subgroup::generated(group, &ok) });
    }
    Ok(out)
}

/// Propagates `g_base = h` along edges; `None` if some edge is not fixed.
fn transport(
    model: &Model,
    adj: &[Vec<(usize, usize, bool)>],
    members: &[usize],
    base: usize,
    h: Elem,
    c: &[Elem],
    active: &[bool],
) -> Option<HashMap<usize, Elem>> {
    let group = model.group();
    let mut gv: HashMap<usize, Elem> = HashMap::new();
    gv.insert(base, h);
    let mut stack = vec![base];
    while let Some(u) = stack.pop() {
        let gu = gv[&u];
        for &(w, class, outgoing) in &adj[u] {
            let x = c[class];
            // outgoing: g_u x g_w^-1 = x, so g_w = x^-1 g_u x; incoming: g_w x g_u^-1 = x
            let want = if outgoing { group.conj(x, gu) } else { group.mul(group.mul(x, gu), group.inv(x)) };
            match gv.get(&w) {
                Some(&gw) if gw != want => return None,
                Some(_) => {}
                None => {
                    if !active[w] && want != group.identity() {
                        return None;
                    }
                    gv.insert(w, want);
                    stack.push(w);
                }
            }
        }
    }
    debug_assert!(members.iter().all(|v| gv.contains_key(v)));
    Some(gv)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Regularity {
    pub regular: bool,
    pub stabilizer_size: usize,
    /// a stabilizer element (value per vertex class) with its nontrivial phase
    pub witness: Option<(Vec<Elem>, Phase)>,
}

/// Applies every stabilizer element as a product of vertex operators and
/// requires the phase to be exactly one.
pub fn is_regular(model: &Model, c: &[Elem]) -> Result<Regularity, GroundStateError> {
    if !model.is_flat(c) {
        return Err(GroundStateError::NotFlat);
    }
    let l = model.lattice();
    let comps = stabilizer(model, c)?;
    let nv = model.num_vertices();
    let active: Vec<bool> = (0..nv).map(|v| model.active_vertices().contains(&v)).collect();
    let mut adj: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); nv];
    for class in 0..model.num_edges() {
        let (a, b) = l.edge_class_ends(class);
        adj[a].push((b, class, true));
        adj[b].push((a, class, false));
    }
    // per component, the vertex assignment of each admissible base value
    let per_comp: Vec<Vec<HashMap<usize, Elem>>> = comps
        .iter()
        .map(|cs| {
            cs.subgroup
                .members()
                .iter()
                .filter_map(|&h| transport(model, &adj, &cs.vertices, cs.base, h, c, &active))
                .collect()
        })
        .collect();
    let total: usize = per_comp.iter().map(|v| v.len()).product();
    let den = model.alpha().den() as u64;
    let mut choice = vec![0usize; per_comp.len()];
    for _ in 0..total {
        let mut gs = vec![model.group().identity(); nv];
        for (k, &ch) in choice.iter().enumerate() {
            for (&v, &g) in &per_comp[k][ch] {
                gs[v] = g;
            }
        }
        let mut cur = c.to_vec();
        let mut ex = 0u64;
        for &v in model.active_vertices() {
            let mut next = cur.clone();
            ex += model.program(v).apply(model.alpha(), gs[v], &cur, &mut next);
            cur = next;
        }
        debug_assert_eq!(cur, c, "stabilizer element moved the coloring");
        if ex % den != 0 {
            return Ok(Regularity {
                regular: false,
                stabilizer_size: total,
                witness: Some((gs, Phase::new((ex % den) as i64, den as i64))),
            });
        }
        for k in 0..choice.len() {
            choice[k] += 1;
            if choice[k] < per_comp[k].len() {
                break;
            }
            choice[k] = 0;
        }
    }
    Ok(Regularity { regular: true, stabilizer_size: total, witness: None })
}

/// `prod_i beta_x(g_i, g_{i+1} ... g_2n) / beta_x(g_i, g_{i-1} ... g_1)` for
/// the side colors of a one-vertex genus-n polygon.
pub fn genus_closed_form(alpha: &Cocycle3, sides: &[Elem], x: Elem) -> Phase {
    let group = alpha.group();
    let e = group.identity();
    let mut total = Phase::ONE;
    for i in 0..sides.len() {
        let after = sides[i + 1..].iter().fold(e, |a, &b| group.mul(a, b));
        let before = sides[..i].iter().rev().fold(e, |a, &b| group.mul(a, b));
        total = total * beta(alpha, x, sides[i], after) * beta(alpha, x, sides[i], before).inv();
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionCounts {
    pub dimension: usize,
    pub orbit_count: usize,
    pub regular_count: usize,
    pub flat_count: usize,
}

pub fn ground_state_dimension(model: &Model) -> Result<DimensionCounts, GroundStateError> {
    let d = decompose(model, &Scope::full(model))?;
    Ok(DimensionCounts {
        dimension: d.regular_count(),
        orbit_count: d.orbits.len(),
        regular_count: d.regular_count(),
        flat_count: d.flats.len(),
    })
}

#[derive(Debug, Clone)]
pub struct GroundStateBasis {
    pub vectors: Vec<State>,
    pub orbits: Vec<Orbit>,
}

/// One vector per regular orbit: the sum of its members weighted by their
/// phase labels (unnormalized).
pub fn ground_state_basis(model: &Model) -> Result<GroundStateBasis, GroundStateError> {
    let d = decompose(model, &Scope::full(model))?;
    let mut vectors = Vec::new();
    let mut orbits = Vec::new();
    for o in d.orbits.iter().filter(|o| o.regular) {
        let mut s = State::zero();
        let mut elements = Vec::new();
        for &(i, _) in &o.elements {
            let p = d.phase(i);
            s.add(d.flats.get(i), &Cyclo::from_phase(p, num_rational::Ratio::from_integer(1)));
            elements.push((d.flats.get(i), p));
        }
        vectors.push(s);
        orbits.push(Orbit { representative: d.flats.get(o.representative), elements, regular: true });
    }
    Ok(GroundStateBasis { vectors, orbits })
}

/// Every vector must be fixed exactly by every active `A_v` and every `B_f`.
pub fn verify_ground_state(model: &Model, basis: &GroundStateBasis) -> Result<(), GroundStateError> {
    for (i, u) in basis.vectors.iter().enumerate() {
        for f in 0..model.num_faces() {
            if &model.apply_face_projector(f, u) != u {
                return Err(GroundStateError::NotInvariant { vector: i, operator: format!("B_{f}") });
            }
        }
        for &v in model.active_vertices() {
            if &model.apply_vertex_projector(v, u) != u {
                return Err(GroundStateError::NotInvariant { vector: i, operator: format!("A_{v}") });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvarianceReport {
    pub dimension_1: usize,
    pub dimension_2: usize,
}

pub fn topological_invariance_check(m1: &Model, m2: &Model) -> Result<InvarianceReport, GroundStateError> {
    let d1 = ground_state_dimension(m1)?.dimension;
    let d2 = ground_state_dimension(m2)?.dimension;
    if d1 != d2 {
        return Err(GroundStateError::Mismatch(d1, d2));
    }
    Ok(InvarianceReport { dimension_1: d1, dimension_2: d2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleReport {
    pub hilbert_dimension: usize,
    pub idempotent: bool,
    pub hermitian: bool,
    /// exact trace when it is an integer
    pub trace: Option<i64>,
    /// numerical rank from singular values (small instances only)
    pub numeric_rank: Option<usize>,
}

/// Materializes `prod_v A_v prod_f B_f` exactly, checks `P^2 = P` and
/// `P^dagger = P`, and reads the rank off the trace.
pub fn projector_oracle(model: &Model, cap: u128, svd_limit: usize) -> Result<OracleReport, GroundStateError> {
    let p = model.materialize_projector(cap)?;
    let idempotent = p.is_idempotent();
    let hermitian = p.is_hermitian();
    let t = p.trace();
    let trace = (0..=p.dim as i64).find(|&k| t == Cyclo::rational(num_rational::Ratio::from_integer(k as i128)));
    let numeric_rank = if p.dim <= svd_limit {
        let mut m = DMatrix::<Complex64>::zeros(p.dim, p.dim);
        for (j, col) in p.cols.iter().enumerate() {
            for (i, a) in col {
                m[(*i, j)] = a.to_complex();
            }
        }
        let sv = m.singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        Some(sv.iter().filter(|&&s| top > 0.0 && s > 1e-8 * top).count())
    } else {
        None
    };
    Ok(OracleReport { hilbert_dimension: p.dim, idempotent, hermitian, trace, numeric_rank })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisTerm {
    pub coloring: Vec<usize>,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub orbit_representative: Vec<usize>,
    pub terms: Vec<BasisTerm>,
}

pub fn export_basis(basis: &GroundStateBasis) -> Vec<BasisEntry> {
    let widen = |c: &[Elem]| c.iter().map(|&x| x as usize).collect::<Vec<_>>();
    basis
        .orbits
        .iter()
        .map(|o| BasisEntry {
            orbit_representative: widen(&o.representative),
            terms: o.elements.iter().map(|(c, p)| BasisTerm { coloring: widen(c), phase: *p }).collect(),
        })
        .collect()
}
