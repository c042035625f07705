//! Surface lattices as labelled fundamental-domain complexes.
//!
//! Drawn vertices carry a label (a total order) and an identification class.
//! Drawn edges always point from the smaller label to the larger one and carry
//! an edge class; a coloring assigns one group element per edge class. Faces
//! are counterclockwise cycles of signed drawn-edge references.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("malformed lattice: {0}")]
    Malformed(String),
    #[error("orientation error: {0}")]
    OrientationError(String),
    #[error("inconsistent identification of edge class {0}: {1}")]
    InconsistentIdentification(usize, String),
    #[error("edge class {0} is used by {1} face steps in a closed surface")]
    OpenSurfaceEdge(usize, usize),
    #[error("face {0} is not a simple cycle: {1}")]
    NonCycleFace(usize, String),
    #[error("unknown lattice family `{0}`")]
    UnknownFamily(String),
    #[error("bad parameters for `{0}`: {1}")]
    BadParams(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Closed,
    Patch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawnVertex {
    pub label: i64,
    pub class: usize,
}

/// `u`, `v` are drawn-vertex indices with `label(u) < label(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawnEdge {
    pub u: usize,
    pub v: usize,
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub steps: Vec<Step>,
    /// `verts[k]` is the tail of `steps[k]` in traversal direction.
    pub verts: Vec<usize>,
}

/// Direction of a star slot relative to the vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    /// the edge starts at the vertex
    Out,
    /// the edge ends at the vertex
    In,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurfaceLattice {
    vertices: Vec<DrawnVertex>,
    edges: Vec<DrawnEdge>,
    faces: Vec<Face>,
    mode: Mode,
    n_edge_classes: usize,
    n_vertex_classes: usize,
    class_vertices: Vec<Vec<usize>>,
    class_edges: Vec<Vec<usize>>,
    edge_class_ends: Vec<(usize, usize)>,
    vertex_faces: Vec<Vec<usize>>,
    vertex_edges: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub label: i64,
    pub class: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: i64,
    pub v: i64,
    pub class: usize,
}

/// Raw lattice description. Face entries are 1-based drawn-edge indices,
/// positive for traversal along the edge orientation and negative against it.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LatticeFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
    pub faces: Vec<Vec<i64>>,
    pub mode: Mode,
}

fn dense_classes(classes: impl Iterator<Item = usize>, what: &str) -> Result<usize, LatticeError> {
    let set: BTreeSet<usize> = classes.collect();
    let n = set.len();
    if set.iter().enumerate().any(|(i, &c)| i != c) {
        return Err(LatticeError::Malformed(format!("{what} classes must be numbered 0..{n}")));
    }
    Ok(n)
}

/// Validates a raw description.
pub fn validate_lattice(raw: &LatticeFile) -> Result<SurfaceLattice, LatticeError> {
    if raw.vertices.is_empty() {
        return Err(LatticeError::Malformed("no vertices".into()));
    }
    let mut order: Vec<usize> = (0..raw.vertices.len()).collect();
    order.sort_by_key(|&i| raw.vertices[i].label);
    let vertices: Vec<DrawnVertex> =
        order.iter().map(|&i| DrawnVertex { label: raw.vertices[i].label, class: raw.vertices[i].class }).collect();
    for w in vertices.windows(2) {
        if w[0].label == w[1].label {
            return Err(LatticeError::Malformed(format!("duplicate vertex label {}", w[0].label)));
        }
    }
    let by_label: BTreeMap<i64, usize> = vertices.iter().enumerate().map(|(i, v)| (v.label, i)).collect();
    let n_vertex_classes = dense_classes(vertices.iter().map(|v| v.class), "vertex")?;

    let mut edges = Vec::with_capacity(raw.edges.len());
    for (i, e) in raw.edges.iter().enumerate() {
        let (Some(&u), Some(&v)) = (by_label.get(&e.u), by_label.get(&e.v)) else {
            return Err(LatticeError::Malformed(format!("edge {} references an unknown label", i + 1)));
        };
        if e.u >= e.v {
            return Err(LatticeError::OrientationError(format!(
                "edge {} goes from label {} to {}; edges must point to the larger label",
                i + 1,
                e.u,
                e.v
            )));
        }
        edges.push(DrawnEdge { u, v, class: e.class });
    }
    let n_edge_classes = if edges.is_empty() { 0 } else { dense_classes(edges.iter().map(|e| e.class), "edge")? };

    let mut class_edges = vec![Vec::new(); n_edge_classes];
    for (i, e) in edges.iter().enumerate() {
        class_edges[e.class].push(i);
    }
    let mut edge_class_ends = Vec::with_capacity(n_edge_classes);
    for (c, copies) in class_edges.iter().enumerate() {
        let first = edges[copies[0]];
        let ends = (vertices[first.u].class, vertices[first.v].class);
        for &k in copies {
            let e = edges[k];
            let got = (vertices[e.u].class, vertices[e.v].class);
            if got != ends {
                return Err(LatticeError::InconsistentIdentification(
                    c,
                    format!("copy {} joins vertex classes {:?}, another copy joins {:?}", k + 1, got, ends),
                ));
            }
        }
        edge_class_ends.push(ends);
    }

    let mut faces = Vec::with_capacity(raw.faces.len());
    for (fi, refs) in raw.faces.iter().enumerate() {
        if refs.len() < 3 {
            return Err(LatticeError::NonCycleFace(fi, "fewer than three steps".into()));
        }
        let mut steps = Vec::with_capacity(refs.len());
        for &r in refs {
            if r == 0 || r.unsigned_abs() as usize > edges.len() {
                return Err(LatticeError::Malformed(format!("face {fi} references edge {r}")));
            }
            steps.push(Step { edge: r.unsigned_abs() as usize - 1, forward: r > 0 });
        }
        let tail = |s: &Step| if s.forward { edges[s.edge].u } else { edges[s.edge].v };
        let head = |s: &Step| if s.forward { edges[s.edge].v } else { edges[s.edge].u };
        for k in 0..steps.len() {
            let next = &steps[(k + 1) % steps.len()];
            if head(&steps[k]) != tail(next) {
                return Err(LatticeError::NonCycleFace(fi, format!("step {} does not end where step {} starts", k, (k + 1) % steps.len())));
            }
        }
        let verts: Vec<usize> = steps.iter().map(tail).collect();
        let distinct: BTreeSet<usize> = verts.iter().copied().collect();
        if distinct.len() != verts.len() {
            return Err(LatticeError::NonCycleFace(fi, "repeats a drawn vertex".into()));
        }
        faces.push(Face { steps, verts });
    }

    // usage of drawn edges and of edge classes
    let mut drawn_use: Vec<Vec<bool>> = vec![Vec::new(); edges.len()];
    let mut class_use: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n_edge_classes];
    for f in &faces {
        for s in &f.steps {
            drawn_use[s.edge].push(s.forward);
            class_use[edges[s.edge].class].push((s.edge, s.forward));
        }
    }
    for (i, uses) in drawn_use.iter().enumerate() {
        if uses.len() > 2 {
            return Err(LatticeError::OpenSurfaceEdge(edges[i].class, uses.len()));
        }
        if uses.len() == 2 && uses[0] == uses[1] {
            return Err(LatticeError::OrientationError(format!(
                "edge {} is traversed in the same direction by both adjacent faces",
                i + 1
            )));
        }
    }
    for (c, uses) in class_use.iter().enumerate() {
        if uses.len() > 2 || (raw.mode == Mode::Closed && uses.len() != 2) {
            return Err(LatticeError::OpenSurfaceEdge(c, uses.len()));
        }
        if uses.len() == 2 && uses[0].1 == uses[1].1 && uses[0].0 != uses[1].0 {
            return Err(LatticeError::InconsistentIdentification(
                c,
                "identified copies are traversed in the same direction".into(),
            ));
        }
    }

    let mut class_vertices = vec![Vec::new(); n_vertex_classes];
    for (i, v) in vertices.iter().enumerate() {
        class_vertices[v.class].push(i);
    }
    let mut vertex_faces = vec![Vec::new(); vertices.len()];
    for (fi, f) in faces.iter().enumerate() {
        for &v in &f.verts {
            vertex_faces[v].push(fi);
        }
    }
    let mut vertex_edges = vec![Vec::new(); vertices.len()];
    for (i, e) in edges.iter().enumerate() {
        vertex_edges[e.u].push(i);
        vertex_edges[e.v].push(i);
    }

    Ok(SurfaceLattice {
        vertices,
        edges,
        faces,
        mode: raw.mode,
        n_edge_classes,
        n_vertex_classes,
        class_vertices,
        class_edges,
        edge_class_ends,
        vertex_faces,
        vertex_edges,
    })
}

pub fn parse_lattice_json(text: &str) -> Result<SurfaceLattice, LatticeError> {
    let raw: LatticeFile = serde_json::from_str(text).map_err(|e| LatticeError::Malformed(e.to_string()))?;
    validate_lattice(&raw)
}

impl SurfaceLattice {
    pub fn vertices(&self) -> &[DrawnVertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[DrawnEdge] {
        &self.edges
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn num_edge_classes(&self) -> usize {
        self.n_edge_classes
    }

    pub fn num_vertex_classes(&self) -> usize {
        self.n_vertex_classes
    }

    /// Drawn vertices of a class, ascending by label.
    pub fn class_vertices(&self, class: usize) -> &[usize] {
        &self.class_vertices[class]
    }

    pub fn class_edges(&self, class: usize) -> &[usize] {
        &self.class_edges[class]
    }

    /// Vertex classes at the tail and head of an edge class.
    pub fn edge_class_ends(&self, class: usize) -> (usize, usize) {
        self.edge_class_ends[class]
    }

    pub fn vertex_faces(&self, drawn_vertex: usize) -> &[usize] {
        &self.vertex_faces[drawn_vertex]
    }

    pub fn vertex_edges(&self, drawn_vertex: usize) -> &[usize] {
        &self.vertex_edges[drawn_vertex]
    }

    pub fn step_tail(&self, s: Step) -> usize {
        if s.forward {
            self.edges[s.edge].u
        } else {
            self.edges[s.edge].v
        }
    }

    pub fn step_head(&self, s: Step) -> usize {
        if s.forward {
            self.edges[s.edge].v
        } else {
            self.edges[s.edge].u
        }
    }

    /// Edge classes on the boundary of a face.
    pub fn face_edge_classes(&self, f: usize) -> BTreeSet<usize> {
        self.faces[f].steps.iter().map(|s| self.edges[s.edge].class).collect()
    }

    /// Vertex classes on the boundary of a face.
    pub fn face_vertex_classes(&self, f: usize) -> BTreeSet<usize> {
        self.faces[f].verts.iter().map(|&v| self.vertices[v].class).collect()
    }

    /// Faces having at least one corner in the vertex class.
    pub fn class_faces(&self, class: usize) -> BTreeSet<usize> {
        self.class_vertices[class].iter().flat_map(|&v| self.vertex_faces[v].iter().copied()).collect()
    }

    /// `V - E + F` counted on classes.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertex_classes as i64 - self.n_edge_classes as i64 + self.faces.len() as i64
    }

    pub fn to_file(&self) -> LatticeFile {
        LatticeFile {
            vertices: self.vertices.iter().map(|v| VertexEntry { label: v.label, class: v.class }).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeEntry { u: self.vertices[e.u].label, v: self.vertices[e.v].label, class: e.class })
                .collect(),
            faces: self
                .faces
                .iter()
                .map(|f| f.steps.iter().map(|s| if s.forward { s.edge as i64 + 1 } else { -(s.edge as i64 + 1) }).collect())
                .collect(),
            mode: self.mode,
        }
    }

    /// Star of a vertex class: every (edge class, direction) slot at any drawn copy.
    pub fn star(&self, class: usize) -> BTreeSet<(usize, Dir)> {
        let mut out = BTreeSet::new();
        for &v in &self.class_vertices[class] {
            for &e in &self.vertex_edges[v] {
                let d = if self.edges[e].u == v { Dir::Out } else { Dir::In };
                out.insert((self.edges[e].class, d));
            }
        }
        out
    }

    pub fn star_classes(&self, class: usize) -> BTreeSet<usize> {
        self.star(class).into_iter().map(|(c, _)| c).collect()
    }

    /// Star plus every edge of every face containing the vertex class.
    pub fn closed_star(&self, class: usize) -> BTreeSet<usize> {
        let mut out = self.star_classes(class);
        for f in self.class_faces(class) {
            out.extend(self.face_edge_classes(f));
        }
        out
    }

    /// Vertex classes of the closed star viewed as a closed point set.
    pub fn closed_star_vertices(&self, class: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::from([class]);
        for &v in &self.class_vertices[class] {
            for &e in &self.vertex_edges[v] {
                out.insert(self.vertices[self.edges[e].u].class);
                out.insert(self.vertices[self.edges[e].v].class);
            }
        }
        for f in self.class_faces(class) {
            out.extend(self.face_vertex_classes(f));
        }
        out
    }
}

/// Reference to an edge of the triangulated lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRef {
    Drawn(usize),
    Ghost(usize),
}

/// A chord added inside a non-triangular face, from the face's smallest
/// vertex `from` to `to`; its color is the product along `path`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ghost {
    pub face: usize,
    pub from: usize,
    pub to: usize,
    pub path: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangle {
    pub face: usize,
    /// drawn vertices sorted by label
    pub sorted: [usize; 3],
    /// edges (s0 s1), (s1 s2), (s0 s2), each oriented toward the larger label
    pub edges: [EdgeRef; 3],
    /// whether the counterclockwise order from `sorted[0]` is ascending
    pub ascending: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    pub ghosts: Vec<Ghost>,
    pub triangles: Vec<Triangle>,
    pub face_triangles: Vec<Vec<usize>>,
    /// per drawn vertex: (triangle, position of the vertex in `sorted`)
    pub vertex_triangles: Vec<Vec<(usize, usize)>>,
}

/// Fans every face from its smallest vertex.
pub fn triangulate(l: &SurfaceLattice) -> Triangulation {
    let mut ghosts = Vec::new();
    let mut triangles = Vec::new();
    let mut face_triangles = Vec::with_capacity(l.faces.len());
    let mut vertex_triangles = vec![Vec::new(); l.vertices.len()];
    for (fi, f) in l.faces.iter().enumerate() {
        let n = f.verts.len();
        let start = (0..n).min_by_key(|&k| l.vertices[f.verts[k]].label).unwrap_or(0);
        let w: Vec<usize> = (0..n).map(|k| f.verts[(start + k) % n]).collect();
        let s: Vec<Step> = (0..n).map(|k| f.steps[(start + k) % n]).collect();
        // spoke from w[0] to w[i]
        let mut spoke = vec![EdgeRef::Drawn(s[0].edge); n];
        spoke[1] = EdgeRef::Drawn(s[0].edge);
        spoke[n - 1] = EdgeRef::Drawn(s[n - 1].edge);
        for (i, sp) in spoke.iter_mut().enumerate().take(n - 1).skip(2) {
            *sp = EdgeRef::Ghost(ghosts.len());
            ghosts.push(Ghost { face: fi, from: w[0], to: w[i], path: s[..i].to_vec() });
        }
        let mut mine = Vec::new();
        for i in 1..n - 1 {
            let (a, b) = (w[i], w[i + 1]);
            let ascending = l.vertices[a].label < l.vertices[b].label;
            let (lo, hi, e_lo, e_hi) =
                if ascending { (a, b, spoke[i], spoke[i + 1]) } else { (b, a, spoke[i + 1], spoke[i]) };
            let t = Triangle {
                face: fi,
                sorted: [w[0], lo, hi],
                edges: [e_lo, EdgeRef::Drawn(s[i].edge), e_hi],
                ascending,
            };
            for (pos, &v) in t.sorted.iter().enumerate() {
                vertex_triangles[v].push((triangles.len(), pos));
            }
            mine.push(triangles.len());
            triangles.push(t);
        }
        face_triangles.push(mine);
    }
    Triangulation { ghosts, triangles, face_triangles, vertex_triangles }
}

/// Named builtin lattices.
pub fn builtin_lattice(name: &str, params: &[i64]) -> Result<SurfaceLattice, LatticeError> {
    let bad = |why: &str| LatticeError::BadParams(name.to_string(), why.to_string());
    let raw = match (name, params) {
        ("torus_minimal", []) => genus_polygon_file(1),
        ("torus_minimal", _) => return Err(bad("takes no parameters")),
        ("genus_polygon", [n]) if *n >= 1 && *n <= 16 => genus_polygon_file(*n as usize),
        ("genus_polygon", _) => return Err(bad("expected genus in 1..=16")),
        ("square_patch", [w, h]) if *w >= 1 && *h >= 1 && w.checked_mul(*h).is_some_and(|a| a <= 4096) => square_patch_file(*w as usize, *h as usize),
        ("square_patch", _) => return Err(bad("expected positive width and height")),
        ("refined_torus", [k]) if *k >= 1 && *k <= 32 => refined_torus_file(*k as usize),
        ("refined_torus", _) => return Err(bad("expected k in 1..=32")),
        (other, _) => return Err(LatticeError::UnknownFamily(other.to_string())),
    };
    validate_lattice(&raw)
}

/// One-vertex `4n`-gon with side pairing `g1 .. g2n g1^-1 .. g2n^-1` and a fan of
/// chords from the largest label. Edge classes `0..2n` are the sides, the
/// chords follow.
fn genus_polygon_file(n: usize) -> LatticeFile {
    let m = 4 * n;
    // counterclockwise labels: 1, 2, 4, .., 4n, 4n-1, 4n-3, .., 3
    let mut seq: Vec<i64> = vec![1];
    seq.extend((1..=2 * n).map(|k| 2 * k as i64));
    seq.extend((0..2 * n - 1).map(|k| (m - 1 - 2 * k) as i64));
    let vertices = seq.iter().map(|&label| VertexEntry { label, class: 0 }).collect();

    let mut edges: Vec<EdgeEntry> = Vec::new();
    let mut edge_of: BTreeMap<(i64, i64), usize> = BTreeMap::new();
    let mut add = |a: i64, b: i64, class: usize, edges: &mut Vec<EdgeEntry>| {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        edge_of.insert((u, v), edges.len());
        edges.push(EdgeEntry { u, v, class });
    };
    // first half: seq[i-1] -> seq[i] carries g_i
    for i in 1..=2 * n {
        add(seq[i - 1], seq[i], i - 1, &mut edges);
    }
    // second half: seq[2n+j-1] -> seq[2n+j] carries g_j^-1
    for j in 1..=2 * n {
        add(seq[2 * n + j - 1], seq[(2 * n + j) % m], j - 1, &mut edges);
    }
    let apex = seq[2 * n];
    let ring: Vec<i64> = (1..m).map(|k| seq[(2 * n + k) % m]).collect();
    let mut next_class = 2 * n;
    for &p in &ring[1..ring.len() - 1] {
        add(p, apex, next_class, &mut edges);
        next_class += 1;
    }
    let signed = |a: i64, b: i64| -> i64 {
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        let k = edge_of[&(u, v)] as i64 + 1;
        if a < b {
            k
        } else {
            -k
        }
    };
    let faces = ring
        .windows(2)
        .map(|w| vec![signed(apex, w[0]), signed(w[0], w[1]), signed(w[1], apex)])
        .collect();
    LatticeFile { vertices, edges, faces, mode: Mode::Closed }
}

fn grid_faces(w: usize, h: usize, h_edge: impl Fn(usize, usize) -> usize, v_edge: impl Fn(usize, usize) -> usize) -> Vec<Vec<i64>> {
    let mut faces = Vec::new();
    for j in 0..h {
        for i in 0..w {
            // (i,j) -> (i+1,j) -> (i+1,j+1) -> (i,j+1)
            faces.push(vec![
                h_edge(i, j) as i64 + 1,
                v_edge(i + 1, j) as i64 + 1,
                -(h_edge(i, j + 1) as i64 + 1),
                -(v_edge(i, j) as i64 + 1),
            ]);
        }
    }
    faces
}

/// Planar `w x h` grid of unit squares. Vertex `(i,j)` has label
/// `j*(w+1)+i+1` and class `label-1`. Horizontal edges come first,
/// row by row, then vertical edges.
fn square_patch_file(w: usize, h: usize) -> LatticeFile {
    let label = |i: usize, j: usize| (j * (w + 1) + i + 1) as i64;
    let mut vertices = Vec::new();
    for j in 0..=h {
        for i in 0..=w {
            vertices.push(VertexEntry { label: label(i, j), class: label(i, j) as usize - 1 });
        }
    }
    let h_edge = |i: usize, j: usize| j * w + i;
    let v_edge = |i: usize, j: usize| (h + 1) * w + j * (w + 1) + i;
    let mut edges = Vec::new();
    for j in 0..=h {
        for i in 0..w {
            edges.push(EdgeEntry { u: label(i, j), v: label(i + 1, j), class: h_edge(i, j) });
        }
    }
    for j in 0..h {
        for i in 0..=w {
            edges.push(EdgeEntry { u: label(i, j), v: label(i, j + 1), class: v_edge(i, j) });
        }
    }
    let faces = grid_faces(w, h, h_edge, v_edge);
    LatticeFile { vertices, edges, faces, mode: Mode::Patch }
}

/// `k x k` square grid with periodic identification; vertex class
/// `(i mod k) + k (j mod k)`, horizontal edge classes `0..k^2`, vertical after.
fn refined_torus_file(k: usize) -> LatticeFile {
    let label = |i: usize, j: usize| (j * (k + 1) + i + 1) as i64;
    let mut vertices = Vec::new();
    for j in 0..=k {
        for i in 0..=k {
            vertices.push(VertexEntry { label: label(i, j), class: (i % k) + k * (j % k) });
        }
    }
    let h_drawn = |i: usize, j: usize| j * k + i;
    let v_drawn = |i: usize, j: usize| (k + 1) * k + j * (k + 1) + i;
    let mut edges = Vec::new();
    for j in 0..=k {
        for i in 0..k {
            edges.push(EdgeEntry { u: label(i, j), v: label(i + 1, j), class: (j % k) * k + i });
        }
    }
    for j in 0..k {
        for i in 0..=k {
            edges.push(EdgeEntry { u: label(i, j), v: label(i, j + 1), class: k * k + j * k + (i % k) });
        }
    }
    let faces = grid_faces(k, k, h_drawn, v_drawn);
    LatticeFile { vertices, edges, faces, mode: Mode::Closed }
}

/// Coordinates helper for [`builtin_lattice`]`("square_patch", [w, h])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGeometry {
    pub w: usize,
    pub h: usize,
}

impl PatchGeometry {
    pub fn vertex(&self, i: usize, j: usize) -> usize {
        j * (self.w + 1) + i
    }

    /// Edge from `(i,j)` to `(i+1,j)`.
    pub fn h_edge(&self, i: usize, j: usize) -> usize {
        j * self.w + i
    }

    /// Edge from `(i,j)` to `(i,j+1)`.
    pub fn v_edge(&self, i: usize, j: usize) -> usize {
        (self.h + 1) * self.w + j * (self.w + 1) + i
    }

    /// Square with lower-left corner `(i,j)`.
    pub fn face(&self, i: usize, j: usize) -> usize {
        j * self.w + i
    }
}
