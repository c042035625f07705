//! Regions with smooth and rough boundaries, and the surrounding relations
//! between them.
//!
//! Set-theoretic statements mixing edges and vertices ("closed star meets I",
//! "face meets I") are evaluated on closed point sets: an edge set meets a
//! cell when they share an edge or a vertex.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{PatchGeometry, SurfaceLattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Smooth,
    Rough,
}

/// A boundary edge: a drawn-edge index (0-based) and its marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub edge: usize,
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegionError {
    #[error("malformed region: {0}")]
    Malformed(String),
    #[error("boundary edge {edge} is marked {kind:?} but {reason}")]
    BoundaryMarker { edge: usize, kind: BoundaryKind, reason: String },
    #[error("boundary is not a union of closed cycles (vertex class {0} has odd degree)")]
    OpenBoundary(usize),
    #[error("the shared interval mixes smooth and rough edges")]
    MixedInterval,
    #[error("the shared interval is the whole boundary of the outer region")]
    IEqualsWholeBoundary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryEntry {
    /// 1-based drawn-edge index
    pub edge: usize,
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    pub edges: Vec<usize>,
    pub boundary: Vec<BoundaryEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    edges: BTreeSet<usize>,
    boundary: Vec<BoundaryEdge>,
}

/// Outcome of comparing two regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relation {
    CompletelySurrounded,
    Surrounded { interval: Vec<BoundaryEdge>, kind: BoundaryKind },
    Neither,
}

impl Relation {
    pub fn name(&self) -> &'static str {
        match self {
            Relation::CompletelySurrounded => "completely_surrounded",
            Relation::Surrounded { .. } => "surrounded",
            Relation::Neither => "neither",
        }
    }

    pub fn interval(&self) -> &[BoundaryEdge] {
        match self {
            Relation::Surrounded { interval, .. } => interval,
            _ => &[],
        }
    }
}

pub fn validate_region(l: &SurfaceLattice, raw: &RegionFile) -> Result<Region, RegionError> {
    let mut edges = BTreeSet::new();
    for &c in &raw.edges {
        if c >= l.num_edge_classes() {
            return Err(RegionError::Malformed(format!("edge class {c} does not exist")));
        }
        if !edges.insert(c) {
            return Err(RegionError::Malformed(format!("edge class {c} listed twice")));
        }
    }
    let mut boundary = Vec::with_capacity(raw.boundary.len());
    let mut seen = BTreeSet::new();
    for b in &raw.boundary {
        if b.edge == 0 || b.edge > l.edges().len() {
            return Err(RegionError::Malformed(format!("boundary references drawn edge {}", b.edge)));
        }
        if !seen.insert(b.edge) {
            return Err(RegionError::Malformed(format!("boundary lists drawn edge {} twice", b.edge)));
        }
        boundary.push(BoundaryEdge { edge: b.edge - 1, kind: b.kind });
    }
    Region::new(l, edges, boundary)
}

pub fn parse_region_json(l: &SurfaceLattice, text: &str) -> Result<Region, RegionError> {
    let raw: RegionFile = serde_json::from_str(text).map_err(|e| RegionError::Malformed(e.to_string()))?;
    validate_region(l, &raw)
}

impl Region {
    /// Checks the marker invariant and that the boundary is a union of cycles.
    pub fn new(l: &SurfaceLattice, edges: BTreeSet<usize>, mut boundary: Vec<BoundaryEdge>) -> Result<Region, RegionError> {
        boundary.sort();
        boundary.dedup();
        let mut degree = vec![0usize; l.num_vertex_classes()];
        for b in &boundary {
            let e = l.edges()[b.edge];
            let inside = edges.contains(&e.class);
            match (b.kind, inside) {
                (BoundaryKind::Smooth, false) => {
                    return Err(RegionError::BoundaryMarker {
                        edge: b.edge + 1,
                        kind: b.kind,
                        reason: "is not in the region".into(),
                    })
                }
                (BoundaryKind::Rough, true) => {
                    return Err(RegionError::BoundaryMarker {
                        edge: b.edge + 1,
                        kind: b.kind,
                        reason: "is in the region".into(),
                    })
                }
                _ => {}
            }
            degree[l.vertices()[e.u].class] += 1;
            degree[l.vertices()[e.v].class] += 1;
        }
        if let Some(v) = degree.iter().position(|d| d % 2 == 1) {
            return Err(RegionError::OpenBoundary(v));
        }
        Ok(Region { edges, boundary })
    }

    pub fn empty() -> Region {
        Region { edges: BTreeSet::new(), boundary: Vec::new() }
    }

    pub fn edges(&self) -> &BTreeSet<usize> {
        &self.edges
    }

    pub fn boundary(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    pub fn contains_edge(&self, class: usize) -> bool {
        self.edges.contains(&class)
    }

    pub fn to_file(&self) -> RegionFile {
        RegionFile {
            edges: self.edges.iter().copied().collect(),
            boundary: self.boundary.iter().map(|b| BoundaryEntry { edge: b.edge + 1, kind: b.kind }).collect(),
        }
    }

    /// Vertex classes at the ends of region edges.
    pub fn vertices(&self, l: &SurfaceLattice) -> BTreeSet<usize> {
        edge_set_vertices(l, self.edges.iter().copied())
    }

    /// Vertex classes at the ends of boundary edges.
    pub fn boundary_vertices(&self, l: &SurfaceLattice) -> BTreeSet<usize> {
        edge_set_vertices(l, self.boundary.iter().map(|b| l.edges()[b.edge].class))
    }

    /// Faces all of whose edges lie in the region.
    pub fn faces_inside(&self, l: &SurfaceLattice) -> Vec<usize> {
        (0..l.faces().len()).filter(|&f| l.face_edge_classes(f).is_subset(&self.edges)).collect()
    }

    pub fn contains_star(&self, l: &SurfaceLattice, v: usize) -> bool {
        l.star_classes(v).is_subset(&self.edges)
    }

    pub fn contains_closed_star(&self, l: &SurfaceLattice, v: usize) -> bool {
        l.closed_star(v).is_subset(&self.edges)
    }

    pub fn has_rough(&self) -> bool {
        self.boundary.iter().any(|b| b.kind == BoundaryKind::Rough)
    }
}

pub fn edge_set_vertices(l: &SurfaceLattice, classes: impl Iterator<Item = usize>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    for c in classes {
        let (a, b) = l.edge_class_ends(c);
        out.insert(a);
        out.insert(b);
    }
    out
}

/// Classifies `lam` against `delta` and returns the shared interval.
pub fn surrounded(l: &SurfaceLattice, lam: &Region, delta: &Region) -> Result<Relation, RegionError> {
    let delta_map: std::collections::BTreeMap<usize, BoundaryKind> =
        delta.boundary.iter().map(|b| (b.edge, b.kind)).collect();
    let mut interval = Vec::new();
    for b in &lam.boundary {
        if let Some(&k) = delta_map.get(&b.edge) {
            if k != b.kind {
                return Err(RegionError::MixedInterval);
            }
            interval.push(*b);
        }
    }
    let kinds: BTreeSet<BoundaryKind> = interval.iter().map(|b| b.kind).collect();
    if kinds.len() > 1 {
        return Err(RegionError::MixedInterval);
    }
    if !interval.is_empty() && interval.len() == delta.boundary.len() {
        return Err(RegionError::IEqualsWholeBoundary);
    }
    if !lam.edges.is_subset(&delta.edges) {
        return Ok(Relation::Neither);
    }
    let vl = lam.vertices(l);
    if interval.is_empty() {
        let ok = vl.iter().all(|&v| delta.contains_closed_star(l, v));
        return Ok(if ok { Relation::CompletelySurrounded } else { Relation::Neither });
    }
    let kind = interval[0].kind;
    let vi = edge_set_vertices(l, interval.iter().map(|b| l.edges()[b.edge].class));
    let ok = match kind {
        BoundaryKind::Smooth => vl.iter().filter(|v| !vi.contains(v)).all(|&v| delta.contains_closed_star(l, v)),
        BoundaryKind::Rough => vl
            .iter()
            .filter(|&&v| l.closed_star_vertices(v).is_disjoint(&vi))
            .all(|&v| delta.contains_closed_star(l, v)),
    };
    Ok(if ok { Relation::Surrounded { interval, kind } } else { Relation::Neither })
}

fn interval_vertices(l: &SurfaceLattice, interval: &[BoundaryEdge]) -> BTreeSet<usize> {
    edge_set_vertices(l, interval.iter().map(|b| l.edges()[b.edge].class))
}

fn interval_degree(l: &SurfaceLattice, interval: &[BoundaryEdge], v: usize) -> usize {
    interval
        .iter()
        .map(|b| {
            let e = l.edges()[b.edge];
            usize::from(l.vertices()[e.u].class == v) + usize::from(l.vertices()[e.v].class == v)
        })
        .sum()
}

/// Vertices carrying partial vertex operators for the interval.
pub fn eligible_vertices(l: &SurfaceLattice, lam: &Region, interval: &[BoundaryEdge], kind: BoundaryKind) -> Vec<usize> {
    let vi = interval_vertices(l, interval);
    match kind {
        BoundaryKind::Smooth => vi.into_iter().filter(|&v| interval_degree(l, interval, v) >= 2).collect(),
        BoundaryKind::Rough => {
            let on_boundary = lam.boundary_vertices(l);
            let vl = lam.vertices(l);
            (0..l.num_vertex_classes())
                .filter(|&v| !l.closed_star_vertices(v).is_disjoint(&vi))
                .filter(|&v| interval_degree(l, interval, v) >= 2 || (vl.contains(&v) && !on_boundary.contains(&v)))
                .collect()
        }
    }
}

/// Faces carrying partial face operators for a rough interval: faces that
/// meet the interval, are not contained in the region, and share at least one
/// edge with it.
pub fn partial_faces(l: &SurfaceLattice, lam: &Region, interval: &[BoundaryEdge]) -> Vec<usize> {
    let vi = interval_vertices(l, interval);
    (0..l.faces().len())
        .filter(|&f| !l.face_vertex_classes(f).is_disjoint(&vi))
        .filter(|&f| {
            let fe = l.face_edge_classes(f);
            !fe.is_subset(&lam.edges) && !fe.is_disjoint(&lam.edges)
        })
        .collect()
}

/// For a rough interval: every face at an eligible vertex that does not meet
/// the interval lies in the region.
pub fn sufficiently_large(l: &SurfaceLattice, lam: &Region, interval: &[BoundaryEdge]) -> bool {
    let vi = interval_vertices(l, interval);
    let rough: Vec<BoundaryEdge> = interval.iter().copied().filter(|b| b.kind == BoundaryKind::Rough).collect();
    if rough.is_empty() {
        return true;
    }
    eligible_vertices(l, lam, &rough, BoundaryKind::Rough).into_iter().all(|v| {
        l.class_faces(v)
            .into_iter()
            .filter(|&f| l.face_vertex_classes(f).is_disjoint(&vi))
            .all(|f| l.face_edge_classes(f).is_subset(&lam.edges))
    })
}

/// Per-side boundary markers of a rectangular block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sides {
    pub bottom: BoundaryKind,
    pub right: BoundaryKind,
    pub top: BoundaryKind,
    pub left: BoundaryKind,
}

impl Sides {
    pub fn all(kind: BoundaryKind) -> Sides {
        Sides { bottom: kind, right: kind, top: kind, left: kind }
    }
}

/// Rectangular block `[x0,x1] x [y0,y1]` of a square patch. Rough sides are
/// excluded from the edge set, smooth sides are included.
pub fn block_region(
    l: &SurfaceLattice,
    geom: PatchGeometry,
    (x0, y0): (usize, usize),
    (x1, y1): (usize, usize),
    sides: Sides,
) -> Result<Region, RegionError> {
    if !(x0 < x1 && y0 < y1 && x1 <= geom.w && y1 <= geom.h) {
        return Err(RegionError::Malformed("block outside the patch".into()));
    }
    let mut edges = BTreeSet::new();
    let mut boundary = Vec::new();
    let mut side = |class: usize, kind: BoundaryKind, edges: &mut BTreeSet<usize>| {
        if kind == BoundaryKind::Smooth {
            edges.insert(class);
        }
        boundary.push(BoundaryEdge { edge: l.class_edges(class)[0], kind });
    };
    for j in y0..=y1 {
        for i in x0..x1 {
            let c = geom.h_edge(i, j);
            if j == y0 {
                side(c, sides.bottom, &mut edges);
            } else if j == y1 {
                side(c, sides.top, &mut edges);
            } else {
                edges.insert(c);
            }
        }
    }
    for j in y0..y1 {
        for i in x0..=x1 {
            let c = geom.v_edge(i, j);
            if i == x0 {
                side(c, sides.left, &mut edges);
            } else if i == x1 {
                side(c, sides.right, &mut edges);
            } else {
                edges.insert(c);
            }
        }
    }
    Region::new(l, edges, boundary)
}
