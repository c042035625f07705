//! Numerical certification of the local topological order axioms on finite
//! region pairs, boundary algebras, partial vertex and face operators, and
//! the Knill-Laflamme check.
//!
//! Every operator here commutes with or is compressed by a region projector
//! `p_D`. Its range is spanned by normalized regular-orbit vectors of the
//! region's flat colorings, so an operator `x` is represented by the small
//! matrix `V^dagger x V` where `V` is the isometry onto that range. Spans of
//! such matrices are compared through a seeded random bilinear sketch.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Elem, FiniteGroup};
use crate::groundstate::{decompose, ground_state_basis, GroundStateError, OrbitDecomposition, Scope};
use crate::lattice::Mode;
use crate::operators::{Coloring, Model, VertexProgram};
use crate::region::{
    eligible_vertices, partial_faces, sufficiently_large, surrounded, BoundaryEdge, BoundaryKind, Region, RegionError,
    RegionFile, Relation,
};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;
pub const DEFAULT_SAMPLE_LIMIT: usize = 100_000;
pub const DEFAULT_CAP: u128 = 1 << 14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LtoError {
    #[error("precondition failed: {0}")]
    PreconditionNotSurrounded(String),
    #[error("region is not sufficiently large for its rough interval")]
    NotSufficientlyLarge,
    #[error("vertex {0} is not eligible for a partial vertex operator")]
    IneligibleVertex(usize),
    #[error("face {0} lies inside the region (use the face projector)")]
    FaceFullyInside(usize),
    #[error("face {0} shares no edge with the region")]
    FaceDisjoint(usize),
    #[error("Hilbert dimension {dim} exceeds the cap {cap}")]
    DimensionCapExceeded { dim: u128, cap: u128 },
    #[error("vertex {0} has its star in a smooth region but not its closed star")]
    OpenStar(usize),
    #[error("the error-correction check needs a closed surface")]
    NotClosed,
    #[error("{what} exceeds the limit {limit}")]
    TooLarge { what: String, limit: usize },
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error(transparent)]
    GroundState(#[from] GroundStateError),
}

/// `L_g`, `R_g` and `P_g` on a single edge factor.
#[derive(Debug, Clone, Copy)]
pub struct EdgeOps<'a> {
    group: &'a FiniteGroup,
    g: Elem,
}

pub fn edge_ops(group: &FiniteGroup, g: Elem) -> EdgeOps<'_> {
    EdgeOps { group, g }
}

impl EdgeOps<'_> {
    /// `L_g|k> = |gk>`
    pub fn left(&self, k: Elem) -> Elem {
        self.group.mul(self.g, k)
    }

    /// `R_g|k> = |kg>`
    pub fn right(&self, k: Elem) -> Elem {
        self.group.mul(k, self.g)
    }

    /// `P_g|k> = delta_{g,k}|k>`
    pub fn proj(&self, k: Elem) -> Option<Elem> {
        (k == self.g).then_some(k)
    }
}

/// `prod_c L_{left(c)} P_{proj(c)}` over edge classes of a region.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LocalOperator {
    pub left_part: BTreeMap<usize, Elem>,
    pub proj_part: BTreeMap<usize, Elem>,
}

impl LocalOperator {
    pub fn apply(&self, group: &FiniteGroup, c: &[Elem]) -> Option<Coloring> {
        if self.proj_part.iter().any(|(&k, &h)| c[k] != h) {
            return None;
        }
        let mut out = c.to_vec();
        for (&k, &g) in &self.left_part {
            out[k] = group.mul(g, out[k]);
        }
        Some(out)
    }

    pub fn is_supported_in(&self, region: &Region) -> bool {
        self.left_part.keys().chain(self.proj_part.keys()).all(|&k| region.contains_edge(k))
    }
}

/// `C_v^g`: the vertex operator restricted to star edges inside a region,
/// with cocycle factors only from triangles of faces inside the region.
#[derive(Debug, Clone)]
pub struct PartialVertexOp {
    pub vertex: usize,
    program: VertexProgram,
}

impl PartialVertexOp {
    pub fn new(model: &Model, lam: &Region, interval: &[BoundaryEdge], kind: BoundaryKind, v: usize) -> Result<PartialVertexOp, LtoError> {
        if !eligible_vertices(model.lattice(), lam, interval, kind).contains(&v) {
            return Err(LtoError::IneligibleVertex(v));
        }
        Ok(PartialVertexOp::restricted(model, lam, v))
    }

    /// Restriction without the eligibility check.
    pub fn restricted(model: &Model, lam: &Region, v: usize) -> PartialVertexOp {
        let l = model.lattice();
        let inside: BTreeSet<usize> = lam.faces_inside(l).into_iter().collect();
        let program = VertexProgram::compile(l, model.triangulation(), v, |c| lam.contains_edge(c), |f| inside.contains(&f));
        PartialVertexOp { vertex: v, program }
    }

    /// Returns the moved coloring and the phase exponent in units of `1/den`.
    pub fn apply(&self, model: &Model, g: Elem, c: &[Elem]) -> (Coloring, u64) {
        let mut out = c.to_vec();
        let e = self.program.apply(model.alpha(), g, c, &mut out);
        (out, e % model.alpha().den() as u64)
    }

    pub fn program(&self) -> &VertexProgram {
        &self.program
    }
}

/// `D_f^g`: projector onto colorings whose partial boundary product `h`
/// along the region's edges of `f` satisfies `g h = e`. The product runs
/// counterclockwise starting just after the last missing edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFaceOp {
    pub face: usize,
    steps: Vec<(usize, bool)>,
}

impl PartialFaceOp {
    pub fn new(model: &Model, lam: &Region, f: usize) -> Result<PartialFaceOp, LtoError> {
        let all = model.face_steps(f);
        let present: Vec<bool> = all.iter().map(|(c, _)| lam.contains_edge(*c)).collect();
        if present.iter().all(|&p| p) {
            return Err(LtoError::FaceFullyInside(f));
        }
        if !present.iter().any(|&p| p) {
            return Err(LtoError::FaceDisjoint(f));
        }
        let last_missing = present.iter().rposition(|&p| !p).unwrap_or(0);
        let n = all.len();
        let steps = (1..=n).map(|k| (last_missing + k) % n).filter(|&i| present[i]).map(|i| all[i]).collect();
        Ok(PartialFaceOp { face: f, steps })
    }

    pub fn partial_holonomy(&self, group: &FiniteGroup, c: &[Elem]) -> Elem {
        self.steps
            .iter()
            .fold(group.identity(), |x, &(k, fwd)| group.mul(x, if fwd { c[k] } else { group.inv(c[k]) }))
    }

    pub fn selects(&self, group: &FiniteGroup, g: Elem, c: &[Elem]) -> bool {
        group.mul(g, self.partial_holonomy(group, c)) == group.identity()
    }

    pub fn steps(&self) -> &[(usize, bool)] {
        &self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// `P_l^g` on an interval edge class
    Proj { class: usize, g: Elem },
    /// `C_v^g`, index into the vertex operators
    Vertex { op: usize, g: Elem },
    /// `D_f^g`, index into the face operators
    Face { op: usize, g: Elem },
}

/// Generators of the smooth boundary algebra `{P_l^g, C_v^g}` or of the
/// rough one `{D_f^g, C_v^g}`.
#[derive(Debug, Clone)]
pub struct BoundaryGeneratorSet {
    pub interval: Vec<BoundaryEdge>,
    pub kind: Option<BoundaryKind>,
    pub vertex_ops: Vec<PartialVertexOp>,
    pub face_ops: Vec<PartialFaceOp>,
    pub generators: Vec<Generator>,
}

impl BoundaryGeneratorSet {
    /// An empty interval gives no generators (the algebra is the scalars).
    pub fn new(model: &Model, lam: &Region, interval: &[BoundaryEdge], kind: Option<BoundaryKind>) -> Result<BoundaryGeneratorSet, LtoError> {
        let l = model.lattice();
        let group = model.group();
        let mut set = BoundaryGeneratorSet {
            interval: interval.to_vec(),
            kind,
            vertex_ops: Vec::new(),
            face_ops: Vec::new(),
            generators: Vec::new(),
        };
        let Some(kind) = kind else {
            return Ok(set);
        };
        if kind == BoundaryKind::Smooth {
            let classes: BTreeSet<usize> = interval.iter().map(|b| l.edges()[b.edge].class).collect();
            for class in classes {
                for g in group.elements() {
                    set.generators.push(Generator::Proj { class, g });
                }
            }
        } else {
            for f in partial_faces(l, lam, interval) {
                let op = set.face_ops.len();
                set.face_ops.push(PartialFaceOp::new(model, lam, f)?);
                for g in group.elements() {
                    set.generators.push(Generator::Face { op, g });
                }
            }
        }
        for v in eligible_vertices(l, lam, interval, kind) {
            let op = set.vertex_ops.len();
            set.vertex_ops.push(PartialVertexOp::new(model, lam, interval, kind, v)?);
            for g in group.elements() {
                set.generators.push(Generator::Vertex { op, g });
            }
        }
        Ok(set)
    }

    /// Applies generator `k`; `out` must equal `c` on entry. Returns the
    /// phase exponent, or `None` when the generator annihilates `c`.
    pub fn act(&self, model: &Model, k: usize, c: &[Elem], out: &mut Coloring) -> Option<u64> {
        match self.generators[k] {
            Generator::Proj { class, g } => (c[class] == g).then_some(0),
            Generator::Vertex { op, g } => Some(self.vertex_ops[op].program.apply(model.alpha(), g, c, out)),
            Generator::Face { op, g } => self.face_ops[op].selects(model.group(), g, c).then_some(0),
        }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Ground-space scope of a region projector: all region edges, faces inside
/// the region, and active vertices whose closed star lies in the region. For
/// smooth regions a vertex with its star but not its closed star inside is
/// rejected.
pub fn region_scope(model: &Model, region: &Region) -> Result<Scope, LtoError> {
    let l = model.lattice();
    let mut vertices = Vec::new();
    for &v in model.active_vertices() {
        if region.contains_closed_star(l, v) {
            vertices.push(v);
        } else if !region.has_rough() && region.contains_star(l, v) {
            return Err(LtoError::OpenStar(v));
        }
    }
    let edges = region.edges().iter().copied().collect();
    Ok(Scope::new(model, edges, region.faces_inside(l), vertices)?)
}

/// Sparse square matrix stored by columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    pub cols: Vec<Vec<(u32, Complex64)>>,
}

impl CMat {
    pub fn identity(dim: usize) -> CMat {
        CMat { dim, cols: (0..dim).map(|j| vec![(j as u32, Complex64::new(1.0, 0.0))]).collect() }
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.dim];
        let mut touched: Vec<u32> = Vec::new();
        let mut cols = Vec::with_capacity(self.dim);
        for col in &other.cols {
            for &(k, b) in col {
                for &(i, a) in &self.cols[k as usize] {
                    if scratch[i as usize] == Complex64::new(0.0, 0.0) {
                        touched.push(i);
                    }
                    scratch[i as usize] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut out = Vec::with_capacity(touched.len());
            for &i in &touched {
                let z = scratch[i as usize];
                if z.norm_sqr() > 1e-30 {
                    out.push((i, z));
                }
                scratch[i as usize] = Complex64::new(0.0, 0.0);
            }
            touched.clear();
            cols.push(out);
        }
        CMat { dim: self.dim, cols }
    }

    /// `<u_s| M |w_t>` for every sketch pair, row-major in `(s, t)`.
    pub fn features(&self, sketch: &Sketch) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); sketch.len()];
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        for t in 0..sketch.cols {
            y.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            let w = sketch.w(t);
            for (j, col) in self.cols.iter().enumerate() {
                for &(i, m) in col {
                    y[i as usize] += m * w[j];
                }
            }
            for s in 0..sketch.rows {
                out[s * sketch.cols + t] = sketch.u(s).iter().zip(&y).map(|(u, z)| u.conj() * z).sum();
            }
        }
        out
    }
}

/// Random left vectors `u_s` and right vectors `w_t` defining the linear
/// functionals `M -> <u_s|M|w_t>`. For generic vectors the functionals are
/// injective on any span of dimension below their number.
#[derive(Debug, Clone)]
pub struct Sketch {
    dim: usize,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    rows: usize,
    cols: usize,
}

impl Sketch {
    /// At least `size` functionals on `dim x dim` matrices.
    pub fn new(dim: usize, size: usize, seed: u64) -> Sketch {
        let rows = (size as f64).sqrt().ceil().max(1.0) as usize;
        let cols = size.div_ceil(rows).max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |k: usize| (0..k).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>();
        let left = draw(rows * dim);
        let right = draw(cols * dim);
        Sketch { dim, left, right, rows, cols }
    }

    fn u(&self, s: usize) -> &[Complex64] {
        &self.left[s * self.dim..(s + 1) * self.dim]
    }

    fn w(&self, t: usize) -> &[Complex64] {
        &self.right[t * self.dim..(t + 1) * self.dim]
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Range of a region projector, spanned by normalized regular-orbit vectors.
#[derive(Debug, Clone)]
pub struct RegionSpace {
    scope: Scope,
    dec: OrbitDecomposition,
    /// basis index of each orbit, `u32::MAX` for non-regular orbits
    basis_of_orbit: Vec<u32>,
    /// orbit id of each basis vector
    orbit_of_basis: Vec<usize>,
    roots: Vec<Complex64>,
}

impl RegionSpace {
    pub fn new(model: &Model, region: &Region) -> Result<RegionSpace, LtoError> {
        let scope = region_scope(model, region)?;
        RegionSpace::from_scope(model, scope)
    }

    pub fn from_scope(model: &Model, scope: Scope) -> Result<RegionSpace, LtoError> {
        let dec = decompose(model, &scope)?;
        let mut basis_of_orbit = vec![u32::MAX; dec.orbits.len()];
        let mut orbit_of_basis = Vec::new();
        for (k, o) in dec.orbits.iter().enumerate() {
            if o.regular {
                basis_of_orbit[k] = orbit_of_basis.len() as u32;
                orbit_of_basis.push(k);
            }
        }
        let den = dec.den;
        let roots = (0..den)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / den as f64))
            .collect();
        Ok(RegionSpace { scope, dec, basis_of_orbit, orbit_of_basis, roots })
    }

    pub fn dim(&self) -> usize {
        self.orbit_of_basis.len()
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn decomposition(&self) -> &OrbitDecomposition {
        &self.dec
    }

    fn root(&self, e: u64) -> Complex64 {
        self.roots[(e % self.dec.den) as usize]
    }

    /// Basis index and coefficient `phi(k)/sqrt|O|` of a flat coloring.
    fn coefficient(&self, flat: usize) -> Option<(u32, Complex64)> {
        let o = self.dec.orbit_of[flat] as usize;
        let b = self.basis_of_orbit[o];
        (b != u32::MAX).then(|| {
            let size = self.dec.orbits[o].elements.len() as f64;
            (b, self.root(self.dec.label[flat]) / size.sqrt())
        })
    }

    /// `V^dagger x V` for a monomial operator `x` given by `act` (which
    /// receives a coloring and a copy to overwrite, and returns a phase
    /// exponent or `None` to annihilate), together with the largest norm of
    /// `(1 - p) x v_j` over basis vectors.
    pub fn compress(&self, mut act: impl FnMut(&[Elem], &mut Coloring) -> Option<u64>) -> (CMat, f64) {
        let mut cols = Vec::with_capacity(self.dim());
        let mut leak: f64 = 0.0;
        let mut out: Coloring = Vec::new();
        let mut c: Coloring = Vec::new();
        let mut images: Vec<(Option<(u32, usize, Complex64)>, Complex64)> = Vec::new();
        for &o in &self.orbit_of_basis {
            let mut col: BTreeMap<u32, Complex64> = BTreeMap::new();
            images.clear();
            for &(k, _) in &self.dec.orbits[o].elements {
                if c.is_empty() {
                    c = self.dec.flats.get(k);
                } else {
                    self.dec.flats.fill(k, &mut c);
                }
                out.clear();
                out.extend_from_slice(&c);
                let Some(e) = act(&c, &mut out) else { continue };
                let (_, ck) = self.coefficient(k).expect("member of a regular orbit");
                let amp = ck * self.root(e);
                let target = self.dec.flats.position(&out).and_then(|j| self.coefficient(j).map(|(b, cj)| (b, j, cj)));
                if let Some((b, _, cj)) = target {
                    *col.entry(b).or_default() += cj.conj() * amp;
                }
                images.push((target, amp));
            }
            // residual of x v_j after projecting onto the span, summed term by term
            let mut res2 = 0.0;
            let mut touched: BTreeMap<u32, usize> = BTreeMap::new();
            for &(target, amp) in &images {
                match target {
                    Some((b, _, cj)) => {
                        res2 += (amp - col[&b] * cj).norm_sqr();
                        *touched.entry(b).or_default() += 1;
                    }
                    None => res2 += amp.norm_sqr(),
                }
            }
            for (b, t) in touched {
                let size = self.dec.orbits[self.orbit_of_basis[b as usize]].elements.len();
                res2 += col[&b].norm_sqr() * (size - t) as f64 / size as f64;
            }
            leak = leak.max(res2.sqrt());
            cols.push(col.into_iter().filter(|(_, z)| z.norm_sqr() > 1e-30).collect());
        }
        (CMat { dim: self.dim(), cols }, leak)
    }

    /// Compressions of the matrix units `|a><b|` on the classes `local`
    /// (all other edges untouched), keyed by the mixed-radix indices of `a`
    /// and `b`. When `select` is given only those pairs are built.
    pub fn compress_units(&self, n: usize, local: &[usize], select: Option<&HashSet<(u64, u64)>>) -> BTreeMap<(u64, u64), BTreeMap<(u32, u32), Complex64>> {
        let mut groups: BTreeMap<Coloring, Vec<(u64, u32, Complex64)>> = BTreeMap::new();
        for &o in &self.orbit_of_basis {
            for &(k, _) in &self.dec.orbits[o].elements {
                let c = self.dec.flats.get(k);
                let mut rest = c.clone();
                let mut a = 0u64;
                for (p, &class) in local.iter().enumerate() {
                    a += c[class] as u64 * (n as u64).pow(p as u32);
                    rest[class] = 0;
                }
                let (b, ck) = self.coefficient(k).expect("member of a regular orbit");
                groups.entry(rest).or_default().push((a, b, ck));
            }
        }
        let mut out: BTreeMap<(u64, u64), BTreeMap<(u32, u32), Complex64>> = BTreeMap::new();
        for members in groups.values() {
            for &(a, i, ci) in members {
                for &(b, j, cj) in members {
                    if select.is_some_and(|s| !s.contains(&(a, b))) {
                        continue;
                    }
                    *out.entry((a, b)).or_default().entry((i, j)).or_default() += ci.conj() * cj;
                }
            }
        }
        out
    }
}

fn sparse_features(entries: &BTreeMap<(u32, u32), Complex64>, sketch: &Sketch) -> Vec<Complex64> {
    (0..sketch.len())
        .map(|k| {
            let (u, w) = (sketch.u(k / sketch.cols), sketch.w(k % sketch.cols));
            entries.iter().map(|(&(i, j), &m)| u[i as usize].conj() * m * w[j as usize]).sum()
        })
        .collect()
}

/// Rank, singular values and an orthonormal row-space basis of a feature
/// matrix (rows are operators).
#[derive(Debug, Clone)]
struct RowSpace {
    rank: usize,
    sigma: Vec<f64>,
    basis: Vec<Vec<Complex64>>,
}

fn row_space(rows: &[Vec<Complex64>], width: usize, threshold: f64) -> RowSpace {
    if rows.is_empty() {
        return RowSpace { rank: 0, sigma: Vec::new(), basis: Vec::new() };
    }
    let m = DMatrix::from_fn(rows.len(), width, |i, j| rows[i][j]);
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut sigma: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if top > 0.0 && s > threshold * top {
            basis.push((0..width).map(|j| v_t[(k, j)]).collect());
        }
    }
    sigma.sort_by(|a, b| b.total_cmp(a));
    RowSpace { rank: basis.len(), sigma, basis }
}

/// Largest relative distance of a row from the span of an orthonormal basis.
fn residual(rows: &[Vec<Complex64>], basis: &[Vec<Complex64>]) -> f64 {
    let mut worst: f64 = 0.0;
    for r in rows {
        let norm: f64 = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let mut d = r.clone();
        for q in basis {
            let coef: Complex64 = q.iter().zip(r).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in d.iter_mut().zip(q) {
                *x -= coef * a;
            }
        }
        let rest: f64 = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(rest / norm);
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtoConfig {
    pub tolerance: f64,
    pub rank_threshold: f64,
    pub sample_limit: usize,
    pub seed: u64,
    /// initial number of sketch pairs; doubled while a span fills it
    pub sketch_size: usize,
    pub max_algebra_dim: usize,
}

impl Default for LtoConfig {
    fn default() -> LtoConfig {
        LtoConfig {
            tolerance: DEFAULT_TOLERANCE,
            rank_threshold: DEFAULT_RANK_THRESHOLD,
            sample_limit: DEFAULT_SAMPLE_LIMIT,
            seed: 0,
            sketch_size: 48,
            max_algebra_dim: 2048,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanRanks {
    pub first: usize,
    pub second: usize,
    pub union: usize,
    pub sketch_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LtoReport {
    pub axiom: String,
    pub regions: Vec<RegionFile>,
    pub verdict: Verdict,
    pub deviation: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub exhaustive: bool,
    pub operators_checked: usize,
    /// dimension of the range of each region projector involved
    pub projector_ranks: Vec<usize>,
    pub ranks: Option<SpanRanks>,
    pub witnesses: Vec<String>,
}

impl LtoReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// The spanning operators `|a><b| = L_{ab^-1} P_b` of a region algebra,
/// exhaustive when there are at most `limit` of them.
fn unit_selection(n: usize, k: usize, cfg: &LtoConfig) -> (Option<HashSet<(u64, u64)>>, bool, usize) {
    let total = (n as f64).powi(2 * k as i32);
    if total <= cfg.sample_limit as f64 {
        return (None, true, total as usize);
    }
    let side = (n as u64).pow(k as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut chosen = HashSet::new();
    while chosen.len() < cfg.sample_limit {
        chosen.insert((rng.gen_range(0..side), rng.gen_range(0..side)));
    }
    (Some(chosen), false, cfg.sample_limit)
}

fn interval_of(model: &Model, lam: &Region, delta: &Region) -> Result<Relation, LtoError> {
    Ok(surrounded(model.lattice(), lam, delta)?)
}

fn check_size(model: &Model, region: &Region) -> Result<(), LtoError> {
    // exact enumeration of flat colorings is exponential in the edge count
    let n = model.group().order() as f64;
    let bound = n.powi(region.edges().len() as i32 - region.faces_inside(model.lattice()).len() as i32);
    if bound > 1e8 {
        return Err(LtoError::TooLarge { what: "flat coloring count".into(), limit: 100_000_000 });
    }
    Ok(())
}

/// LTO1: `p_D x p_D` is a multiple of `p_D` for every `x` supported on a
/// completely surrounded region.
pub fn check_lto1(model: &Model, lam: &Region, delta: &Region, cfg: &LtoConfig) -> Result<LtoReport, LtoError> {
    match interval_of(model, lam, delta)? {
        Relation::CompletelySurrounded => {}
        other => return Err(LtoError::PreconditionNotSurrounded(format!("expected completely surrounded, found {}", other.name()))),
    }
    check_size(model, delta)?;
    let space = RegionSpace::new(model, delta)?;
    let local: Vec<usize> = lam.edges().iter().copied().collect();
    let n = model.group().order();
    let (select, exhaustive, count) = unit_selection(n, local.len(), cfg);
    let units = space.compress_units(n, &local, select.as_ref());
    let r = space.dim() as f64;
    let mut deviation: f64 = 0.0;
    let mut witnesses = Vec::new();
    let mut keys: Vec<&(u64, u64)> = units.keys().collect();
    keys.sort_unstable();
    for key in keys {
        let m = &units[key];
        let trace: Complex64 = (0..space.dim() as u32).filter_map(|i| m.get(&(i, i))).sum();
        let norm2: f64 = m.values().map(|z| z.norm_sqr()).sum();
        let res = ((norm2 - trace.norm_sqr() / r).max(0.0) / r).sqrt();
        if res > deviation {
            deviation = res;
            if res >= cfg.tolerance {
                witnesses = vec![format!("matrix unit (a={}, b={}) leaves residual {res:e}", key.0, key.1)];
            }
        }
    }
    Ok(LtoReport {
        axiom: "LTO1".into(),
        regions: vec![lam.to_file(), delta.to_file()],
        verdict: Verdict::from(deviation < cfg.tolerance),
        deviation,
        tolerance: cfg.tolerance,
        seed: cfg.seed,
        exhaustive,
        operators_checked: count,
        projector_ranks: vec![space.dim()],
        ranks: None,
        witnesses,
    })
}

/// The scalar `c` with `p_D x p_D = c p_D` for one local operator.
pub fn lto1_scalar(model: &Model, lam: &Region, delta: &Region, x: &LocalOperator) -> Result<Complex64, LtoError> {
    let space = RegionSpace::new(model, delta)?;
    if !x.is_supported_in(lam) {
        return Err(LtoError::PreconditionNotSurrounded("operator leaves the region".into()));
    }
    let group = model.group().clone();
    let (m, _) = space.compress(|c, out| {
        let y = x.apply(&group, c)?;
        out.copy_from_slice(&y);
        Some(0)
    });
    let trace: Complex64 = m.cols.iter().enumerate().flat_map(|(j, col)| col.iter().filter(move |(i, _)| *i as usize == j)).map(|(_, z)| *z).sum();
    Ok(trace / space.dim() as f64)
}

/// Features of `p_D A(lam) p_D` in the space of `delta`.
fn local_features(space: &RegionSpace, n: usize, lam: &Region, sketch: &Sketch, cfg: &LtoConfig) -> (Vec<Vec<Complex64>>, bool, usize) {
    let local: Vec<usize> = lam.edges().iter().copied().collect();
    let (select, exhaustive, count) = unit_selection(n, local.len(), cfg);
    let units = space.compress_units(n, &local, select.as_ref());
    let mut keys: Vec<&(u64, u64)> = units.keys().collect();
    keys.sort_unstable();
    (keys.into_iter().map(|k| sparse_features(&units[k], sketch)).collect(), exhaustive, count)
}

/// A basis of the algebra generated by compressed generators, as words
/// `(generator, parent word)` with their matrices and sketch features.
struct Closure {
    words: Vec<Option<(usize, usize)>>,
    mats: Vec<CMat>,
    features: Vec<Vec<Complex64>>,
}

fn algebra_closure(gens: &[CMat], dim: usize, sketch: &Sketch, cfg: &LtoConfig) -> Result<Closure, LtoError> {
    let mut closure = Closure { words: vec![None], mats: vec![CMat::identity(dim)], features: Vec::new() };
    let mut ortho: Vec<Vec<Complex64>> = Vec::new();
    let admit = |f: &[Complex64], ortho: &mut Vec<Vec<Complex64>>| -> bool {
        let norm: f64 = f.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return false;
        }
        let mut d = f.to_vec();
        for _ in 0..2 {
            for q in ortho.iter() {
                let coef: Complex64 = q.iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in d.iter_mut().zip(q) {
                    *x -= coef * a;
                }
            }
        }
        let rest: f64 = d.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if rest / norm <= cfg.rank_threshold {
            return false;
        }
        ortho.push(d.into_iter().map(|z| z / rest).collect());
        true
    };
    let f0 = closure.mats[0].features(sketch);
    admit(&f0, &mut ortho);
    closure.features.push(f0);
    let mut next = 0;
    while next < closure.mats.len() {
        for (gi, g) in gens.iter().enumerate() {
            let cand = g.mul(&closure.mats[next]);
            let f = cand.features(sketch);
            if admit(&f, &mut ortho) {
                if closure.mats.len() >= cfg.max_algebra_dim {
                    return Err(LtoError::TooLarge { what: "boundary algebra dimension".into(), limit: cfg.max_algebra_dim });
                }
                closure.words.push(Some((gi, next)));
                closure.mats.push(cand);
                closure.features.push(f);
            }
        }
        next += 1;
    }
    Ok(closure)
}

fn compress_generators(model: &Model, space: &RegionSpace, set: &BoundaryGeneratorSet) -> (Vec<CMat>, f64) {
    let mut leak: f64 = 0.0;
    let mats = (0..set.len())
        .map(|k| {
            let (m, l) = space.compress(|c, out| set.act(model, k, c, out));
            leak = leak.max(l);
            m
        })
        .collect();
    (mats, leak)
}

fn sketch_seed(cfg: &LtoConfig, round: u32) -> u64 {
    cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(round as u64 + 1)
}

fn surrounded_with_interval(model: &Model, lam: &Region, delta: &Region) -> Result<(Vec<BoundaryEdge>, Option<BoundaryKind>), LtoError> {
    match interval_of(model, lam, delta)? {
        Relation::CompletelySurrounded => Ok((Vec::new(), None)),
        Relation::Surrounded { interval, kind } => Ok((interval, Some(kind))),
        Relation::Neither => Err(LtoError::PreconditionNotSurrounded("region is not surrounded".into())),
    }
}

/// LTO2: `p_D A(lam) p_D` equals the boundary algebra times `p_D`.
pub fn check_lto2(model: &Model, lam: &Region, delta: &Region, cfg: &LtoConfig) -> Result<LtoReport, LtoError> {
    let (interval, kind) = surrounded_with_interval(model, lam, delta)?;
    if kind == Some(BoundaryKind::Rough) && !sufficiently_large(model.lattice(), lam, &interval) {
        return Err(LtoError::NotSufficientlyLarge);
    }
    check_size(model, delta)?;
    let set = BoundaryGeneratorSet::new(model, lam, &interval, kind)?;
    let space = RegionSpace::new(model, delta)?;
    let n = model.group().order();
    let (gens, leak) = compress_generators(model, &space, &set);
    let mut size = cfg.sketch_size;
    let mut round = 0;
    loop {
        let sketch = Sketch::new(space.dim(), size, sketch_seed(cfg, round));
        let (a, exhaustive, count) = local_features(&space, n, lam, &sketch, cfg);
        let closure = algebra_closure(&gens, space.dim(), &sketch, cfg)?;
        let ra = row_space(&a, sketch.len(), cfg.rank_threshold);
        let rd = row_space(&closure.features, sketch.len(), cfg.rank_threshold);
        let both: Vec<Vec<Complex64>> = a.iter().chain(&closure.features).cloned().collect();
        let ru = row_space(&both, sketch.len(), cfg.rank_threshold);
        if ru.rank + 2 > sketch.len() && size < 4 * cfg.max_algebra_dim {
            size *= 2;
            round += 1;
            continue;
        }
        let span_dev = residual(&a, &rd.basis).max(residual(&closure.features, &ra.basis));
        let deviation = span_dev.max(leak);
        let ok = ra.rank == rd.rank && rd.rank == ru.rank && deviation < cfg.tolerance;
        let mut witnesses = Vec::new();
        if !ok {
            witnesses.push(format!("span ranks: local {} boundary {} union {}", ra.rank, rd.rank, ru.rank));
            witnesses.push(format!("generator leakage out of the projector range: {leak:e}"));
        }
        return Ok(LtoReport {
            axiom: "LTO2".into(),
            regions: vec![lam.to_file(), delta.to_file()],
            verdict: Verdict::from(ok),
            deviation,
            tolerance: cfg.tolerance,
            seed: cfg.seed,
            exhaustive,
            operators_checked: count + closure.mats.len(),
            projector_ranks: vec![space.dim()],
            ranks: Some(SpanRanks { first: ra.rank, second: rd.rank, union: ru.rank, sketch_size: sketch.len() }),
            witnesses,
        });
    }
}

/// LTO3: nested regions sharing their interval give the same compressed
/// algebra.
pub fn check_lto3(model: &Model, lam1: &Region, lam2: &Region, delta: &Region, cfg: &LtoConfig) -> Result<LtoReport, LtoError> {
    if !lam1.edges().is_subset(lam2.edges()) {
        return Err(LtoError::PreconditionNotSurrounded("first region is not inside the second".into()));
    }
    let (i1, _) = surrounded_with_interval(model, lam1, delta)?;
    let (i2, _) = surrounded_with_interval(model, lam2, delta)?;
    let edges = |i: &[BoundaryEdge]| i.iter().map(|b| (b.edge, b.kind)).collect::<BTreeSet<_>>();
    if edges(&i1) != edges(&i2) {
        return Err(LtoError::PreconditionNotSurrounded("the regions meet the outer boundary in different intervals".into()));
    }
    check_size(model, delta)?;
    let space = RegionSpace::new(model, delta)?;
    let n = model.group().order();
    let mut size = cfg.sketch_size;
    let mut round = 0;
    loop {
        let sketch = Sketch::new(space.dim(), size, sketch_seed(cfg, round));
        let (a, ex1, c1) = local_features(&space, n, lam1, &sketch, cfg);
        let (b, ex2, c2) = local_features(&space, n, lam2, &sketch, cfg);
        let ra = row_space(&a, sketch.len(), cfg.rank_threshold);
        let rb = row_space(&b, sketch.len(), cfg.rank_threshold);
        let both: Vec<Vec<Complex64>> = a.iter().chain(&b).cloned().collect();
        let ru = row_space(&both, sketch.len(), cfg.rank_threshold);
        if ru.rank + 2 > sketch.len() && size < 4 * cfg.max_algebra_dim {
            size *= 2;
            round += 1;
            continue;
        }
        let deviation = residual(&a, &rb.basis).max(residual(&b, &ra.basis));
        let ok = ra.rank == rb.rank && rb.rank == ru.rank && deviation < cfg.tolerance;
        let mut witnesses = Vec::new();
        if !ok {
            witnesses.push(format!("span ranks: inner {} outer {} union {}", ra.rank, rb.rank, ru.rank));
        }
        return Ok(LtoReport {
            axiom: "LTO3".into(),
            regions: vec![lam1.to_file(), lam2.to_file(), delta.to_file()],
            verdict: Verdict::from(ok),
            deviation,
            tolerance: cfg.tolerance,
            seed: cfg.seed,
            exhaustive: ex1 && ex2,
            operators_checked: c1 + c2,
            projector_ranks: vec![space.dim()],
            ranks: Some(SpanRanks { first: ra.rank, second: rb.rank, union: ru.rank, sketch_size: sketch.len() }),
            witnesses,
        });
    }
}

/// LTO4: `x -> x p_{D2}` is injective on the compressed algebra of `D1`.
pub fn check_lto4(model: &Model, lam: &Region, delta1: &Region, delta2: &Region, cfg: &LtoConfig) -> Result<LtoReport, LtoError> {
    if !delta1.edges().is_subset(delta2.edges()) {
        return Err(LtoError::PreconditionNotSurrounded("inner region is not inside the outer region".into()));
    }
    let (interval, kind) = surrounded_with_interval(model, lam, delta1)?;
    let (interval2, _) = surrounded_with_interval(model, lam, delta2)?;
    let edges = |i: &[BoundaryEdge]| i.iter().map(|b| (b.edge, b.kind)).collect::<BTreeSet<_>>();
    if edges(&interval) != edges(&interval2) {
        return Err(LtoError::PreconditionNotSurrounded("the two outer regions meet the region in different intervals".into()));
    }
    if kind == Some(BoundaryKind::Rough) && !sufficiently_large(model.lattice(), lam, &interval) {
        return Err(LtoError::NotSufficientlyLarge);
    }
    check_size(model, delta2)?;
    let set = BoundaryGeneratorSet::new(model, lam, &interval, kind)?;
    let s1 = RegionSpace::new(model, delta1)?;
    let s2 = RegionSpace::new(model, delta2)?;
    let (g1, leak1) = compress_generators(model, &s1, &set);
    let (g2, leak2) = compress_generators(model, &s2, &set);
    let mut size = cfg.sketch_size;
    let mut round = 0;
    loop {
        let k1 = Sketch::new(s1.dim(), size, sketch_seed(cfg, round));
        let k2 = Sketch::new(s2.dim(), size, sketch_seed(cfg, round) ^ 0x5555);
        let closure = algebra_closure(&g1, s1.dim(), &k1, cfg)?;
        if closure.mats.len() + 2 > k1.len() && size < 4 * cfg.max_algebra_dim {
            size *= 2;
            round += 1;
            continue;
        }
        // the same words evaluated in the larger region
        let mut mats2: Vec<CMat> = Vec::with_capacity(closure.words.len());
        for w in &closure.words {
            mats2.push(match w {
                None => CMat::identity(s2.dim()),
                Some((g, parent)) => g2[*g].mul(&mats2[*parent]),
            });
        }
        let f2: Vec<Vec<Complex64>> = mats2.iter().map(|m| m.features(&k2)).collect();
        let r2 = row_space(&f2, k2.len(), cfg.rank_threshold);
        let words = closure.mats.len();
        let sigma_ratio = match (r2.sigma.first(), r2.sigma.get(words.saturating_sub(1))) {
            (Some(&top), Some(&low)) if top > 0.0 => low / top,
            _ => 0.0,
        };
        let deviation = leak1.max(leak2);
        let ok = r2.rank == words && deviation < cfg.tolerance;
        let mut witnesses = vec![format!("sigma_min/sigma_max of the restricted algebra: {sigma_ratio:e}")];
        if !ok {
            witnesses.push(format!("algebra dimension {words}, rank after multiplying by the outer projector {}", r2.rank));
        }
        return Ok(LtoReport {
            axiom: "LTO4".into(),
            regions: vec![lam.to_file(), delta1.to_file(), delta2.to_file()],
            verdict: Verdict::from(ok),
            deviation,
            tolerance: cfg.tolerance,
            seed: cfg.seed,
            exhaustive: true,
            operators_checked: words,
            projector_ranks: vec![s1.dim(), s2.dim()],
            ranks: Some(SpanRanks { first: words, second: r2.rank, union: words, sketch_size: k2.len() }),
            witnesses,
        });
    }
}

/// Largest deviation from exact commutation between a boundary generator and
/// the vertex and face projectors of the region, checked on sampled basis
/// colorings of the region with exact amplitudes.
pub fn generator_commutation_defect(
    model: &Model,
    set: &BoundaryGeneratorSet,
    delta: &Region,
    samples: usize,
    seed: u64,
) -> Result<usize, LtoError> {
    use crate::operators::State;
    let scope = region_scope(model, delta)?;
    let group = model.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let apply_gen = |k: usize, s: &State| -> State {
        let mut out = State::zero();
        for (c, amp) in s.iter() {
            let mut y = c.clone();
            if let Some(e) = set.act(model, k, c, &mut y) {
                out.add(y, &amp.mul_phase(model.phase_from_exp(e)));
            }
        }
        out
    };
    let mut bad = 0;
    for _ in 0..samples {
        let mut c = vec![group.identity(); model.num_edges()];
        for &e in scope.edges() {
            c[e] = rng.gen_range(0..group.order()) as Elem;
        }
        let s = State::basis(c);
        for k in 0..set.len() {
            for &v in scope.vertices() {
                let ab = model.apply_vertex_projector(v, &apply_gen(k, &s));
                let ba = apply_gen(k, &model.apply_vertex_projector(v, &s));
                bad += usize::from(ab != ba);
            }
            for &f in scope.faces() {
                let ab = model.apply_face_projector(f, &apply_gen(k, &s));
                let ba = apply_gen(k, &model.apply_face_projector(f, &s));
                bad += usize::from(ab != ba);
            }
        }
    }
    Ok(bad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlReport {
    pub error_weight: usize,
    pub operators: usize,
    pub pairs: usize,
    pub code_dimension: usize,
    pub verdict: Verdict,
    pub deviation: f64,
    pub tolerance: f64,
    pub witness: Option<String>,
}

/// Knill-Laflamme: `P E_a^dagger E_b P = c_ab P` for all products `E` of
/// `L_g P_h` on at most `weight` edges, evaluated on the orthonormal orbit
/// basis of the ground space.
pub fn check_knill_laflamme(model: &Model, weight: usize, cap: u128, tolerance: f64) -> Result<KlReport, LtoError> {
    if model.lattice().mode() != Mode::Closed {
        return Err(LtoError::NotClosed);
    }
    let group = model.group();
    let n = group.order();
    let m = model.num_edges();
    let dim = (n as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if dim > cap {
        return Err(LtoError::DimensionCapExceeded { dim, cap });
    }
    let weight = weight.min(m);
    let mut count: f64 = 0.0;
    let mut binom = 1.0;
    for k in 0..=weight {
        if k > 0 {
            binom = binom * (m - k + 1) as f64 / k as f64;
        }
        count += binom * (n as f64).powi(2 * k as i32);
    }
    const LIMIT: usize = 20_000;
    if count > LIMIT as f64 {
        return Err(LtoError::TooLarge { what: "error operator count".into(), limit: LIMIT });
    }
    let mut ops: Vec<LocalOperator> = Vec::new();
    let mut subset = Vec::new();
    enumerate_errors(group, m, weight, 0, &mut subset, &mut ops);

    let basis = ground_state_basis(model)?;
    let psis: Vec<BTreeMap<Coloring, Complex64>> = basis
        .orbits
        .iter()
        .map(|o| {
            let norm = (o.elements.len() as f64).sqrt();
            o.elements
                .iter()
                .map(|(c, p)| {
                    let [num, d] = p.as_pair();
                    let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * num as f64 / d as f64);
                    (c.clone(), z / norm)
                })
                .collect()
        })
        .collect();
    let images: Vec<Vec<BTreeMap<Coloring, Complex64>>> = ops
        .iter()
        .map(|op| {
            psis.iter()
                .map(|psi| psi.iter().filter_map(|(c, &z)| op.apply(group, c).map(|y| (y, z))).collect())
                .collect()
        })
        .collect();
    let inner = |a: &BTreeMap<Coloring, Complex64>, b: &BTreeMap<Coloring, Complex64>| -> Complex64 {
        let (small, large, flip) = if a.len() <= b.len() { (a, b, false) } else { (b, a, true) };
        let s: Complex64 = small.iter().filter_map(|(k, x)| large.get(k).map(|y| if flip { y.conj() * x } else { x.conj() * y })).sum();
        s
    };
    let k = psis.len();
    let mut deviation: f64 = 0.0;
    let mut witness = None;
    for (ia, ea) in images.iter().enumerate() {
        for (ib, eb) in images.iter().enumerate() {
            let mut diag = Vec::with_capacity(k);
            let mut worst: f64 = 0.0;
            for i in 0..k {
                for j in 0..k {
                    let z = inner(&ea[i], &eb[j]);
                    if i == j {
                        diag.push(z);
                    } else {
                        worst = worst.max(z.norm());
                    }
                }
            }
            let mean: Complex64 = diag.iter().sum::<Complex64>() / k.max(1) as f64;
            for z in &diag {
                worst = worst.max((z - mean).norm());
            }
            if worst > deviation {
                deviation = worst;
                if worst >= tolerance {
                    witness = Some(format!("errors {:?} and {:?} violate the condition by {worst:e}", describe(&ops[ia]), describe(&ops[ib])));
                }
            }
        }
    }
    Ok(KlReport {
        error_weight: weight,
        operators: ops.len(),
        pairs: ops.len() * ops.len(),
        code_dimension: k,
        verdict: Verdict::from(deviation < tolerance),
        deviation,
        tolerance,
        witness,
    })
}

fn describe(op: &LocalOperator) -> Vec<(usize, Elem, Elem)> {
    op.proj_part.iter().map(|(&k, &h)| (k, op.left_part.get(&k).copied().unwrap_or(0), h)).collect()
}

fn enumerate_errors(group: &FiniteGroup, m: usize, weight: usize, start: usize, subset: &mut Vec<usize>, out: &mut Vec<LocalOperator>) {
    // every assignment of (g, h) to the chosen edges
    let n = group.order();
    let k = subset.len();
    let total = n.pow(2 * k as u32);
    for code in 0..total {
        let mut op = LocalOperator::default();
        let mut x = code;
        for &e in subset.iter() {
            let g = (x % n) as Elem;
            x /= n;
            let h = (x % n) as Elem;
            x /= n;
            if g != group.identity() {
                op.left_part.insert(e, g);
            }
            op.proj_part.insert(e, h);
        }
        if k > 0 || out.is_empty() {
            out.push(op);
        }
    }
    if k == weight {
        return;
    }
    for e in start..m {
        subset.push(e);
        enumerate_errors(group, m, weight, e + 1, subset, out);
        subset.pop();
    }
}
