//! Task runner behind the `twistedqd` command: resolves group, cocycle,
//! lattice and region descriptions, runs one computation and produces a
//! deterministic JSON report.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;
use twistedqd::cohomology::{builtin_cocycle, parse_cocycle_json, CheckMode, Cocycle3, CohomologyError};
use twistedqd::group::{build_group, parse_group_json, FiniteGroup, GroupError};
use twistedqd::groundstate::{export_basis, ground_state_basis, ground_state_dimension, topological_invariance_check, verify_ground_state, GroundStateError};
use twistedqd::lattice::{builtin_lattice, parse_lattice_json, LatticeError, PatchGeometry, SurfaceLattice};
use twistedqd::lto::{check_knill_laflamme, check_lto1, check_lto2, check_lto3, check_lto4, LtoConfig, LtoError, Verdict, DEFAULT_CAP};
use twistedqd::operators::Model;
use twistedqd::region::{block_region, parse_region_json, BoundaryKind, Region, RegionError, Sides};
use twistedqd::spec::{group_spec, parse_term, Term};

pub const REPORT_SCHEMA_VERSION: &str = "1.0.0";

/// Environment variable naming the directory for reports when no output
/// path is given.
pub const OUT_DIR_ENV: &str = "TWISTEDQD_OUT_DIR";

pub fn report_schema_version() -> &'static str {
    REPORT_SCHEMA_VERSION
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Validate,
    GsDim,
    GsBasis,
    Lto,
    Qecc,
    Invariance,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Validate => "validate",
            Task::GsDim => "gs-dim",
            Task::GsBasis => "gs-basis",
            Task::Lto => "lto",
            Task::Qecc => "qecc",
            Task::Invariance => "invariance",
        }
    }
}

/// One invocation. Group, cocycle and lattice are family expressions such
/// as `dihedral(3)` or paths to JSON files (anything ending in `.json`).
/// Regions are `block(x0,y0,x1,y1)` on a `square_patch`, optionally
/// followed by four side kinds (bottom, right, top, left), or region files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub task: Option<Task>,
    pub axiom: Option<u8>,
    pub group: Option<String>,
    pub cocycle: Option<String>,
    pub lattice: Option<String>,
    /// second lattice for the invariance task
    pub lattice2: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<String>,
    pub weight: Option<usize>,
    pub out: Option<PathBuf>,
    pub cap: Option<u64>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
    /// directory that relative file paths are resolved against
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<RunManifest, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("manifest: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunManifest, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("manifest {}: {e}", path.display())))?;
        let mut m = RunManifest::from_json(&text)?;
        m.base_dir = path.parent().map(Path::to_path_buf);
        Ok(m)
    }

    /// Fields set in `over` replace those of `self`.
    pub fn merge(mut self, over: RunManifest) -> RunManifest {
        macro_rules! take {
            ($($f:ident),*) => {$(if over.$f.is_some() { self.$f = over.$f; })*};
        }
        take!(task, axiom, group, cocycle, lattice, lattice2, weight, out, cap, tolerance, seed, base_dir);
        if !over.regions.is_empty() {
            self.regions = over.regions;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    /// bad or missing input; exit status 2
    #[error("usage: {0}")]
    Usage(String),
    /// inputs parsed but are mathematically invalid; exit status 1
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Invalid(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub task: String,
    pub inputs: Value,
    pub status: Status,
    #[serde(flatten)]
    pub result: Map<String, Value>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Pass => 0,
            Status::Fail => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn group_error(what: &str, e: GroupError) -> CliError {
    match e {
        GroupError::Malformed(_) | GroupError::UnknownFamily(_) | GroupError::BadParams { .. } => CliError::Usage(format!("{what}: {e}")),
        _ => CliError::Invalid(format!("{what}: {e}")),
    }
}

fn cocycle_error(e: CohomologyError) -> CliError {
    match e {
        CohomologyError::Malformed(_) | CohomologyError::UnknownFamily(_) | CohomologyError::BadParams(_) => CliError::Usage(format!("cocycle: {e}")),
        _ => CliError::Invalid(format!("cocycle: {e}")),
    }
}

fn lattice_error(what: &str, e: LatticeError) -> CliError {
    match e {
        LatticeError::Malformed(_) | LatticeError::UnknownFamily(_) | LatticeError::BadParams(..) => CliError::Usage(format!("{what}: {e}")),
        _ => CliError::Invalid(format!("{what}: {e}")),
    }
}

fn region_error(what: &str, e: RegionError) -> CliError {
    match e {
        RegionError::BoundaryMarker { .. } | RegionError::OpenBoundary(_) => CliError::Invalid(format!("{what}: {e}")),
        _ => CliError::Usage(format!("{what}: {e}")),
    }
}

fn lto_error(e: LtoError) -> CliError {
    match e {
        LtoError::GroundState(_) => CliError::Invalid(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    }
}

fn gs_error(e: GroundStateError) -> CliError {
    CliError::Invalid(e.to_string())
}

fn is_file_ref(s: &str) -> bool {
    s.trim_end().ends_with(".json")
}

struct Inputs<'a> {
    manifest: &'a RunManifest,
}

impl Inputs<'_> {
    fn read(&self, what: &str, path: &str) -> Result<String, CliError> {
        let p = Path::new(path.trim());
        let full = match &self.manifest.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        };
        fs::read_to_string(&full).map_err(|e| CliError::Usage(format!("{what} file {}: {e}", full.display())))
    }

    fn required<'b>(&self, what: &str, v: &'b Option<String>) -> Result<&'b str, CliError> {
        v.as_deref().ok_or_else(|| CliError::Usage(format!("missing field `{what}` for task {}", self.task_name())))
    }

    fn task_name(&self) -> &'static str {
        self.manifest.task.map_or("(none)", Task::name)
    }

    fn group(&self) -> Result<Arc<FiniteGroup>, CliError> {
        let src = self.required("group", &self.manifest.group)?;
        let g = if is_file_ref(src) {
            parse_group_json(&self.read("group", src)?).map_err(|e| group_error("group", e))?
        } else {
            let t = parse_term(src).map_err(|e| CliError::Usage(format!("group: {e}")))?;
            let spec = group_spec(&t).map_err(|e| CliError::Usage(format!("group: {e}")))?;
            build_group(&spec).map_err(|e| group_error("group", e))?
        };
        Ok(Arc::new(g))
    }

    fn cocycle(&self, g: Arc<FiniteGroup>) -> Result<Cocycle3, CliError> {
        let src = self.manifest.cocycle.as_deref().unwrap_or("trivial");
        if is_file_ref(src) {
            let file = parse_cocycle_json(&self.read("cocycle", src)?).map_err(cocycle_error)?;
            return file.into_cocycle(g, CheckMode::Exhaustive).map_err(cocycle_error);
        }
        let t = parse_term(src).map_err(|e| CliError::Usage(format!("cocycle: {e}")))?;
        let (name, params) = family(&t).ok_or_else(|| CliError::Usage(format!("cocycle: `{t}` is not a family expression")))?;
        builtin_cocycle(g, name, &params).map_err(cocycle_error)
    }

    fn lattice(&self, what: &str, src: &str) -> Result<(SurfaceLattice, Option<PatchGeometry>), CliError> {
        if is_file_ref(src) {
            let l = parse_lattice_json(&self.read(what, src)?).map_err(|e| lattice_error(what, e))?;
            return Ok((l, None));
        }
        let t = parse_term(src).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
        let (name, params) = family(&t).ok_or_else(|| CliError::Usage(format!("{what}: `{t}` is not a family expression")))?;
        let l = builtin_lattice(name, &params).map_err(|e| lattice_error(what, e))?;
        let geom = match (name, params.as_slice()) {
            ("square_patch", &[w, h]) => Some(PatchGeometry { w: w as usize, h: h as usize }),
            _ => None,
        };
        Ok((l, geom))
    }

    fn regions(&self, l: &SurfaceLattice, geom: Option<PatchGeometry>) -> Result<Vec<Region>, CliError> {
        self.manifest
            .regions
            .iter()
            .enumerate()
            .map(|(i, src)| {
                let what = format!("region {}", i + 1);
                if is_file_ref(src) {
                    return parse_region_json(l, &self.read(&what, src)?).map_err(|e| region_error(&what, e));
                }
                let t = parse_term(src).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
                let geom = geom.ok_or_else(|| CliError::Usage(format!("{what}: block regions need a square_patch lattice")))?;
                let (corners, sides) = block_args(&t).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
                block_region(l, geom, corners.0, corners.1, sides).map_err(|e| region_error(&what, e))
            })
            .collect()
    }
}

fn family(t: &Term) -> Option<(&str, Vec<i64>)> {
    Some((t.name()?, t.int_args()?))
}

type Corners = ((usize, usize), (usize, usize));

fn block_args(t: &Term) -> Result<(Corners, Sides), String> {
    let Term::Call { name, args } = t else {
        return Err(format!("`{t}` is not a block expression"));
    };
    if name != "block" || (args.len() != 4 && args.len() != 8) {
        return Err(format!("expected block(x0,y0,x1,y1) or block(x0,y0,x1,y1,bottom,right,top,left), got `{t}`"));
    }
    let mut coords = [0usize; 4];
    for (slot, a) in coords.iter_mut().zip(args) {
        match a {
            Term::Int(n) if *n >= 0 => *slot = *n as usize,
            other => return Err(format!("block coordinate `{other}` must be a nonnegative integer")),
        }
    }
    let kind = |a: &Term| match a.name() {
        Some("smooth") | Some("s") => Ok(BoundaryKind::Smooth),
        Some("rough") | Some("r") => Ok(BoundaryKind::Rough),
        _ => Err(format!("side kind `{a}` must be smooth or rough")),
    };
    let sides = if args.len() == 8 {
        Sides { bottom: kind(&args[4])?, right: kind(&args[5])?, top: kind(&args[6])?, left: kind(&args[7])? }
    } else {
        Sides::all(BoundaryKind::Smooth)
    };
    Ok((((coords[0], coords[1]), (coords[2], coords[3])), sides))
}

fn lto_config(m: &RunManifest) -> LtoConfig {
    let mut cfg = LtoConfig::default();
    if let Some(t) = m.tolerance {
        cfg.tolerance = t;
    }
    if let Some(s) = m.seed {
        cfg.seed = s;
    }
    cfg
}

fn inputs_value(m: &RunManifest) -> Value {
    let mut v = json!({
        "group": m.group,
        "cocycle": m.cocycle.as_deref().unwrap_or("trivial"),
        "lattice": m.lattice,
    });
    let obj = v.as_object_mut().expect("object");
    if let Some(l2) = &m.lattice2 {
        obj.insert("lattice2".into(), json!(l2));
    }
    if !m.regions.is_empty() {
        obj.insert("regions".into(), json!(m.regions));
    }
    if let Some(a) = m.axiom {
        obj.insert("axiom".into(), json!(a));
    }
    if let Some(w) = m.weight {
        obj.insert("weight".into(), json!(w));
    }
    if let Some(c) = m.cap {
        obj.insert("cap".into(), json!(c));
    }
    if let Some(t) = m.tolerance {
        obj.insert("tolerance".into(), json!(t));
    }
    if let Some(s) = m.seed {
        obj.insert("seed".into(), json!(s));
    }
    v
}

fn object(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    }
}

/// Executes the manifest's task and returns its report. `Err` means the
/// task could not run; a report with status `fail` means it ran and the
/// mathematical check failed.
pub fn run(manifest: &RunManifest) -> Result<Report, CliError> {
    let task = manifest.task.ok_or_else(|| CliError::Usage("missing field `task`".into()))?;
    let inp = Inputs { manifest };
    let (status, result) = match task {
        Task::Validate => validate(&inp)?,
        Task::GsDim => {
            let model = model(&inp)?;
            let d = ground_state_dimension(&model).map_err(gs_error)?;
            (
                Status::Pass,
                json!({"dimension": d.dimension, "orbit_count": d.orbit_count, "regular_count": d.regular_count, "flat_count": d.flat_count}),
            )
        }
        Task::GsBasis => {
            let model = model(&inp)?;
            let basis = ground_state_basis(&model).map_err(gs_error)?;
            let verified = verify_ground_state(&model, &basis).is_ok();
            let status = if verified { Status::Pass } else { Status::Fail };
            (status, json!({"dimension": basis.orbits.len(), "verified": verified, "basis": export_basis(&basis)}))
        }
        Task::Lto => lto(&inp)?,
        Task::Qecc => {
            let model = model(&inp)?;
            let cap = manifest.cap.map_or(DEFAULT_CAP, u128::from);
            let tol = manifest.tolerance.unwrap_or(twistedqd::lto::DEFAULT_TOLERANCE);
            let r = check_knill_laflamme(&model, manifest.weight.unwrap_or(1), cap, tol).map_err(lto_error)?;
            let status = if r.verdict == Verdict::Pass { Status::Pass } else { Status::Fail };
            (status, serde_json::to_value(r).expect("report serializes"))
        }
        Task::Invariance => {
            let g = inp.group()?;
            let alpha = inp.cocycle(g)?;
            let src1 = inp.required("lattice", &manifest.lattice)?;
            let src2 = inp.required("lattice2", &manifest.lattice2)?;
            let m1 = Model::new(inp.lattice("lattice", src1)?.0, alpha.clone());
            let m2 = Model::new(inp.lattice("lattice2", src2)?.0, alpha);
            match topological_invariance_check(&m1, &m2) {
                Ok(r) => (Status::Pass, json!({"dimension_1": r.dimension_1, "dimension_2": r.dimension_2})),
                Err(GroundStateError::Mismatch(a, b)) => (Status::Fail, json!({"dimension_1": a, "dimension_2": b})),
                Err(e) => return Err(gs_error(e)),
            }
        }
    };
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        task: task.name().into(),
        inputs: inputs_value(manifest),
        status,
        result: object(result),
    })
}

fn model(inp: &Inputs) -> Result<Model, CliError> {
    let g = inp.group()?;
    let alpha = inp.cocycle(g)?;
    let src = inp.required("lattice", &inp.manifest.lattice)?;
    let (l, _) = inp.lattice("lattice", src)?;
    Ok(Model::new(l, alpha))
}

fn validate(inp: &Inputs) -> Result<(Status, Value), CliError> {
    let mut checks = Map::new();
    let mut failures = Vec::new();
    let mut record = |name: &str, r: Result<Value, CliError>| -> Result<Option<Value>, CliError> {
        match r {
            Ok(v) => {
                checks.insert(name.into(), v.clone());
                Ok(Some(v))
            }
            Err(CliError::Invalid(msg)) => {
                failures.push(msg);
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let group = inp.group();
    let group = match group {
        Ok(g) => {
            record("group", Ok(json!({"order": g.order(), "abelian": g.is_abelian()})))?;
            Some(g)
        }
        Err(e) => {
            record("group", Err(e))?;
            None
        }
    };
    if let Some(g) = group {
        let c = inp.cocycle(g).map(|a| json!({"trivial": a.is_trivial(), "denominator": a.den()}));
        record("cocycle", c)?;
    }
    if let Some(src) = inp.manifest.lattice.as_deref() {
        match inp.lattice("lattice", src) {
            Ok((l, geom)) => {
                record(
                    "lattice",
                    Ok(json!({
                        "vertex_classes": l.num_vertex_classes(),
                        "edge_classes": l.num_edge_classes(),
                        "faces": l.faces().len(),
                        "euler_characteristic": l.euler_characteristic(),
                        "mode": l.mode(),
                    })),
                )?;
                if !inp.manifest.regions.is_empty() {
                    let r = inp.regions(&l, geom).map(|rs| json!(rs.iter().map(|r| r.edges().len()).collect::<Vec<_>>()));
                    record("region_edge_counts", r)?;
                }
            }
            Err(e) => {
                record("lattice", Err(e))?;
            }
        }
    }
    let status = if failures.is_empty() { Status::Pass } else { Status::Fail };
    Ok((status, json!({"checks": checks, "failures": failures})))
}

fn lto(inp: &Inputs) -> Result<(Status, Value), CliError> {
    let m = inp.manifest;
    let axiom = m.axiom.ok_or_else(|| CliError::Usage("missing field `axiom` for task lto".into()))?;
    let needed = match axiom {
        1 | 2 => 2,
        3 | 4 => 3,
        other => return Err(CliError::Usage(format!("axiom must be 1, 2, 3 or 4, got {other}"))),
    };
    if m.regions.len() != needed {
        return Err(CliError::Usage(format!("LTO{axiom} needs {needed} regions, got {}", m.regions.len())));
    }
    let g = inp.group()?;
    let alpha = inp.cocycle(g)?;
    let src = inp.required("lattice", &m.lattice)?;
    let (l, geom) = inp.lattice("lattice", src)?;
    let rs = inp.regions(&l, geom)?;
    let model = Model::new(l, alpha);
    let cfg = lto_config(m);
    let r = match axiom {
        1 => check_lto1(&model, &rs[0], &rs[1], &cfg),
        2 => check_lto2(&model, &rs[0], &rs[1], &cfg),
        3 => check_lto3(&model, &rs[0], &rs[1], &rs[2], &cfg),
        _ => check_lto4(&model, &rs[0], &rs[1], &rs[2], &cfg),
    }
    .map_err(lto_error)?;
    let status = if r.passed() { Status::Pass } else { Status::Fail };
    Ok((status, serde_json::to_value(r).expect("report serializes")))
}

/// Where a report goes: the explicit path, else a file named after the task
/// in the directory from `OUT_DIR_ENV`, else standard output (`None`).
pub fn output_path(m: &RunManifest, env_dir: Option<&Path>) -> Option<PathBuf> {
    if let Some(p) = &m.out {
        return Some(p.clone());
    }
    let task = m.task.map_or("report", Task::name);
    let name = match (m.task, m.axiom) {
        (Some(Task::Lto), Some(a)) => format!("lto{a}.json"),
        _ => format!("{task}.json"),
    };
    env_dir.map(|d| d.join(name))
}
