//! 3-cocycles, the slant 2-cocycles beta_x and a coboundary solver over Q/Z.

use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Elem, FiniteGroup, GroupSpec, Subgroup};
use crate::phase::Phase;
use crate::snf::smith_normal_form;

/// Largest common denominator accepted for cocycle entries.
pub const MAX_DEN: i64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("cocycle identity violated at ({0}, {1}, {2}, {3})")]
    CocycleIdentityViolated(usize, usize, usize, usize),
    #[error("cocycle not normalized at ({0}, {1})")]
    NotNormalized(usize, usize),
    #[error("beta relation violated at y={0}, z={1}, w={2}")]
    RelationViolated(usize, usize, usize),
    #[error("2-cocycle identity fails at ({0}, {1}, {2})")]
    NotACocycle(usize, usize, usize),
    #[error("builtin family `{0}` produced an invalid cocycle: {1}")]
    ValidationFailed(String, String),
    #[error("unknown cocycle family `{0}`")]
    UnknownFamily(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("malformed cocycle description: {0}")]
    Malformed(String),
}

/// How thoroughly [`validate_cocycle3`] scans quadruples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

/// A normalized U(1)-valued 3-cocycle stored as a dense table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle3 {
    group: Arc<FiniteGroup>,
    values: Vec<Phase>,
    den: i64,
    exps: Vec<u32>,
}

fn idx3(n: usize, a: Elem, b: Elem, c: Elem) -> usize {
    (a as usize * n + b as usize) * n + c as usize
}

/// Validates a dense `|G|^3` table of phases.
pub fn validate_cocycle3(
    group: Arc<FiniteGroup>,
    values: Vec<Phase>,
    mode: CheckMode,
) -> Result<Cocycle3, CohomologyError> {
    let n = group.order();
    if values.len() != n * n * n {
        return Err(CohomologyError::Malformed(format!("expected {} values, got {}", n * n * n, values.len())));
    }
    let e = group.identity();
    for a in group.elements() {
        for b in group.elements() {
            if !values[idx3(n, e, a, b)].is_one()
                || !values[idx3(n, a, e, b)].is_one()
                || !values[idx3(n, a, b, e)].is_one()
            {
                return Err(CohomologyError::NotNormalized(a as usize, b as usize));
            }
        }
    }
    // integer exponents over a common denominator
    let mut den = 1i64;
    for p in &values {
        den = den.lcm(&p.den());
        if den > MAX_DEN {
            return Err(CohomologyError::Malformed(format!("common denominator exceeds {MAX_DEN}")));
        }
    }
    let ex: Vec<i64> = values.iter().map(|p| p.num() * (den / p.den())).collect();
    let check = |g1: Elem, g2: Elem, g3: Elem, g4: Elem| -> Result<(), CohomologyError> {
        let lhs = ex[idx3(n, g2, g3, g4)]
            + ex[idx3(n, g1, group.mul(g2, g3), g4)]
            + ex[idx3(n, g1, g2, g3)];
        let rhs = ex[idx3(n, group.mul(g1, g2), g3, g4)] + ex[idx3(n, g1, g2, group.mul(g3, g4))];
        if (lhs - rhs).rem_euclid(den) != 0 {
            return Err(CohomologyError::CocycleIdentityViolated(
                g1 as usize,
                g2 as usize,
                g3 as usize,
                g4 as usize,
            ));
        }
        Ok(())
    };
    match mode {
        CheckMode::Exhaustive => {
            for g1 in group.elements() {
                for g2 in group.elements() {
                    for g3 in group.elements() {
                        for g4 in group.elements() {
                            check(g1, g2, g3, g4)?;
                        }
                    }
                }
            }
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let mut r = || rng.gen_range(0..n) as Elem;
                let (a, b, c, d) = (r(), r(), r(), r());
                check(a, b, c, d)?;
            }
        }
    }
    Ok(Cocycle3::assemble(group, values))
}

impl Cocycle3 {
    fn assemble(group: Arc<FiniteGroup>, values: Vec<Phase>) -> Cocycle3 {
        let den = values.iter().fold(1i64, |l, p| l.lcm(&p.den()));
        let exps = values.iter().map(|p| (p.num() * (den / p.den())) as u32).collect();
        Cocycle3 { group, values, den, exps }
    }

    pub fn trivial(group: Arc<FiniteGroup>) -> Cocycle3 {
        let n = group.order();
        Cocycle3::assemble(group, vec![Phase::ONE; n * n * n])
    }

    /// Common denominator of all entries.
    pub fn den(&self) -> i64 {
        self.den
    }

    /// Entry as an exponent `k` with value `exp(2 pi i k / den())`.
    #[inline]
    pub fn exp(&self, a: Elem, b: Elem, c: Elem) -> u32 {
        self.exps[idx3(self.group.order(), a, b, c)]
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    #[inline]
    pub fn get(&self, a: Elem, b: Elem, c: Elem) -> Phase {
        self.values[idx3(self.group.order(), a, b, c)]
    }

    pub fn values(&self) -> &[Phase] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|p| p.is_one())
    }

    /// Pulls back `source` along the homomorphism `hom: G -> K` (given as an
    /// element map), then validates the result on `group`.
    pub fn pullback(group: Arc<FiniteGroup>, source: &Cocycle3, hom: &[Elem]) -> Result<Cocycle3, CohomologyError> {
        let k = source.group();
        if hom.len() != group.order() {
            return Err(CohomologyError::BadParams("homomorphism has the wrong length".into()));
        }
        for a in group.elements() {
            for b in group.elements() {
                if hom[group.mul(a, b) as usize] != k.mul(hom[a as usize], hom[b as usize]) {
                    return Err(CohomologyError::BadParams("map is not a homomorphism".into()));
                }
            }
        }
        let n = group.order();
        let mut values = Vec::with_capacity(n * n * n);
        for a in group.elements() {
            for b in group.elements() {
                for c in group.elements() {
                    values.push(source.get(hom[a as usize], hom[b as usize], hom[c as usize]));
                }
            }
        }
        validate_cocycle3(group, values, CheckMode::Exhaustive)
    }

    /// Sparse list of non-unit entries.
    pub fn to_file(&self, group_ref: &str) -> CocycleFile {
        let mut entries = Vec::new();
        for a in self.group.elements() {
            for b in self.group.elements() {
                for c in self.group.elements() {
                    let p = self.get(a, b, c);
                    if !p.is_one() {
                        entries.push((a as usize, b as usize, c as usize, p));
                    }
                }
            }
        }
        CocycleFile { group_ref: group_ref.to_string(), entries }
    }
}

/// Builds a named cocycle family on `group`, which must be the matching
/// builtin group (compared table by table).
pub fn builtin_cocycle(group: Arc<FiniteGroup>, family: &str, params: &[i64]) -> Result<Cocycle3, CohomologyError> {
    let n = group.order();
    let values: Vec<Phase> = match family {
        "trivial" => {
            if !params.is_empty() {
                return Err(CohomologyError::BadParams("trivial takes no parameters".into()));
            }
            vec![Phase::ONE; n * n * n]
        }
        "cyclic" => {
            let [m, p] = params else {
                return Err(CohomologyError::BadParams("cyclic expects (n, p)".into()));
            };
            if *m < 1 {
                return Err(CohomologyError::BadParams("cyclic needs n >= 1".into()));
            }
            let m = *m as usize;
            expect_group(&group, &GroupSpec::Cyclic(m))?;
            let mut v = Vec::with_capacity(n * n * n);
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        let carry = ((b + c) / m) as i64;
                        v.push(Phase::new((*p).rem_euclid(m as i64) * a as i64 * carry, m as i64));
                    }
                }
            }
            v
        }
        "product_tricharacter" => {
            let [m] = params else {
                return Err(CohomologyError::BadParams("product_tricharacter expects (n)".into()));
            };
            if *m < 1 {
                return Err(CohomologyError::BadParams("product_tricharacter needs n >= 1".into()));
            }
            let m = *m as usize;
            let z = GroupSpec::Cyclic(m);
            expect_group(&group, &GroupSpec::DirectProduct(vec![z.clone(), z.clone(), z]))?;
            let coord = |x: usize, i: usize| (x / m.pow(2 - i as u32)) % m;
            let mut v = Vec::with_capacity(n * n * n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        v.push(Phase::new((coord(a, 0) * coord(b, 1) * coord(c, 2)) as i64, m as i64));
                    }
                }
            }
            v
        }
        "dihedral_sign" => {
            let [m, p] = params else {
                return Err(CohomologyError::BadParams("dihedral_sign expects (n, p)".into()));
            };
            if *m < 1 {
                return Err(CohomologyError::BadParams("dihedral_sign needs n >= 1".into()));
            }
            let m = *m as usize;
            expect_group(&group, &GroupSpec::Dihedral(m))?;
            let z2 = Arc::new(crate::group::build_group(&GroupSpec::Cyclic(2)).map_err(|e| CohomologyError::BadParams(e.to_string()))?);
            let source = builtin_cocycle(z2, "cyclic", &[2, *p])?;
            // reflections are the elements m..2m
            let hom: Vec<Elem> = (0..n).map(|x| Elem::from(x >= m)).collect();
            return Cocycle3::pullback(group, &source, &hom);
        }
        other => return Err(CohomologyError::UnknownFamily(other.to_string())),
    };
    let mode = if n <= 64 { CheckMode::Exhaustive } else { CheckMode::Sampled { samples: 1_000_000, seed: 0 } };
    validate_cocycle3(group, values, mode).map_err(|e| CohomologyError::ValidationFailed(family.to_string(), e.to_string()))
}

fn expect_group(group: &FiniteGroup, spec: &GroupSpec) -> Result<(), CohomologyError> {
    let want = crate::group::build_group(spec).map_err(|e| CohomologyError::BadParams(e.to_string()))?;
    if want.table_rows() != group.table_rows() {
        return Err(CohomologyError::BadParams(format!("family needs the group {spec}")));
    }
    Ok(())
}

/// `beta_x(y,z) = alpha(x,y,z) alpha(y,z,z^-1 y^-1 x y z) / alpha(y, y^-1 x y, z)`
pub fn beta(alpha: &Cocycle3, x: Elem, y: Elem, z: Elem) -> Phase {
    let g = alpha.group();
    let yz = g.mul(y, z);
    alpha.get(x, y, z) * alpha.get(y, z, g.conj(yz, x)) * alpha.get(y, g.conj(y, x), z).inv()
}

/// Checks `beta_x(y,z) beta_x(yz,w) = beta_x(y,zw) beta_{y^-1xy}(z,w)` for all
/// `y, z, w`, using an arbitrary `beta` evaluator (so corrupted tables can be
/// fed in).
pub fn check_beta_relation(
    group: &FiniteGroup,
    x: Elem,
    beta: impl Fn(Elem, Elem, Elem) -> Phase,
) -> Result<(), CohomologyError> {
    for y in group.elements() {
        let xy = group.conj(y, x);
        for z in group.elements() {
            let yz = group.mul(y, z);
            for w in group.elements() {
                let lhs = beta(x, y, z) * beta(x, yz, w);
                let rhs = beta(x, y, group.mul(z, w)) * beta(xy, z, w);
                if lhs != rhs {
                    return Err(CohomologyError::RelationViolated(y as usize, z as usize, w as usize));
                }
            }
        }
    }
    Ok(())
}

pub fn validate_beta_relation(alpha: &Cocycle3, x: Elem) -> Result<(), CohomologyError> {
    check_beta_relation(alpha.group(), x, |x, y, z| beta(alpha, x, y, z))
}

/// A U(1)-valued function on `H x H` for a subgroup `H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle2 {
    group: Arc<FiniteGroup>,
    subgroup: Subgroup,
    /// indexed by member positions `(i, j)`
    values: Vec<Phase>,
}

impl Cocycle2 {
    pub fn new(group: Arc<FiniteGroup>, subgroup: Subgroup, values: Vec<Phase>) -> Result<Cocycle2, CohomologyError> {
        let h = subgroup.len();
        if values.len() != h * h {
            return Err(CohomologyError::Malformed(format!("expected {} values, got {}", h * h, values.len())));
        }
        if !subgroup.is_valid_in(&group) {
            return Err(CohomologyError::Malformed("not a subgroup".into()));
        }
        Ok(Cocycle2 { group, subgroup, values })
    }

    /// `beta_x` restricted to the centralizer of `x`.
    pub fn slant(alpha: &Cocycle3, x: Elem) -> Cocycle2 {
        let group = alpha.group().clone();
        let subgroup = group.centralizer(&[x]);
        let values = subgroup
            .members()
            .iter()
            .flat_map(|&y| subgroup.members().iter().map(move |&z| (y, z)))
            .map(|(y, z)| beta(alpha, x, y, z))
            .collect();
        Cocycle2 { group, subgroup, values }
    }

    /// `b(y,z) = gamma(y) gamma(z) / gamma(yz)`, gamma indexed by member position.
    pub fn coboundary(group: Arc<FiniteGroup>, subgroup: Subgroup, gamma: &[Phase]) -> Cocycle2 {
        let pos = |g: Elem| subgroup.members().binary_search(&g).expect("closed subgroup");
        let m = subgroup.members();
        let mut values = Vec::with_capacity(m.len() * m.len());
        for &y in m {
            for &z in m {
                values.push(gamma[pos(y)] * gamma[pos(z)] * gamma[pos(group.mul(y, z))].inv());
            }
        }
        Cocycle2 { group, subgroup, values }
    }

    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    fn pos(&self, g: Elem) -> usize {
        self.subgroup.members().binary_search(&g).expect("element outside the subgroup")
    }

    pub fn get(&self, y: Elem, z: Elem) -> Phase {
        self.values[self.pos(y) * self.subgroup.len() + self.pos(z)]
    }

    pub fn set(&mut self, y: Elem, z: Elem, p: Phase) {
        let i = self.pos(y) * self.subgroup.len() + self.pos(z);
        self.values[i] = p;
    }

    /// `b(y,z) b(yz,w) = b(y,zw) b(z,w)`
    pub fn check_identity(&self) -> Result<(), CohomologyError> {
        let g = &self.group;
        for &y in self.subgroup.members() {
            for &z in self.subgroup.members() {
                for &w in self.subgroup.members() {
                    let lhs = self.get(y, z) * self.get(g.mul(y, z), w);
                    let rhs = self.get(y, g.mul(z, w)) * self.get(z, w);
                    if lhs != rhs {
                        return Err(CohomologyError::NotACocycle(y as usize, z as usize, w as usize));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Solves `gamma(y) + gamma(z) - gamma(yz) = b(y,z)` in Q/Z.
///
/// Returns the witness gamma (indexed like `beta.subgroup().members()`),
/// already verified by substitution, or `None` when no solution exists.
pub fn is_coboundary(beta: &Cocycle2) -> Result<Option<Vec<Phase>>, CohomologyError> {
    beta.check_identity()?;
    let members = beta.subgroup.members();
    let h = members.len();
    let g = &beta.group;
    let den = beta.values.iter().fold(1i64, |l, p| l.lcm(&p.den())) as i128;

    let mut rows = Vec::with_capacity(h * h);
    let mut rhs = Vec::with_capacity(h * h);
    for (i, &y) in members.iter().enumerate() {
        for (j, &z) in members.iter().enumerate() {
            let k = beta.pos(g.mul(y, z));
            let mut row = vec![0i128; h];
            row[i] += 1;
            row[j] += 1;
            row[k] -= 1;
            rows.push(row);
            let p = beta.get(y, z);
            rhs.push(p.num() as i128 * (den / p.den() as i128));
        }
    }
    let snf = smith_normal_form(&rows, h);
    // c = U * rhs, all over `den`
    let c: Vec<i128> = snf.u.iter().map(|row| row.iter().zip(&rhs).map(|(a, b)| a * b).sum()).collect();
    if c.iter().skip(snf.rank).any(|&ci| ci.rem_euclid(den) != 0) {
        return Ok(None);
    }
    // delta_i = c_i / (den * d_i) for pivots, zero otherwise; gamma = V delta
    let mut gamma = vec![(0i128, 1i128); h];
    for (row, out) in snf.v.iter().zip(gamma.iter_mut()) {
        let mut acc = (0i128, 1i128);
        for (i, &vij) in row.iter().enumerate().take(snf.rank) {
            let (n2, d2) = (vij * c[i], den * snf.diag[i]);
            let l = acc.1.lcm(&d2);
            acc = ((acc.0 * (l / acc.1) + n2 * (l / d2)).rem_euclid(l), l);
            let gg = acc.0.gcd(&acc.1).max(1);
            acc = (acc.0 / gg, acc.1 / gg);
        }
        *out = acc;
    }
    let gamma: Vec<Phase> = gamma.into_iter().map(|(n, d)| Phase::new(n as i64, d as i64)).collect();
    let check = Cocycle2::coboundary(beta.group.clone(), beta.subgroup.clone(), &gamma);
    if check.values != beta.values {
        return Err(CohomologyError::Malformed("solver witness failed substitution".into()));
    }
    Ok(Some(gamma))
}

/// On-disk cocycle: sparse entries, omitted entries are phase 1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CocycleFile {
    pub group_ref: String,
    pub entries: Vec<(usize, usize, usize, Phase)>,
}

impl CocycleFile {
    pub fn into_cocycle(self, group: Arc<FiniteGroup>, mode: CheckMode) -> Result<Cocycle3, CohomologyError> {
        let n = group.order();
        let mut values = vec![Phase::ONE; n * n * n];
        for &(a, b, c, p) in &self.entries {
            if a >= n || b >= n || c >= n {
                return Err(CohomologyError::Malformed(format!("entry ({a},{b},{c}) out of range")));
            }
            values[(a * n + b) * n + c] = p;
        }
        validate_cocycle3(group, values, mode)
    }
}

pub fn parse_cocycle_json(text: &str) -> Result<CocycleFile, CohomologyError> {
    serde_json::from_str(text).map_err(|e| CohomologyError::Malformed(e.to_string()))
}
