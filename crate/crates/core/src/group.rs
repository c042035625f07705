//! Finite groups given by Cayley tables.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an element inside its group's Cayley table.
pub type Elem = u8;

/// Largest supported group order (elements are stored as `u8`).
pub const MAX_ORDER: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("malformed table: {0}")]
    Malformed(String),
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("not associative: ({0}*{1})*{2} != {0}*({1}*{2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} has no two-sided inverse")]
    NoInverse(usize),
    #[error("not a latin square: row or column {0} repeats an entry")]
    NotLatinSquare(usize),
    #[error("unknown group family `{0}`")]
    UnknownFamily(String),
    #[error("bad parameters for `{family}`: {reason}")]
    BadParams { family: String, reason: String },
}

/// A validated finite group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Elem>,
    identity: Elem,
    inverses: Vec<Elem>,
    names: Option<Vec<String>>,
}

/// Explicit member list of a subgroup, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subgroup {
    members: Vec<Elem>,
}

impl Subgroup {
    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, g: Elem) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    /// Builds the subgroup generated by `gens`.
    pub fn generated(group: &FiniteGroup, gens: &[Elem]) -> Subgroup {
        let mut members = vec![group.identity()];
        let mut seen = vec![false; group.order()];
        seen[group.identity() as usize] = true;
        let mut i = 0;
        while i < members.len() {
            let m = members[i];
            for &g in gens {
                let p = group.mul(m, g);
                if !seen[p as usize] {
                    seen[p as usize] = true;
                    members.push(p);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        Subgroup { members }
    }

    /// Checks closure, identity and inverses against `group`.
    pub fn is_valid_in(&self, group: &FiniteGroup) -> bool {
        if !self.contains(group.identity()) {
            return false;
        }
        self.members.iter().all(|&a| {
            self.contains(group.inv(a)) && self.members.iter().all(|&b| self.contains(group.mul(a, b)))
        })
    }
}

impl FiniteGroup {
    /// Validates a square Cayley table.
    ///
    /// Checks run in the order identity, associativity, inverses, latin property.
    /// A finite monoid in which every element is invertible is already a group,
    /// so the final latin check only guards against internal mistakes.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<FiniteGroup, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Malformed("empty table".into()));
        }
        if n > MAX_ORDER {
            return Err(GroupError::Malformed(format!("order {n} exceeds {MAX_ORDER}")));
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::Malformed(format!("row {i} has length {}, expected {n}", row.len())));
            }
            for &x in row {
                if x >= n {
                    return Err(GroupError::Malformed(format!("entry {x} in row {i} out of range")));
                }
                flat.push(x as Elem);
            }
        }
        let at = |a: usize, b: usize| flat[a * n + b] as usize;

        let identity = (0..n)
            .find(|&e| (0..n).all(|g| at(e, g) == g && at(g, e) == g))
            .ok_or(GroupError::NoIdentity)?;

        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(GroupError::NotAssociative(a, b, c));
                    }
                }
            }
        }

        let mut inverses = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| at(g, h) == identity && at(h, g) == identity)
                .ok_or(GroupError::NoInverse(g))?;
            inverses.push(inv as Elem);
        }

        for i in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for j in 0..n {
                let r = at(i, j);
                let c = at(j, i);
                if row_seen[r] || col_seen[c] {
                    return Err(GroupError::NotLatinSquare(i));
                }
                row_seen[r] = true;
                col_seen[c] = true;
            }
        }

        Ok(FiniteGroup { order: n, table: flat, identity: identity as Elem, inverses, names: None })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<FiniteGroup, GroupError> {
        if names.len() != self.order {
            return Err(GroupError::Malformed(format!(
                "{} names given for a group of order {}",
                names.len(),
                self.order
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a as usize * self.order + b as usize]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inverses[a as usize]
    }

    /// `a^{-1} b a`
    #[inline]
    pub fn conj(&self, a: Elem, b: Elem) -> Elem {
        self.mul(self.mul(self.inv(a), b), a)
    }

    pub fn pow(&self, a: Elem, k: i64) -> Elem {
        let base = if k < 0 { self.inv(a) } else { a };
        let mut r = self.identity;
        for _ in 0..k.unsigned_abs() {
            r = self.mul(r, base);
        }
        r
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.order).map(|g| g as Elem)
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn name(&self, g: Elem) -> String {
        match &self.names {
            Some(n) => n[g as usize].clone(),
            None => g.to_string(),
        }
    }

    pub fn element_by_name(&self, name: &str) -> Option<Elem> {
        self.names.as_ref()?.iter().position(|n| n == name).map(|i| i as Elem)
    }

    pub fn table_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|i| self.table[i * self.order..(i + 1) * self.order].iter().map(|&x| x as usize).collect())
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// `C_G(gens)`; the whole group when `gens` is empty.
    pub fn centralizer(&self, gens: &[Elem]) -> Subgroup {
        let members = self
            .elements()
            .filter(|&x| gens.iter().all(|&g| self.mul(x, g) == self.mul(g, x)))
            .collect();
        Subgroup { members }
    }

    pub fn whole(&self) -> Subgroup {
        Subgroup { members: self.elements().collect() }
    }

    /// All subgroups, found by closing every subset of at most two generators.
    /// Sufficient for the small groups used in tests (every subgroup of an
    /// abelian group of rank two or of a dihedral group is 2-generated).
    pub fn two_generated_subgroups(&self) -> Vec<Subgroup> {
        let mut out: Vec<Subgroup> = Vec::new();
        for a in self.elements() {
            for b in self.elements() {
                let s = Subgroup::generated(self, &[a, b]);
                if !out.contains(&s) {
                    out.push(s);
                }
            }
        }
        out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.members.cmp(&y.members)));
        out
    }
}

impl fmt::Display for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "group of order {}", self.order)
    }
}

/// Named group families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(usize),
    Dihedral(usize),
    /// Dicyclic group of order `4n`; `Quaternion(2)` is Q8.
    Quaternion(usize),
    DirectProduct(Vec<GroupSpec>),
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Cyclic(n) => write!(f, "cyclic({n})"),
            GroupSpec::Dihedral(n) => write!(f, "dihedral({n})"),
            GroupSpec::Quaternion(n) => write!(f, "quaternion({n})"),
            GroupSpec::DirectProduct(parts) => {
                write!(f, "direct_product(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn bad(family: &str, reason: impl Into<String>) -> GroupError {
    GroupError::BadParams { family: family.into(), reason: reason.into() }
}

/// Builds one of the integer-parameter families by name.
pub fn builtin_group(name: &str, params: &[i64]) -> Result<FiniteGroup, GroupError> {
    let one = |family: &str| -> Result<usize, GroupError> {
        match params {
            [n] if *n >= 1 => Ok(*n as usize),
            _ => Err(bad(family, "expected one positive integer")),
        }
    };
    let spec = match name {
        "cyclic" => GroupSpec::Cyclic(one(name)?),
        "dihedral" => GroupSpec::Dihedral(one(name)?),
        "quaternion" => {
            if params.is_empty() {
                GroupSpec::Quaternion(2)
            } else {
                GroupSpec::Quaternion(one(name)?)
            }
        }
        "direct_product" => {
            // integer form: direct_product(n1, n2, ...) of cyclic factors
            if params.is_empty() || params.iter().any(|&p| p < 1) {
                return Err(bad(name, "expected positive cyclic factor orders"));
            }
            GroupSpec::DirectProduct(params.iter().map(|&p| GroupSpec::Cyclic(p as usize)).collect())
        }
        other => return Err(GroupError::UnknownFamily(other.to_string())),
    };
    build_group(&spec)
}

pub fn build_group(spec: &GroupSpec) -> Result<FiniteGroup, GroupError> {
    let (table, names) = match spec {
        GroupSpec::Cyclic(n) => {
            let n = *n;
            if n == 0 || n > MAX_ORDER {
                return Err(bad("cyclic", format!("order must be in 1..={MAX_ORDER}")));
            }
            let t = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
            (t, (0..n).map(|a| a.to_string()).collect::<Vec<_>>())
        }
        GroupSpec::Dihedral(n) => {
            let n = *n;
            if n == 0 || n > MAX_ORDER / 2 {
                return Err(bad("dihedral", "n must be positive and 2n small enough"));
            }
            // r^k s^j  <->  j*n + k
            let idx = |k: usize, j: usize| j * n + k;
            let mut t = vec![vec![0; 2 * n]; 2 * n];
            for (x, row) in t.iter_mut().enumerate() {
                let (a, i) = (x % n, x / n);
                for (y, cell) in row.iter_mut().enumerate() {
                    let (b, j) = (y % n, y / n);
                    let k = if i == 0 { (a + b) % n } else { (a + n - b) % n };
                    *cell = idx(k, (i + j) % 2);
                }
            }
            let names = (0..2 * n)
                .map(|x| {
                    let (k, j) = (x % n, x / n);
                    let r = match k {
                        0 => String::new(),
                        1 => "r".to_string(),
                        k => format!("r^{k}"),
                    };
                    match (j, r.is_empty()) {
                        (0, true) => "e".to_string(),
                        (0, false) => r,
                        (_, _) => format!("{r}s"),
                    }
                })
                .collect();
            (t, names)
        }
        GroupSpec::Quaternion(n) => {
            let n = *n;
            if n == 0 || n > MAX_ORDER / 4 {
                return Err(bad("quaternion", "n must be positive and 4n small enough"));
            }
            let m = 2 * n;
            // a^k x^j  <->  j*m + k ; a^m = 1, x^2 = a^n, x a x^-1 = a^-1
            let mut t = vec![vec![0; 2 * m]; 2 * m];
            for (p, row) in t.iter_mut().enumerate() {
                let (k, i) = (p % m, p / m);
                for (q, cell) in row.iter_mut().enumerate() {
                    let (l, j) = (q % m, q / m);
                    *cell = match (i, j) {
                        (0, j) => j * m + (k + l) % m,
                        (_, 0) => m + (k + m - l) % m,
                        _ => (k + m - l + n) % m,
                    };
                }
            }
            let names = (0..2 * m)
                .map(|p| {
                    let (k, j) = (p % m, p / m);
                    let a = match k {
                        0 => String::new(),
                        1 => "a".to_string(),
                        k => format!("a^{k}"),
                    };
                    match (j, a.is_empty()) {
                        (0, true) => "1".to_string(),
                        (0, false) => a,
                        (_, _) => format!("{a}x"),
                    }
                })
                .collect();
            (t, names)
        }
        GroupSpec::DirectProduct(parts) => {
            if parts.is_empty() {
                return Err(bad("direct_product", "needs at least one factor"));
            }
            let groups = parts.iter().map(build_group).collect::<Result<Vec<_>, _>>()?;
            let g = direct_product(&groups)?;
            return Ok(g);
        }
    };
    FiniteGroup::from_table(table)?.with_names(names)
}

/// Direct product with mixed-radix indexing, first factor most significant.
pub fn direct_product(factors: &[FiniteGroup]) -> Result<FiniteGroup, GroupError> {
    let order = factors.iter().fold(1usize, |acc, g| acc.saturating_mul(g.order()));
    if order > MAX_ORDER {
        return Err(bad("direct_product", format!("order {order} exceeds {MAX_ORDER}")));
    }
    let decode = |mut x: usize| -> Vec<usize> {
        let mut coords = vec![0; factors.len()];
        for (i, g) in factors.iter().enumerate().rev() {
            coords[i] = x % g.order();
            x /= g.order();
        }
        coords
    };
    let encode = |coords: &[usize]| -> usize {
        coords.iter().zip(factors).fold(0, |acc, (&c, g)| acc * g.order() + c)
    };
    let mut table = vec![vec![0; order]; order];
    for (a, row) in table.iter_mut().enumerate() {
        let ca = decode(a);
        for (b, cell) in row.iter_mut().enumerate() {
            let cb = decode(b);
            let prod: Vec<usize> = factors
                .iter()
                .enumerate()
                .map(|(i, g)| g.mul(ca[i] as Elem, cb[i] as Elem) as usize)
                .collect();
            *cell = encode(&prod);
        }
    }
    let names = (0..order)
        .map(|x| {
            let parts: Vec<String> =
                decode(x).iter().zip(factors).map(|(&c, g)| g.name(c as Elem)).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    FiniteGroup::from_table(table)?.with_names(names)
}

/// On-disk group description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl GroupFile {
    pub fn from_group(g: &FiniteGroup) -> GroupFile {
        GroupFile { order: g.order(), table: g.table_rows(), names: g.names().map(|n| n.to_vec()) }
    }

    pub fn into_group(self) -> Result<FiniteGroup, GroupError> {
        if self.order != self.table.len() {
            return Err(GroupError::Malformed(format!(
                "order {} does not match table size {}",
                self.order,
                self.table.len()
            )));
        }
        let g = FiniteGroup::from_table(self.table)?;
        match self.names {
            Some(n) => g.with_names(n),
            None => Ok(g),
        }
    }
}

/// Parses a group JSON document.
pub fn parse_group_json(text: &str) -> Result<FiniteGroup, GroupError> {
    let file: GroupFile =
        serde_json::from_str(text).map_err(|e| GroupError::Malformed(e.to_string()))?;
    file.into_group()
}
