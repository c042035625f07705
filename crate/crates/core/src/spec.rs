//! Parser for compact family expressions such as `dihedral(3)`,
//! `direct_product(cyclic(4),cyclic(4))` or `cyclic(2,1)`.

use std::fmt;

use thiserror::Error;

use crate::group::GroupSpec;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Int(i64),
    Call { name: String, args: Vec<Term> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` at byte {pos}: {reason}")]
pub struct SpecError {
    pub input: String,
    pub pos: usize,
    pub reason: String,
}

const MAX_DEPTH: usize = 32;

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: &str) -> SpecError {
        SpecError { input: self.src.to_string(), pos: self.pos, reason: reason.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn term(&mut self, depth: usize) -> Result<Term, SpecError> {
        if depth > MAX_DEPTH {
            return Err(self.err("nesting too deep"));
        }
        self.skip_ws();
        let start = self.pos;
        match self.bytes.get(self.pos) {
            Some(c) if c.is_ascii_digit() || *c == b'-' => {
                self.pos += 1;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                self.src[start..self.pos].parse::<i64>().map(Term::Int).map_err(|_| self.err("bad integer"))
            }
            Some(c) if c.is_ascii_alphabetic() || *c == b'_' => {
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = self.src[start..self.pos].to_string();
                self.skip_ws();
                let mut args = Vec::new();
                if self.bytes.get(self.pos) == Some(&b'(') {
                    self.pos += 1;
                    self.skip_ws();
                    if self.bytes.get(self.pos) == Some(&b')') {
                        self.pos += 1;
                    } else {
                        loop {
                            args.push(self.term(depth + 1)?);
                            self.skip_ws();
                            match self.bytes.get(self.pos) {
                                Some(b',') => self.pos += 1,
                                Some(b')') => {
                                    self.pos += 1;
                                    break;
                                }
                                _ => return Err(self.err("expected `,` or `)`")),
                            }
                        }
                    }
                }
                Ok(Term::Call { name, args })
            }
            _ => Err(self.err("expected a name or an integer")),
        }
    }
}

pub fn parse_term(src: &str) -> Result<Term, SpecError> {
    let mut p = Parser { src, bytes: src.as_bytes(), pos: 0 };
    let t = p.term(0)?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(t)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(i) => write!(f, "{i}"),
            Term::Call { name, args } => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl Term {
    pub fn name(&self) -> Option<&str> {
        match self {
            Term::Call { name, .. } => Some(name),
            Term::Int(_) => None,
        }
    }

    /// Integer arguments; `None` if any argument is not an integer.
    pub fn int_args(&self) -> Option<Vec<i64>> {
        match self {
            Term::Call { args, .. } => args
                .iter()
                .map(|a| match a {
                    Term::Int(i) => Some(*i),
                    _ => None,
                })
                .collect(),
            Term::Int(_) => None,
        }
    }
}

fn positive(t: &Term, i: i64) -> Result<usize, String> {
    if i >= 1 {
        Ok(i as usize)
    } else {
        Err(format!("`{t}`: parameter must be positive"))
    }
}

/// Converts a parsed term into a group family description.
pub fn group_spec(t: &Term) -> Result<GroupSpec, String> {
    let Term::Call { name, args } = t else {
        return Err(format!("`{t}` is not a group expression"));
    };
    let single = |args: &[Term]| -> Result<usize, String> {
        match args {
            [Term::Int(n)] => positive(t, *n),
            _ => Err(format!("`{t}` expects one integer")),
        }
    };
    match name.as_str() {
        "cyclic" | "Z" => Ok(GroupSpec::Cyclic(single(args)?)),
        "dihedral" | "D" => Ok(GroupSpec::Dihedral(single(args)?)),
        "quaternion" | "Q" => {
            if args.is_empty() {
                Ok(GroupSpec::Quaternion(2))
            } else {
                Ok(GroupSpec::Quaternion(single(args)?))
            }
        }
        "direct_product" => {
            if args.is_empty() {
                return Err("direct_product needs factors".into());
            }
            let parts = args
                .iter()
                .map(|a| match a {
                    Term::Int(n) => positive(t, *n).map(GroupSpec::Cyclic),
                    other => group_spec(other),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(GroupSpec::DirectProduct(parts))
        }
        other => Err(format!("unknown group family `{other}`")),
    }
}
