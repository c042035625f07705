//! Exact roots of unity and exact cyclotomic amplitudes.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// `exp(2*pi*i * num/den)` stored with `0 <= num < den` and `gcd(num, den) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase {
    num: i64,
    den: i64,
}

impl Phase {
    pub const ONE: Phase = Phase { num: 0, den: 1 };

    /// Reduces `num/den` modulo 1. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Phase {
        assert!(den != 0, "phase denominator must be nonzero");
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        let num = num.rem_euclid(den);
        let g = num.gcd(&den);
        if num == 0 {
            Phase::ONE
        } else {
            Phase { num: num / g, den: den / g }
        }
    }

    pub fn from_ratio(r: Ratio<i64>) -> Phase {
        Phase::new(*r.numer(), *r.denom())
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_one(self) -> bool {
        self.num == 0
    }

    pub fn inv(self) -> Phase {
        Phase::new(-self.num, self.den)
    }

    pub fn pow(self, k: i64) -> Phase {
        Phase::new(
            ((self.num as i128 * k as i128).rem_euclid(self.den as i128)) as i64,
            self.den,
        )
    }

    pub fn to_complex(self) -> Complex64 {
        let t = 2.0 * std::f64::consts::PI * self.num as f64 / self.den as f64;
        Complex64::new(t.cos(), t.sin())
    }

    pub fn as_pair(self) -> [i64; 2] {
        [self.num, self.den]
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        let l = self.den.lcm(&rhs.den);
        Phase::new(self.num * (l / self.den) + rhs.num * (l / rhs.den), l)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e(2pi i {}/{})", self.num, self.den)
    }
}

impl Serialize for Phase {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.as_pair().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Phase, D::Error> {
        let [n, m] = <[i64; 2]>::deserialize(d)?;
        if m == 0 {
            return Err(serde::de::Error::custom("phase denominator is zero"));
        }
        if n == i64::MIN || m == i64::MIN {
            return Err(serde::de::Error::custom("phase component out of range"));
        }
        Ok(Phase::new(n, m))
    }
}

type Q = Ratio<i128>;

thread_local! {
    static CYCLOTOMIC: RefCell<HashMap<u64, Vec<i128>>> = RefCell::new(HashMap::new());
}

/// Coefficients of the n-th cyclotomic polynomial, constant term first.
fn cyclotomic_poly(n: u64) -> Vec<i128> {
    if let Some(p) = CYCLOTOMIC.with(|c| c.borrow().get(&n).cloned()) {
        return p;
    }
    // x^n - 1 divided by every Phi_d with d | n, d < n
    let mut p = vec![0i128; n as usize + 1];
    p[0] = -1;
    p[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let q = cyclotomic_poly(d);
            p = poly_div_exact(&p, &q);
        }
    }
    CYCLOTOMIC.with(|c| c.borrow_mut().insert(n, p.clone()));
    p
}

fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quo = vec![0i128; num.len() - dd];
    for i in (0..quo.len()).rev() {
        let c = rem[i + dd];
        quo[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quo
}

/// An exact element of a cyclotomic field, written in the power basis of
/// `Q(zeta_n)` reduced modulo the n-th cyclotomic polynomial.
#[derive(Debug, Clone)]
pub struct Cyclo {
    n: u64,
    coeffs: Vec<Q>,
}

impl Cyclo {
    pub fn zero() -> Cyclo {
        Cyclo { n: 1, coeffs: vec![Q::zero()] }
    }

    pub fn one() -> Cyclo {
        Cyclo::rational(Q::one())
    }

    pub fn rational(q: Q) -> Cyclo {
        Cyclo { n: 1, coeffs: vec![q] }
    }

    /// `mag * phase`
    pub fn from_phase(p: Phase, mag: Q) -> Cyclo {
        let n = p.den() as u64;
        let mut coeffs = vec![Q::zero(); n as usize];
        coeffs[p.num() as usize] = mag;
        let mut c = Cyclo { n, coeffs };
        c.reduce();
        c
    }

    fn reduce(&mut self) {
        let phi = cyclotomic_poly(self.n);
        let deg = phi.len() - 1;
        for i in (deg..self.coeffs.len()).rev() {
            let c = self.coeffs[i];
            if c.is_zero() {
                continue;
            }
            for (j, &pj) in phi.iter().enumerate() {
                let k = i - deg + j;
                self.coeffs[k] -= c * Q::from_integer(pj);
            }
        }
    }

    fn lift(&self, m: u64) -> Cyclo {
        if m == self.n {
            return self.clone();
        }
        let step = (m / self.n) as usize;
        let mut coeffs = vec![Q::zero(); m as usize];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(k * step) % m as usize] += *c;
        }
        let mut out = Cyclo { n: m, coeffs };
        out.reduce();
        out
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn mul_phase(&self, p: Phase) -> Cyclo {
        self * &Cyclo::from_phase(p, Q::one())
    }

    pub fn scale(&self, q: Q) -> Cyclo {
        Cyclo { n: self.n, coeffs: self.coeffs.iter().map(|c| c * q).collect() }
    }

    pub fn conj(&self) -> Cyclo {
        let n = self.n as usize;
        let mut coeffs = vec![Q::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            coeffs[(n - k) % n] += *c;
        }
        let mut out = Cyclo { n: self.n, coeffs };
        out.reduce();
        out
    }

    pub fn to_complex(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = *c.numer() as f64 / *c.denom() as f64;
            z += Phase::new(k as i64, self.n as i64).to_complex() * v;
        }
        z
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, other: &Cyclo) -> bool {
        let m = self.n.lcm(&other.n);
        let a = self.lift(m);
        let b = other.lift(m);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclo {}

impl<'a> Add<&'a Cyclo> for &'a Cyclo {
    type Output = Cyclo;
    fn add(self, rhs: &Cyclo) -> Cyclo {
        let m = self.n.lcm(&rhs.n);
        let mut a = self.lift(m);
        let b = rhs.lift(m);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs) {
            *x += y;
        }
        a
    }
}

impl<'a> Sub<&'a Cyclo> for &'a Cyclo {
    type Output = Cyclo;
    fn sub(self, rhs: &Cyclo) -> Cyclo {
        self + &(-rhs)
    }
}

impl Neg for &Cyclo {
    type Output = Cyclo;
    fn neg(self) -> Cyclo {
        self.scale(-Q::one())
    }
}

impl<'a> Mul<&'a Cyclo> for &'a Cyclo {
    type Output = Cyclo;
    fn mul(self, rhs: &Cyclo) -> Cyclo {
        let m = self.n.lcm(&rhs.n) as usize;
        let a = self.lift(m as u64);
        let b = rhs.lift(m as u64);
        let mut coeffs = vec![Q::zero(); m];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    coeffs[(i + j) % m] += x * y;
                }
            }
        }
        let mut out = Cyclo { n: m as u64, coeffs };
        out.reduce();
        out
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})z{}^{k}", self.n)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
