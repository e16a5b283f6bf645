//! Elements of `Q(ζ_N)` in the power basis `1, ζ, …, ζ^{φ(N)-1}`.
//!
//! Every element is stored fully reduced modulo the `N`-th cyclotomic
//! polynomial, so equality is coordinatewise.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::Rational;
use crate::error::{Error, Result};
use crate::json;

/// Precomputed data for one cyclotomic field.
#[derive(Debug)]
pub struct CycloField {
    pub level: u32,
    pub phi: usize,
    /// Coefficients of `Φ_N`, lowest degree first (monic).
    pub poly: Vec<i64>,
    /// `rows[j]` = power-basis coordinates of `x^j mod Φ_N`, `0 <= j < N`.
    rows: Vec<Vec<i64>>,
}

fn poly_div_exact(num: &[i128], den: &[i128]) -> Vec<i128> {
    // den monic
    let mut rem = num.to_vec();
    let dl = den.len();
    let ql = num.len() + 1 - dl;
    let mut q = vec![0i128; ql];
    for i in (0..ql).rev() {
        let c = rem[i + dl - 1];
        q[i] = c;
        if c != 0 {
            for (j, d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    q
}

/// `Φ_n` by iterated exact division of `x^n - 1` by `Φ_d` for proper divisors `d`.
pub fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    fn go(n: u32, memo: &mut HashMap<u32, Vec<i128>>) -> Vec<i128> {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        let mut p = vec![0i128; n as usize + 1];
        p[0] = -1;
        p[n as usize] = 1;
        for d in 1..n {
            if n.is_multiple_of(d) {
                let pd = go(d, memo);
                p = poly_div_exact(&p, &pd);
            }
        }
        memo.insert(n, p.clone());
        p
    }
    let mut memo = HashMap::new();
    go(n, &mut memo).into_iter().map(|c| i64::try_from(c).expect("cyclotomic coefficient overflow")).collect()
}

/// Euler's totient.
pub fn euler_phi(n: u32) -> u32 {
    let mut n = n;
    let mut res = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            res -= res / p;
        }
        p += 1;
    }
    if n > 1 {
        res -= res / n;
    }
    res
}

impl CycloField {
    fn build(level: u32) -> Self {
        let poly = cyclotomic_polynomial(level);
        let phi = poly.len() - 1;
        let mut rows = Vec::with_capacity(level as usize);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..level {
            rows.push(cur.clone());
            // multiply by x and reduce
            let top = cur[phi - 1];
            let mut next = vec![0i64; phi];
            for i in (1..phi).rev() {
                next[i] = cur[i - 1];
            }
            if top != 0 {
                for i in 0..phi {
                    next[i] = next[i].checked_sub(top * poly[i]).expect("reduction overflow");
                }
            }
            cur = next;
        }
        CycloField { level, phi, poly, rows }
    }

    /// Coordinates of `x^e mod Φ_N`.
    pub fn row(&self, e: i64) -> &[i64] {
        &self.rows[e.rem_euclid(self.level as i64) as usize]
    }
}

/// Shared, leaked field tables; a level's table is built once per process.
pub fn field(level: u32) -> &'static CycloField {
    static FIELDS: OnceLock<RwLock<HashMap<u32, &'static CycloField>>> = OnceLock::new();
    assert!(level >= 1, "cyclotomic level must be positive");
    let map = FIELDS.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(f) = map.read().unwrap().get(&level) {
        return f;
    }
    let mut w = map.write().unwrap();
    w.entry(level).or_insert_with(|| Box::leak(Box::new(CycloField::build(level))))
}

#[derive(Clone)]
pub struct Cyclotomic {
    field: &'static CycloField,
    coeffs: Vec<Rational>,
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.field.level == other.field.level && self.coeffs == other.coeffs
    }
}
impl Eq for Cyclotomic {}

impl std::hash::Hash for Cyclotomic {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.field.level.hash(state);
        self.coeffs.hash(state);
    }
}

impl Cyclotomic {
    pub fn zero(level: u32) -> Self {
        let f = field(level);
        Cyclotomic { field: f, coeffs: vec![Rational::ZERO; f.phi] }
    }

    pub fn one(level: u32) -> Self {
        Self::from_rational(level, Rational::ONE)
    }

    pub fn from_rational(level: u32, r: Rational) -> Self {
        let mut z = Self::zero(level);
        z.coeffs[0] = r;
        z
    }

    pub fn from_int(level: u32, n: i64) -> Self {
        Self::from_rational(level, Rational::from_int(n))
    }

    /// `ζ_N^e`, reduced.
    pub fn root_power(level: u32, e: i64) -> Self {
        let f = field(level);
        let coeffs = f.row(e).iter().map(|&c| Rational::from_int(c)).collect();
        Cyclotomic { field: f, coeffs }
    }

    /// Builds from arbitrary power-basis coordinates, which must have length `φ(N)`.
    pub fn from_coeffs(level: u32, coeffs: Vec<Rational>) -> Result<Self> {
        let f = field(level);
        if coeffs.len() != f.phi {
            return Err(Error::Invalid(format!("level {level} needs {} coordinates, got {}", f.phi, coeffs.len())));
        }
        Ok(Cyclotomic { field: f, coeffs })
    }

    /// Reduces `Σ c_e ζ^e` for arbitrary integer exponents.
    pub fn from_exponents(level: u32, terms: &[(i64, Rational)]) -> Self {
        let f = field(level);
        let mut coeffs = vec![Rational::ZERO; f.phi];
        for (e, c) in terms {
            if c.is_zero() {
                continue;
            }
            for (slot, &r) in coeffs.iter_mut().zip(f.row(*e)) {
                if r != 0 {
                    *slot += &(c * &Rational::from_int(r));
                }
            }
        }
        Cyclotomic { field: f, coeffs }
    }

    pub fn level(&self) -> u32 {
        self.field.level
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Rational coordinates in the power basis (restriction of scalars).
    pub fn flatten(&self) -> Vec<Rational> {
        self.coeffs.clone()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Rational::is_zero)
    }

    /// The rational value if the element lies in `Q`.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coeffs[1..].iter().all(Rational::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.field.level != other.field.level {
            Err(Error::LevelMismatch(self.field.level, other.field.level))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Cyclotomic { field: self.field, coeffs })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Cyclotomic { field: self.field, coeffs })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        if let Some(r) = self.as_rational() {
            return Ok(other.scale(r));
        }
        if let Some(r) = other.as_rational() {
            return Ok(self.scale(r));
        }
        Ok(self.mul_small(other).unwrap_or_else(|| self.mul_big(other)))
    }

    pub fn scale(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.level());
        }
        if r.is_one() {
            return self.clone();
        }
        Cyclotomic { field: self.field, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&Rational::from_int(n))
    }

    fn common_den_small(&self) -> Option<(i128, Vec<i128>)> {
        let mut den: i128 = 1;
        for c in &self.coeffs {
            let (_, d) = c.as_small()?;
            let d = d as i128;
            let g = num_integer::gcd(den, d);
            den = den.checked_mul(d / g)?;
        }
        let mut nums = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let (n, d) = c.as_small()?;
            nums.push((n as i128).checked_mul(den / d as i128)?);
        }
        Some((den, nums))
    }

    fn mul_small(&self, other: &Self) -> Option<Self> {
        let (da, a) = self.common_den_small()?;
        let (db, b) = other.common_den_small()?;
        let phi = self.field.phi;
        let mut prod = vec![0i128; 2 * phi - 1];
        for (i, x) in a.iter().enumerate() {
            if *x == 0 {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if *y == 0 {
                    continue;
                }
                prod[i + j] = prod[i + j].checked_add(x.checked_mul(*y)?)?;
            }
        }
        let mut out: Vec<i128> = prod[..phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(phi) {
            if *c == 0 {
                continue;
            }
            for (slot, &r) in out.iter_mut().zip(self.field.row(k as i64)) {
                if r != 0 {
                    *slot = slot.checked_add(c.checked_mul(r as i128)?)?;
                }
            }
        }
        let den = da.checked_mul(db)?;
        let coeffs = out
            .into_iter()
            .map(|n| {
                let g = num_integer::gcd(n, den);
                let (n, d) = if g > 1 { (n / g, den / g) } else { (n, den) };
                match (i64::try_from(n), i64::try_from(d)) {
                    (Ok(n), Ok(d)) => Rational::new(n, d),
                    _ => Rational::from_bigint_ratio(BigInt::from(n), BigInt::from(d)).unwrap(),
                }
            })
            .collect();
        Some(Cyclotomic { field: self.field, coeffs })
    }

    fn common_den_big(&self) -> (BigInt, Vec<BigInt>) {
        let mut den = BigInt::one();
        for c in &self.coeffs {
            den = den.lcm(&c.denom());
        }
        let nums = self.coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        (den, nums)
    }

    fn mul_big(&self, other: &Self) -> Self {
        let (da, a) = self.common_den_big();
        let (db, b) = other.common_den_big();
        let phi = self.field.phi;
        let mut prod = vec![BigInt::zero(); 2 * phi - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    prod[i + j] += x * y;
                }
            }
        }
        let mut out: Vec<BigInt> = prod[..phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            for (slot, &r) in out.iter_mut().zip(self.field.row(k as i64)) {
                if r != 0 {
                    *slot += c * r;
                }
            }
        }
        let den = da * db;
        let coeffs = out.into_iter().map(|n| Rational::from_bigint_ratio(n, den.clone()).unwrap()).collect();
        Cyclotomic { field: self.field, coeffs }
    }

    /// Multiplicative inverse via the extended Euclidean algorithm against `Φ_N`.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_rational(self.level(), r.recip()?));
        }
        let modulus: Vec<Rational> = self.field.poly.iter().map(|&c| Rational::from_int(c)).collect();
        let mut r0 = modulus.clone();
        let mut r1 = trim(self.coeffs.clone());
        let mut s0: Vec<Rational> = vec![];
        let mut s1: Vec<Rational> = vec![Rational::ONE];
        while !r1.is_empty() {
            let (q, r) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a nonzero constant because Φ_N is irreducible
        debug_assert_eq!(r0.len(), 1);
        let c = r0[0].recip()?;
        let (_, s) = poly_divmod(&s0, &modulus);
        let mut coeffs = vec![Rational::ZERO; self.field.phi];
        for (slot, v) in coeffs.iter_mut().zip(s) {
            *slot = &v * &c;
        }
        Ok(Cyclotomic { field: self.field, coeffs })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.inverse()?)
    }

    /// Image under `ζ_M ↦ ζ_N^{N/M}` where `M` is the current level.
    pub fn embed(&self, level: u32) -> Result<Self> {
        let m = self.level();
        if !level.is_multiple_of(m) {
            return Err(Error::NotDivisible { from: m, to: level });
        }
        if level == m {
            return Ok(self.clone());
        }
        let step = (level / m) as i64;
        let terms: Vec<(i64, Rational)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i as i64 * step, c.clone()))
            .collect();
        Ok(Self::from_exponents(level, &terms))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.level());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(Rational::is_zero) {
        p.pop();
    }
    p
}

fn poly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).cloned().unwrap_or_default();
            let y = b.get(i).cloned().unwrap_or_default();
            x - y
        })
        .collect();
    trim(out)
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![Rational::ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    trim(out)
}

fn poly_divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut rem = trim(a.to_vec());
    if rem.len() < b.len() {
        return (vec![], rem);
    }
    let lead = b.last().unwrap().recip().unwrap();
    let mut q = vec![Rational::ZERO; rem.len() - b.len() + 1];
    while rem.len() >= b.len() && !rem.is_empty() {
        let shift = rem.len() - b.len();
        let c = rem.last().unwrap() * &lead;
        for (j, bj) in b.iter().enumerate() {
            rem[shift + j] -= &(&c * bj);
        }
        q[shift] = c;
        rem.pop();
        rem = trim(rem);
    }
    (trim(q), rem)
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})·ζ{}", self.level())?,
                _ => write!(f, "({c})·ζ{}^{i}", self.level())?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

macro_rules! cyclo_ops {
    ($($tr:ident $m:ident $t:ident),*) => {$(
        impl<'a> $tr<&'a Cyclotomic> for &'a Cyclotomic {
            type Output = Cyclotomic;
            /// Panics on level mismatch; the `try_` form returns the error.
            fn $m(self, rhs: &Cyclotomic) -> Cyclotomic { self.$t(rhs).expect("cyclotomic level mismatch") }
        }
        impl $tr<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic { (&self).$m(&rhs) }
        }
        impl<'a> $tr<&'a Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: &Cyclotomic) -> Cyclotomic { (&self).$m(rhs) }
        }
    )*};
}
cyclo_ops!(Add add try_add, Sub sub try_sub, Mul mul try_mul);

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic { field: self.field, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}
impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

impl AddAssign<&Cyclotomic> for Cyclotomic {
    fn add_assign(&mut self, rhs: &Cyclotomic) {
        assert_eq!(self.level(), rhs.level(), "cyclotomic level mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a += b;
            }
        }
    }
}

impl SubAssign<&Cyclotomic> for Cyclotomic {
    fn sub_assign(&mut self, rhs: &Cyclotomic) {
        assert_eq!(self.level(), rhs.level(), "cyclotomic level mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            if !b.is_zero() {
                *a -= b;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CycloJson {
    level: u32,
    num: Vec<serde_json::Value>,
    den: Vec<serde_json::Value>,
}

impl Serialize for Cyclotomic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CycloJson {
            level: self.level(),
            num: self.coeffs.iter().map(|c| json::int_to_value(&c.numer())).collect(),
            den: self.coeffs.iter().map(|c| json::int_to_value(&c.denom())).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cyclotomic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = CycloJson::deserialize(d)?;
        if raw.num.len() != raw.den.len() {
            return Err(D::Error::custom("num/den length mismatch"));
        }
        let coeffs = raw
            .num
            .iter()
            .zip(&raw.den)
            .map(|(n, d)| {
                let n = json::value_to_int(n).map_err(D::Error::custom)?;
                let d = json::value_to_int(d).map_err(D::Error::custom)?;
                Rational::from_bigint_ratio(n, d).map_err(D::Error::custom)
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        if raw.level == 0 {
            return Err(D::Error::custom("level must be positive"));
        }
        Cyclotomic::from_coeffs(raw.level, coeffs).map_err(D::Error::custom)
    }
}
