//! Truncated `q_N`-expansions and nearly-holomorphic series.
//!
//! A nearly-holomorphic series of weight `k` is stored as a polynomial in the
//! formal symbol `ρ = 1/(2πi(τ - τ̄))` whose coefficients are q-expansions.
//! All analytic factors of `2πi` are normalized away, so the operators below
//! act on exact cyclotomic data only:
//!
//! * `D(q_N^m) = (m/N) q_N^m`;
//! * `del`: `(del f)_j = D f_j + (k - j + 1) f_{j-1}` (weight `k + 2`);
//! * `lower`: `(lower f)_j = (j + 1) f_{j+1}` (weight `k - 2`);
//! * holomorphic projection `H`, the unique linear map killing the image of
//!   `del` and fixing holomorphic series.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::arith::{factorial, Cyclotomic, Rational};
use crate::error::{Error, Result};

/// A q-expansion in `q_N = q^{1/N}`, known modulo `q_N^precision`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QExpansionJson", into = "QExpansionJson")]
pub struct QExpansion {
    level: u32,
    precision: usize,
    coeffs: BTreeMap<usize, Cyclotomic>,
}

impl QExpansion {
    pub fn zero(level: u32, precision: usize) -> Self {
        QExpansion { level, precision, coeffs: BTreeMap::new() }
    }

    pub fn constant(c: Cyclotomic, precision: usize) -> Self {
        Self::monomial(0, c, precision)
    }

    pub fn monomial(exp: usize, c: Cyclotomic, precision: usize) -> Self {
        let mut s = Self::zero(c.level(), precision);
        s.set(exp, c);
        s
    }

    /// Builds a series from `(exponent, coefficient)` pairs; exponents at or
    /// beyond `precision` are dropped.
    pub fn from_terms(
        level: u32,
        precision: usize,
        terms: impl IntoIterator<Item = (usize, Cyclotomic)>,
    ) -> Result<Self> {
        let mut s = Self::zero(level, precision);
        for (m, c) in terms {
            if c.level() != level {
                return Err(Error::LevelMismatch(level, c.level()));
            }
            if m < precision {
                s.add_at(m, &c);
            }
        }
        Ok(s)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn coeff(&self, m: usize) -> Cyclotomic {
        self.coeffs.get(&m).cloned().unwrap_or_else(|| Cyclotomic::zero(self.level))
    }

    pub fn coeff_ref(&self, m: usize) -> Option<&Cyclotomic> {
        self.coeffs.get(&m)
    }

    /// Nonzero terms in increasing exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, &Cyclotomic)> {
        self.coeffs.iter().map(|(m, c)| (*m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn set(&mut self, m: usize, c: Cyclotomic) {
        assert!(m < self.precision, "exponent beyond precision");
        if c.is_zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
    }

    pub fn add_at(&mut self, m: usize, c: &Cyclotomic) {
        if c.is_zero() || m >= self.precision {
            return;
        }
        match self.coeffs.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.coeffs.remove(&m);
                }
            }
            None => {
                self.coeffs.insert(m, c.clone());
            }
        }
    }

    pub fn truncate(&self, precision: usize) -> Self {
        let precision = precision.min(self.precision);
        QExpansion {
            level: self.level,
            precision,
            coeffs: self.coeffs.range(..precision).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.level != other.level {
            Err(Error::LevelMismatch(self.level, other.level))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.truncate(other.precision);
        for (m, c) in other.coeffs.range(..out.precision) {
            out.add_at(*m, c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        if c.is_zero() {
            return Self::zero(self.level, self.precision);
        }
        let coeffs = self.coeffs.iter().map(|(m, v)| (*m, v * c)).collect();
        QExpansion { level: self.level, precision: self.precision, coeffs }
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        if r.is_zero() {
            return Self::zero(self.level, self.precision);
        }
        let coeffs = self.coeffs.iter().map(|(m, v)| (*m, v.scale(r))).collect();
        QExpansion { level: self.level, precision: self.precision, coeffs }
    }

    /// Cauchy product, truncated at the smaller precision.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let precision = self.precision.min(other.precision);
        let mut acc: Vec<Option<Cyclotomic>> = vec![None; precision];
        for (i, a) in self.coeffs.range(..precision) {
            for (j, b) in other.coeffs.range(..precision - i) {
                let p = a * b;
                match &mut acc[i + j] {
                    Some(v) => *v += &p,
                    slot => *slot = Some(p),
                }
            }
        }
        let coeffs =
            acc.into_iter().enumerate().filter_map(|(m, c)| c.filter(|c| !c.is_zero()).map(|c| (m, c))).collect();
        Ok(QExpansion { level: self.level, precision, coeffs })
    }

    /// `D(q_N^m) = (m/N) q_N^m`.
    pub fn derivative(&self) -> Self {
        let n = self.level as i64;
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(m, _)| **m > 0)
            .map(|(m, c)| (*m, c.scale(&Rational::new(*m as i64, n))))
            .collect();
        QExpansion { level: self.level, precision: self.precision, coeffs }
    }

    /// Re-expands in `q_M` for a multiple `M` of the level: `q_N^m = q_M^{m M/N}`.
    pub fn level_raise(&self, level: u32) -> Result<Self> {
        if !level.is_multiple_of(self.level) {
            return Err(Error::NotDivisible { from: self.level, to: level });
        }
        let step = (level / self.level) as usize;
        let coeffs = self.coeffs.iter().map(|(m, c)| Ok((m * step, c.embed(level)?))).collect::<Result<_>>()?;
        Ok(QExpansion { level, precision: self.precision * step, coeffs })
    }

    /// Largest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.keys().next().copied()
    }
}

impl Neg for &QExpansion {
    type Output = QExpansion;
    fn neg(self) -> QExpansion {
        QExpansion {
            level: self.level,
            precision: self.precision,
            coeffs: self.coeffs.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

macro_rules! series_ops {
    ($ty:ty; $($tr:ident $m:ident $t:ident),*) => {$(
        impl<'a> $tr<&'a $ty> for &'a $ty {
            type Output = $ty;
            /// Panics on mismatched levels or weights.
            fn $m(self, rhs: &$ty) -> $ty { self.$t(rhs).expect(concat!("series ", stringify!($m))) }
        }
        impl $tr<$ty> for $ty {
            type Output = $ty;
            fn $m(self, rhs: $ty) -> $ty { (&self).$m(&rhs) }
        }
    )*};
}
series_ops!(QExpansion; Add add try_add, Sub sub try_sub);

impl std::ops::Mul for &QExpansion {
    type Output = QExpansion;
    fn mul(self, rhs: &QExpansion) -> QExpansion {
        self.try_mul(rhs).expect("series mul")
    }
}

#[derive(Serialize, Deserialize)]
struct QExpansionJson {
    level: u32,
    precision: usize,
    coeffs: BTreeMap<String, Cyclotomic>,
}

impl From<QExpansion> for QExpansionJson {
    fn from(q: QExpansion) -> Self {
        QExpansionJson { level: q.level, precision: q.precision, coeffs: coeff_map_to_json(&q.coeffs) }
    }
}

impl TryFrom<QExpansionJson> for QExpansion {
    type Error = Error;
    fn try_from(j: QExpansionJson) -> Result<Self> {
        let terms = coeff_map_from_json(j.coeffs)?;
        let q = QExpansion::from_terms(j.level, j.precision, terms)?;
        Ok(q)
    }
}

// Keys are zero-padded so that lexicographic order (used by sorted-key JSON
// writers) matches numeric order.
fn coeff_map_to_json(m: &BTreeMap<usize, Cyclotomic>) -> BTreeMap<String, Cyclotomic> {
    m.iter().map(|(k, v)| (format!("{k:06}"), v.clone())).collect()
}

fn coeff_map_from_json(m: BTreeMap<String, Cyclotomic>) -> Result<Vec<(usize, Cyclotomic)>> {
    m.into_iter()
        .map(|(k, v)| {
            let e = k.parse::<usize>().map_err(|_| Error::Parse(format!("bad exponent key '{k}'")))?;
            Ok((e, v))
        })
        .collect()
}

/// A polynomial in `ρ` with q-expansion coefficients, of fixed weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "NearlyHolJson", into = "NearlyHolJson")]
pub struct NearlyHol {
    weight: i32,
    parts: Vec<QExpansion>,
}

impl NearlyHol {
    pub fn zero(weight: i32, level: u32, precision: usize) -> Self {
        NearlyHol { weight, parts: vec![QExpansion::zero(level, precision)] }
    }

    pub fn holomorphic(weight: i32, f: QExpansion) -> Self {
        NearlyHol { weight, parts: vec![f] }
    }

    /// From the `ρ^0, …, ρ^r` parts; all must share level and precision.
    pub fn from_parts(weight: i32, parts: Vec<QExpansion>) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Invalid("no parts".into()))?;
        let (level, precision) = (first.level, first.precision);
        for p in &parts {
            if p.level != level {
                return Err(Error::LevelMismatch(level, p.level));
            }
            if p.precision != precision {
                return Err(Error::Invalid("parts with different precision".into()));
            }
        }
        let mut f = NearlyHol { weight, parts };
        f.trim();
        Ok(f)
    }

    fn trim(&mut self) {
        while self.parts.len() > 1 && self.parts.last().is_some_and(QExpansion::is_zero) {
            self.parts.pop();
        }
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn depth(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn level(&self) -> u32 {
        self.parts[0].level
    }

    pub fn precision(&self) -> usize {
        self.parts[0].precision
    }

    pub fn parts(&self) -> &[QExpansion] {
        &self.parts
    }

    /// The `ρ^j` part (zero beyond the depth).
    pub fn part(&self, j: usize) -> QExpansion {
        self.parts.get(j).cloned().unwrap_or_else(|| QExpansion::zero(self.level(), self.precision()))
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(QExpansion::is_zero)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.depth() == 0
    }

    pub fn with_weight(mut self, weight: i32) -> Self {
        self.weight = weight;
        self
    }

    pub fn truncate(&self, precision: usize) -> Self {
        NearlyHol { weight: self.weight, parts: self.parts.iter().map(|p| p.truncate(precision)).collect() }
    }

    fn zip_parts(&self, other: &Self, f: impl Fn(&QExpansion, &QExpansion) -> Result<QExpansion>) -> Result<Self> {
        if self.level() != other.level() {
            return Err(Error::LevelMismatch(self.level(), other.level()));
        }
        if self.weight != other.weight && !self.is_zero() && !other.is_zero() {
            return Err(Error::Invalid(format!("adding weights {} and {}", self.weight, other.weight)));
        }
        let weight = if self.is_zero() { other.weight } else { self.weight };
        let precision = self.precision().min(other.precision());
        let n = self.parts.len().max(other.parts.len());
        let parts = (0..n)
            .map(|j| f(&self.part(j).truncate(precision), &other.part(j).truncate(precision)))
            .collect::<Result<Vec<_>>>()?;
        NearlyHol::from_parts(weight, parts)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_parts(other, QExpansion::try_add)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_parts(other, QExpansion::try_sub)
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        let mut f = NearlyHol { weight: self.weight, parts: self.parts.iter().map(|p| p.scale(c)).collect() };
        f.trim();
        f
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        let mut f = NearlyHol { weight: self.weight, parts: self.parts.iter().map(|p| p.scale_rational(r)).collect() };
        f.trim();
        f
    }

    /// Product: weights and depths add, parts convolve in `ρ`.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.level() != other.level() {
            return Err(Error::LevelMismatch(self.level(), other.level()));
        }
        let precision = self.precision().min(other.precision());
        let depth = self.depth() + other.depth();
        let mut parts = vec![QExpansion::zero(self.level(), precision); depth + 1];
        for (i, a) in self.parts.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.parts.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                parts[i + j] = parts[i + j].try_add(&a.try_mul(b)?)?;
            }
        }
        NearlyHol::from_parts(self.weight + other.weight, parts)
    }

    /// Normalized raising operator; weight `k + 2`, depth `r + 1`.
    pub fn del(&self) -> Self {
        let k = self.weight as i64;
        let r = self.depth();
        let parts = (0..=r + 1)
            .map(|j| {
                let mut p = self.part(j).derivative();
                if j >= 1 {
                    let c = Rational::from_int(k - j as i64 + 1);
                    p = &p + &self.part(j - 1).scale_rational(&c);
                }
                p
            })
            .collect();
        NearlyHol::from_parts(self.weight + 2, parts).expect("uniform parts")
    }

    /// Normalized lowering operator; weight `k - 2`, depth `r - 1`.
    pub fn lower(&self) -> Self {
        let r = self.depth();
        let parts: Vec<QExpansion> = if r == 0 {
            vec![QExpansion::zero(self.level(), self.precision())]
        } else {
            (0..r).map(|j| self.part(j + 1).scale_rational(&Rational::from_int(j as i64 + 1))).collect()
        };
        NearlyHol::from_parts(self.weight - 2, parts).expect("uniform parts")
    }

    /// Holomorphic projection.
    ///
    /// The coefficient of `q_N^m` (`m >= 1`) is
    /// `Σ_j (-m/N)^j (k-2-j)!/(k-2)! f_j(m)`; the constant term is `f_0(0)`.
    /// Defined for holomorphic input and for depth `r <= k - 2`.
    pub fn holomorphic_projection(&self) -> Result<QExpansion> {
        let r = self.depth();
        if r == 0 {
            return Ok(self.parts[0].clone());
        }
        let k = self.weight;
        if k - 2 < r as i32 {
            return Err(Error::UnsupportedWeightDepth { weight: k, depth: r });
        }
        let k2 = (k - 2) as u32;
        let fk2 = factorial(k2);
        let betas: Vec<Rational> = (0..=r).map(|j| &factorial(k2 - j as u32) / &fk2).collect();
        let n = self.level() as i64;
        let mut out = self.parts[0].clone();
        for (j, part) in self.parts.iter().enumerate().skip(1) {
            for (m, c) in part.terms() {
                if m == 0 {
                    continue;
                }
                let x = Rational::new(-(m as i64), n);
                let w = &x.pow(j as i32).unwrap() * &betas[j];
                out.add_at(m, &c.scale(&w));
            }
        }
        Ok(out)
    }

    pub fn level_raise(&self, level: u32) -> Result<Self> {
        let parts = self.parts.iter().map(|p| p.level_raise(level)).collect::<Result<Vec<_>>>()?;
        NearlyHol::from_parts(self.weight, parts)
    }
}

impl Neg for &NearlyHol {
    type Output = NearlyHol;
    fn neg(self) -> NearlyHol {
        NearlyHol { weight: self.weight, parts: self.parts.iter().map(|p| -p).collect() }
    }
}

series_ops!(NearlyHol; Add add try_add, Sub sub try_sub);

impl std::ops::Mul for &NearlyHol {
    type Output = NearlyHol;
    fn mul(self, rhs: &NearlyHol) -> NearlyHol {
        self.try_mul(rhs).expect("nearly holomorphic mul")
    }
}

#[derive(Serialize, Deserialize)]
struct NearlyHolJson {
    level: u32,
    precision: usize,
    weight: i32,
    parts: Vec<BTreeMap<String, Cyclotomic>>,
}

impl From<NearlyHol> for NearlyHolJson {
    fn from(f: NearlyHol) -> Self {
        NearlyHolJson {
            level: f.level(),
            precision: f.precision(),
            weight: f.weight,
            parts: f.parts.iter().map(|p| coeff_map_to_json(&p.coeffs)).collect(),
        }
    }
}

impl TryFrom<NearlyHolJson> for NearlyHol {
    type Error = Error;
    fn try_from(j: NearlyHolJson) -> Result<Self> {
        if j.parts.is_empty() {
            return Err(Error::Parse("nearly holomorphic series without parts".into()));
        }
        let parts = j
            .parts
            .into_iter()
            .map(|m| QExpansion::from_terms(j.level, j.precision, coeff_map_from_json(m)?))
            .collect::<Result<Vec<_>>>()?;
        NearlyHol::from_parts(j.weight, parts)
    }
}
