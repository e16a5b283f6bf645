//! Truncated power series in two variables `X, Y` with nearly-holomorphic
//! coefficients.
//!
//! A series carries a weight offset `w`: the coefficient of `X^i Y^j` has
//! weight `w + i + j`. It is known modulo terms of total degree above
//! `degree` and modulo `q_N^precision`.

use std::collections::BTreeMap;

use crate::arith::{binomial, Cyclotomic, Rational};
use crate::eisenstein::{eis_series, level1_series, wp_series, TorsionIndex};
use crate::error::{Error, Result};
use crate::qseries::{NearlyHol, QExpansion};

/// A 2×2 rational matrix acting on the row vector `(X Y)`.
pub type LinearSub = [[Rational; 2]; 2];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiSeries {
    level: u32,
    precision: usize,
    degree: u32,
    offset: i32,
    coeffs: BTreeMap<(u32, u32), NearlyHol>,
}

impl BiSeries {
    pub fn zero(level: u32, precision: usize, degree: u32, offset: i32) -> Self {
        BiSeries { level, precision, degree, offset, coeffs: BTreeMap::new() }
    }

    /// `Σ_n entries[n] X^n`, known up to degree `entries.len() - 1`.
    pub fn from_x(level: u32, precision: usize, offset: i32, entries: Vec<NearlyHol>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Invalid("empty Taylor package".into()));
        }
        let degree = entries.len() as u32 - 1;
        let mut s = Self::zero(level, precision, degree, offset);
        for (n, e) in entries.into_iter().enumerate() {
            s.add_term(n as u32, 0, e)?;
        }
        Ok(s)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn offset(&self) -> i32 {
        self.offset
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), &NearlyHol)> {
        self.coeffs.iter().map(|(k, v)| (*k, v))
    }

    /// Coefficient of `X^i Y^j`.
    pub fn coeff(&self, i: u32, j: u32) -> NearlyHol {
        self.coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| NearlyHol::zero(self.offset + (i + j) as i32, self.level, self.precision))
    }

    /// Coefficients of the degree-`d` part, `X^d, X^{d-1} Y, …, Y^d`.
    pub fn homogeneous(&self, d: u32) -> Vec<NearlyHol> {
        (0..=d).map(|j| self.coeff(d - j, j)).collect()
    }

    /// Adds `c X^i Y^j`; terms beyond the degree are dropped.
    pub fn add_term(&mut self, i: u32, j: u32, c: NearlyHol) -> Result<()> {
        if i + j > self.degree || c.is_zero() {
            return Ok(());
        }
        if c.level() != self.level {
            return Err(Error::LevelMismatch(self.level, c.level()));
        }
        let c = if c.precision() > self.precision { c.truncate(self.precision) } else { c };
        if c.precision() < self.precision {
            return Err(Error::InsufficientPrecision { have: c.precision(), need: self.precision });
        }
        let sum = match self.coeffs.remove(&(i, j)) {
            Some(old) => old.try_add(&c)?,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert((i, j), sum);
        }
        Ok(())
    }

    pub fn truncate(&self, degree: u32, precision: usize) -> Self {
        let degree = degree.min(self.degree);
        let precision = precision.min(self.precision);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|((i, j), _)| i + j <= degree)
            .map(|(k, v)| (*k, v.truncate(precision)))
            .filter(|(_, v)| !v.is_zero())
            .collect();
        BiSeries { level: self.level, precision, degree, offset: self.offset, coeffs }
    }

    /// Equality up to the common truncation.
    pub fn agrees(&self, other: &Self) -> bool {
        let d = self.degree.min(other.degree);
        let p = self.precision.min(other.precision);
        self.level == other.level && self.truncate(d, p).coeffs == other.truncate(d, p).coeffs
    }

    fn combine(&self, other: &Self, sign: i64) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        if self.offset != other.offset && !self.is_zero() && !other.is_zero() {
            return Err(Error::Invalid(format!("weight offsets {} and {}", self.offset, other.offset)));
        }
        let offset = if self.is_zero() { other.offset } else { self.offset };
        let mut out = self.truncate(other.degree, other.precision);
        out.offset = offset;
        let r = Rational::from_int(sign);
        for ((i, j), c) in &other.coeffs {
            out.add_term(*i, *j, c.truncate(out.precision).scale_rational(&r))?;
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    fn map_coeffs(&self, f: impl Fn(&NearlyHol) -> NearlyHol) -> Self {
        let coeffs = self.coeffs.iter().map(|(k, v)| (*k, f(v))).filter(|(_, v)| !v.is_zero()).collect();
        BiSeries { coeffs, ..self.clone_shape() }
    }

    fn clone_shape(&self) -> Self {
        BiSeries::zero(self.level, self.precision, self.degree, self.offset)
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        self.map_coeffs(|v| v.scale(c))
    }

    pub fn scale_rational(&self, r: &Rational) -> Self {
        self.map_coeffs(|v| v.scale_rational(r))
    }

    pub fn neg(&self) -> Self {
        self.scale_rational(&Rational::from_int(-1))
    }

    /// Multiplies every coefficient by the nearly-holomorphic `f`; the weight
    /// offset grows by the weight of `f`.
    pub fn scale_series(&self, f: &NearlyHol) -> Result<Self> {
        let mut out = self.clone_shape();
        out.offset += f.weight();
        out.precision = out.precision.min(f.precision());
        for (k, v) in &self.coeffs {
            out.add_term(k.0, k.1, v.try_mul(f)?)?;
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.mul_filtered(other, |_| true, self.degree.min(other.degree))
    }

    /// The degree-`d` part of the product only.
    pub fn mul_slice(&self, other: &Self, d: u32) -> Result<Self> {
        if d > self.degree.min(other.degree) {
            return Err(Error::DegreeOverflow(d));
        }
        self.mul_filtered(other, |t| t == d, d)
    }

    fn mul_filtered(&self, other: &Self, keep: impl Fn(u32) -> bool, degree: u32) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        let precision = self.precision.min(other.precision);
        let mut out = BiSeries::zero(self.level, precision, degree, self.offset + other.offset);
        for ((i1, j1), a) in &self.coeffs {
            for ((i2, j2), b) in &other.coeffs {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j <= degree && keep(i + j) {
                    out.add_term(i, j, a.truncate(precision).try_mul(&b.truncate(precision))?)?;
                }
            }
        }
        Ok(out)
    }

    /// Substitutes `(X Y) ↦ (X Y) m`, i.e. `X ↦ m₀₀X + m₁₀Y`, `Y ↦ m₀₁X + m₁₁Y`.
    pub fn substitute(&self, m: &LinearSub) -> Result<Self> {
        let lx = [m[0][0].clone(), m[1][0].clone()];
        let ly = [m[0][1].clone(), m[1][1].clone()];
        let mut out = self.clone_shape();
        for ((i, j), c) in &self.coeffs {
            // (aX + bY)^i (cX + dY)^j
            let p = poly_mul(&linear_power(&lx, *i), &linear_power(&ly, *j));
            for (t, r) in p.iter().enumerate() {
                if !r.is_zero() {
                    let d = i + j;
                    out.add_term(d - t as u32, t as u32, c.scale_rational(r))?;
                }
            }
        }
        Ok(out)
    }

    pub fn substitute_int(&self, m: [[i64; 2]; 2]) -> Result<Self> {
        let r = |v: i64| Rational::from_int(v);
        self.substitute(&[[r(m[0][0]), r(m[0][1])], [r(m[1][0]), r(m[1][1])]])
    }

    /// `X ↔ Y`.
    pub fn swap(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|((i, j), v)| ((*j, *i), v.clone())).collect();
        BiSeries { coeffs, ..self.clone_shape() }
    }

    pub fn d_x(&self) -> Result<Self> {
        let mut out = self.clone_shape();
        out.degree = self.degree.saturating_sub(1);
        out.offset += 1;
        for ((i, j), c) in &self.coeffs {
            if *i > 0 {
                out.add_term(i - 1, *j, c.scale_rational(&Rational::from_int(*i as i64)))?;
            }
        }
        Ok(out)
    }

    /// Termwise antiderivative in `X` with zero constant of integration.
    pub fn int_x(&self) -> Result<Self> {
        let mut out = self.clone_shape();
        out.degree += 1;
        out.offset -= 1;
        for ((i, j), c) in &self.coeffs {
            out.add_term(i + 1, *j, c.scale_rational(&Rational::new(1, *i as i64 + 1)))?;
        }
        Ok(out)
    }

    /// Exact division by `X`; fails if a term free of `X` is present.
    pub fn div_x(&self) -> Result<Self> {
        let mut out = self.clone_shape();
        out.degree = self.degree.checked_sub(1).ok_or(Error::NonzeroRemainder)?;
        out.offset += 1;
        for ((i, j), c) in &self.coeffs {
            if *i == 0 {
                return Err(Error::NonzeroRemainder);
            }
            out.add_term(i - 1, *j, c.clone())?;
        }
        Ok(out)
    }

    pub fn div_y(&self) -> Result<Self> {
        Ok(self.swap().div_x()?.swap())
    }

    /// Exact division by `aX + bY` with `a ≠ 0`, slice by slice.
    pub fn div_linear(&self, a: &Rational, b: &Rational) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut out = self.clone_shape();
        out.degree = self.degree.checked_sub(1).ok_or(Error::NonzeroRemainder)?;
        out.offset += 1;
        let inv = a.recip()?;
        for d in 0..=self.degree {
            // slice coefficients by power of Y: Σ_t s_t X^{d-t} Y^t
            let mut rem: Vec<NearlyHol> = (0..=d).map(|t| self.coeff(d - t, t)).collect();
            if rem.iter().all(NearlyHol::is_zero) {
                continue;
            }
            if d == 0 {
                return Err(Error::NonzeroRemainder);
            }
            for t in 0..d as usize {
                let q = rem[t].scale_rational(&inv);
                rem[t + 1] = rem[t + 1].try_sub(&q.scale_rational(b))?;
                out.add_term(d - 1 - t as u32, t as u32, q)?;
            }
            if !rem[d as usize].is_zero() {
                return Err(Error::NonzeroRemainder);
            }
        }
        Ok(out)
    }

    /// Coefficientwise raising operator.
    pub fn del(&self) -> Self {
        let mut out = self.map_coeffs(NearlyHol::del);
        out.offset += 2;
        out
    }

    /// Coefficientwise holomorphic projection.
    pub fn holomorphic_projection(&self) -> Result<Self> {
        let mut out = self.clone_shape();
        for ((i, j), c) in &self.coeffs {
            let h = c.holomorphic_projection()?;
            out.add_term(*i, *j, NearlyHol::holomorphic(c.weight(), h))?;
        }
        Ok(out)
    }

    pub fn level_raise(&self, level: u32) -> Result<Self> {
        let mut out = BiSeries::zero(level, 0, self.degree, self.offset);
        out.precision = self.precision * (level / self.level) as usize;
        for ((i, j), c) in &self.coeffs {
            out.add_term(*i, *j, c.level_raise(level)?)?;
        }
        Ok(out)
    }

    /// Keeps only the degree-`d` part.
    pub fn slice(&self, d: u32) -> Self {
        let coeffs = self.coeffs.iter().filter(|((i, j), _)| i + j == d).map(|(k, v)| (*k, v.clone())).collect();
        BiSeries { coeffs, ..self.clone_shape() }
    }
}

/// `{"level", "precision", "degree", "offset", "coeffs": {"i,j": series}}`.
impl serde::Serialize for BiSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coeffs: BTreeMap<String, &NearlyHol> =
            self.coeffs.iter().map(|((i, j), f)| (format!("{i},{j}"), f)).collect();
        let mut st = s.serialize_struct("BiSeries", 5)?;
        st.serialize_field("coeffs", &coeffs)?;
        st.serialize_field("degree", &self.degree)?;
        st.serialize_field("level", &self.level)?;
        st.serialize_field("offset", &self.offset)?;
        st.serialize_field("precision", &self.precision)?;
        st.end()
    }
}

fn poly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

/// Coefficients of `(aX + bY)^n` by power of `Y`.
fn linear_power(l: &[Rational; 2], n: u32) -> Vec<Rational> {
    (0..=n)
        .map(|t| {
            let c = binomial(n, t);
            &(&c * &l[0].pow((n - t) as i32).unwrap()) * &l[1].pow(t as i32).unwrap()
        })
        .collect()
}

macro_rules! bi_ops {
    ($($tr:ident $m:ident $t:ident),*) => {$(
        impl<'a> std::ops::$tr<&'a BiSeries> for &'a BiSeries {
            type Output = BiSeries;
            fn $m(self, rhs: &BiSeries) -> BiSeries { self.$t(rhs).expect(concat!("bivariate ", stringify!($m))) }
        }
    )*};
}
bi_ops!(Add add try_add, Sub sub try_sub, Mul mul try_mul);

/// `Ẽ_c(X) = Σ_{n=0}^{D} ε_{n+1,c} X^n`, `c ≠ 0`.
pub fn taylor_e(c: &TorsionIndex, degree: u32, precision: usize) -> Result<BiSeries> {
    if c.is_zero() {
        return Err(Error::ZeroIndex);
    }
    let entries = (0..=degree).map(|n| eis_series(n + 1, c, precision)).collect::<Result<Vec<_>>>()?;
    BiSeries::from_x(c.level, precision, 1, entries)
}

/// Lattice analogue `F̃(X) = Σ_{n>=1} ε_{n+1} X^n` (the pole `1/X` removed).
pub fn taylor_f(level: u32, degree: u32, precision: usize) -> Result<BiSeries> {
    let entries = (0..=degree)
        .map(|n| if n == 0 { Ok(NearlyHol::zero(1, level, precision)) } else { level1_series(n + 1, level, precision) })
        .collect::<Result<Vec<_>>>()?;
    BiSeries::from_x(level, precision, 1, entries)
}

/// `Φ̃_m(X) = Σ_n C(m+n-1, n) ε_{m+n,c} X^n`.
pub fn taylor_phi(c: &TorsionIndex, m: u32, degree: u32, precision: usize) -> Result<BiSeries> {
    let entries = (0..=degree)
        .map(|n| Ok(eis_series(m + n, c, precision)?.scale_rational(&binomial(m + n - 1, n))))
        .collect::<Result<Vec<_>>>()?;
    BiSeries::from_x(c.level, precision, m as i32, entries)
}

/// `W̃_c(X)`: constant `℘̃_c` (zero for `c = 0`), then `(n+1) ε_{n+2,c} X^n`.
pub fn taylor_wp(c: &TorsionIndex, degree: u32, precision: usize) -> Result<BiSeries> {
    let entries = (0..=degree)
        .map(|n| {
            if n == 0 {
                if c.is_zero() {
                    Ok(NearlyHol::zero(2, c.level, precision))
                } else {
                    wp_series(c, precision)
                }
            } else {
                Ok(eis_series(n + 2, c, precision)?.scale_rational(&Rational::from_int(n as i64 + 1)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BiSeries::from_x(c.level, precision, 2, entries)
}

/// The one-variable series of a torsion point: `Ẽ_c` for `c ≠ 0`, `F̃` for `c = 0`.
pub fn taylor_point(c: &TorsionIndex, degree: u32, precision: usize) -> Result<BiSeries> {
    if c.is_zero() {
        taylor_f(c.level, degree, precision)
    } else {
        taylor_e(c, degree, precision)
    }
}

/// Constant bivariate series `f`.
pub fn constant(f: NearlyHol, degree: u32) -> Result<BiSeries> {
    let mut s = BiSeries::zero(f.level(), f.precision(), degree, f.weight());
    s.add_term(0, 0, f)?;
    Ok(s)
}

/// A homogeneous polynomial `Σ c X^i Y^j` with rational coefficients of weight 0.
pub fn polynomial(level: u32, precision: usize, degree: u32, terms: &[(u32, u32, Rational)]) -> Result<BiSeries> {
    let d = terms.first().map_or(0, |t| t.0 + t.1);
    if terms.iter().any(|t| t.0 + t.1 != d) {
        return Err(Error::Invalid("polynomial is not homogeneous".into()));
    }
    let mut s = BiSeries::zero(level, precision, degree, -(d as i32));
    for (i, j, c) in terms {
        let one = QExpansion::constant(Cyclotomic::from_rational(level, c.clone()), precision);
        s.add_term(*i, *j, NearlyHol::holomorphic(0, one))?;
    }
    Ok(s)
}
