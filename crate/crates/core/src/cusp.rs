//! Eisenstein spans and cusp parts for `Γ(N)`.
//!
//! Forms reach this module as formal combinations of Eisenstein products
//! ([`EisProductCombo`]). Slashing such a combination by `γ ∈ SL₂(Z)` only
//! permutes torsion indices, so constant terms at every cusp are exact.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::linalg::{solve_many, Solution};
use crate::arith::{Cyclotomic, Rational};
use crate::bivariate::BiSeries;
use crate::eisenstein::{eis_constant, eis_series, TorsionIndex};
use crate::error::{Error, Result};
use crate::opens::{mat_det, RatMat};
use crate::qseries::{NearlyHol, QExpansion};

/// Index of `Γ(N)` in `SL₂(Z)`: `N³ ∏_{p|N} (1 - 1/p²)`, and 1 for `N = 1`.
pub fn gamma_index(n: u32) -> u64 {
    if n == 1 {
        return 1;
    }
    let mut idx = (n as u64).pow(3);
    for p in prime_divisors(n) {
        idx = idx / (p * p) * (p * p - 1);
    }
    idx
}

fn prime_divisors(n: u32) -> Vec<u64> {
    let mut n = n as u64;
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `⌈k·[SL₂(Z):Γ(N)]/12⌉ + 1`, counted in powers of `q_N`.
pub fn sturm_bound(n: u32, k: u32) -> usize {
    (k as u64 * gamma_index(n)).div_ceil(12) as usize + 1
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a.signum() * a, a.signum(), 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Lifts a primitive pair mod `n` to coprime integers `(x', y')` and
/// returns `(x', y', u, v)` with `u x' + v y' = 1`.
fn lift_primitive(x: i64, y: i64, n: i64) -> (i64, i64, i64, i64) {
    if n == 1 {
        return (1, 0, 1, 0);
    }
    let mut yy = y.rem_euclid(n);
    if yy == 0 {
        yy = n;
    }
    let x0 = x.rem_euclid(n);
    let mut t = 0;
    loop {
        let xx = x0 + t * n;
        let (g, u, v) = ext_gcd(xx, yy);
        if g == 1 {
            return (xx, yy, u, v);
        }
        t += 1;
        assert!(t < 10 * n * n + 10, "pair is not primitive mod {n}");
    }
}

/// `γ ∈ SL₂(Z)` with first column `≡ (a, c) mod n`.
pub fn lift_column(a: i64, c: i64, n: u32) -> [[i64; 2]; 2] {
    let (x, y, u, v) = lift_primitive(a, c, n as i64);
    [[x, -v], [y, u]]
}

/// `γ ∈ SL₂(Z)` with bottom row `≡ (c, d) mod n`.
pub fn lift_row(c: i64, d: i64, n: u32) -> [[i64; 2]; 2] {
    let (x, y, u, v) = lift_primitive(c, d, n as i64);
    [[v, -u], [x, y]]
}

pub fn is_primitive(a: i64, b: i64, n: u32) -> bool {
    a.gcd(&b).gcd(&(n as i64)) == 1
}

/// One `SL₂(Z)` lift per cusp of `Γ(N)`: cusps are primitive pairs `±(a, c)`
/// mod `N`, the lift has first column `(a, c)`.
pub fn cusp_reps(n: u32) -> Vec<[[i64; 2]; 2]> {
    let mut out = Vec::new();
    for a in 0..n as i64 {
        for c in 0..n as i64 {
            if !is_primitive(a, c, n) {
                continue;
            }
            let t = TorsionIndex::new(n, a, c);
            if t.sign_class() == t {
                out.push(lift_column(a, c, n));
            }
        }
    }
    out
}

/// Dimension of the weight-`k` Eisenstein space of `Γ(N)`.
pub fn expected_eisenstein_dim(n: u32, k: u32) -> usize {
    let cusps = cusp_reps(n).len();
    match (n, k) {
        (1, k) => usize::from(k >= 4 && k % 2 == 0),
        (2, k) if k % 2 == 1 => 0,
        (_, 1) => cusps / 2,
        (_, 2) => cusps - 1,
        _ => cusps,
    }
}

/// Spanning set of the Eisenstein space: `ε_{k,c}` over nonzero `c` up to
/// sign, and `℘̃_c = ε_{2,c} - ε_2` in weight 2. Level one uses `ε_k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EisensteinBasis {
    pub level: u32,
    pub weight: u32,
    pub elements: Vec<TorsionIndex>,
}

impl EisensteinBasis {
    pub fn new(n: u32, k: u32) -> Self {
        let elements = if n == 1 {
            if k >= 4 && k.is_multiple_of(2) {
                vec![TorsionIndex::zero(1)]
            } else {
                vec![]
            }
        } else {
            let mut v = Vec::new();
            for a in 0..n as i64 {
                for b in 0..n as i64 {
                    let c = TorsionIndex::new(n, a, b);
                    if c.is_zero() || c.sign_class() != c || (k % 2 == 1 && c.neg() == c) {
                        continue;
                    }
                    v.push(c);
                }
            }
            v
        };
        EisensteinBasis { level: n, weight: k, elements }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// q-expansion of element `i` (holomorphic in all weights used).
    pub fn series(&self, i: usize, precision: usize) -> Result<QExpansion> {
        let c = &self.elements[i];
        let f = eis_series(self.weight, c, precision)?;
        if self.weight == 2 {
            let g = eis_series(2, &TorsionIndex::zero(self.level), precision)?;
            return Ok(f.try_sub(&g)?.part(0));
        }
        if !f.is_holomorphic() {
            return Err(Error::DepthNonzero(self.weight, f.depth() as u32));
        }
        Ok(f.part(0))
    }

    /// Constant term of element `i` slashed by `γ`.
    pub fn constant_at(&self, i: usize, g: &[[i64; 2]; 2]) -> Result<Cyclotomic> {
        let c = self.elements[i].act(g);
        let v = eis_constant(self.weight, &c)?;
        if self.weight == 2 {
            return Ok(v - eis_constant(2, &TorsionIndex::zero(self.level))?);
        }
        Ok(v)
    }
}

/// `ε_{k,c}` as a formal factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EisSpec {
    pub k: u32,
    pub c: TorsionIndex,
}

pub type Monomial = (u32, u32);

/// `Σ coefficient · H(Π factors) · X^i Y^j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EisProductCombo {
    level: u32,
    terms: BTreeMap<Monomial, BTreeMap<Vec<EisSpec>, Cyclotomic>>,
}

impl EisProductCombo {
    pub fn new(level: u32) -> Self {
        EisProductCombo { level, terms: BTreeMap::new() }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.keys().copied()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &Vec<EisSpec>, &Cyclotomic)> {
        self.terms.iter().flat_map(|(m, t)| t.iter().map(move |(f, c)| (*m, f, c)))
    }

    pub fn add_term(&mut self, mono: Monomial, mut factors: Vec<EisSpec>, coeff: Cyclotomic) -> Result<()> {
        if coeff.level() != self.level {
            return Err(Error::LevelMismatch(self.level, coeff.level()));
        }
        if let Some(f) = factors.iter().find(|f| f.c.level != self.level) {
            return Err(Error::LevelMismatch(self.level, f.c.level));
        }
        if coeff.is_zero() {
            return Ok(());
        }
        factors.sort();
        let slot = self.terms.entry(mono).or_default();
        match slot.get_mut(&factors) {
            Some(v) => {
                *v += &coeff;
                if v.is_zero() {
                    slot.remove(&factors);
                }
            }
            None => {
                slot.insert(factors, coeff);
            }
        }
        if slot.is_empty() {
            self.terms.remove(&mono);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (m, f, c) in other.terms() {
            out.add_term(m, f.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Cyclotomic) -> Self {
        let mut out = Self::new(self.level);
        for (m, f, v) in self.terms() {
            out.add_term(m, f.clone(), v * c).expect("same level");
        }
        out
    }

    /// Keeps the monomials of total degree `d`.
    pub fn slice(&self, d: u32) -> Self {
        let terms = self.terms.iter().filter(|(m, _)| m.0 + m.1 == d).map(|(m, t)| (*m, t.clone())).collect();
        EisProductCombo { level: self.level, terms }
    }

    /// The scalar combination at one monomial, placed at `(0, 0)`.
    pub fn component(&self, mono: Monomial) -> Self {
        let mut out = Self::new(self.level);
        if let Some(t) = self.terms.get(&mono) {
            out.terms.insert((0, 0), t.clone());
        }
        out
    }

    /// Substitutes `(X Y) ↦ (X Y) m` in the monomials.
    pub fn substitute(&self, m: &RatMat) -> Result<Self> {
        let mut out = Self::new(self.level);
        for ((i, j), f, c) in self.terms() {
            for (mono, r) in expand_monomial(i, j, m) {
                out.add_term(mono, f.clone(), c.scale(&r))?;
            }
        }
        Ok(out)
    }

    /// Slash by `γ ∈ SL₂(Z)`: each index `c` becomes `cγ`.
    pub fn slash(&self, g: &[[i64; 2]; 2]) -> Self {
        let mut out = Self::new(self.level);
        for (m, f, c) in self.terms() {
            let f = f.iter().map(|s| EisSpec { k: s.k, c: s.c.act(g) }).collect();
            out.add_term(m, f, c.clone()).expect("same level");
        }
        out
    }

    /// Re-expresses all indices and coefficients at a multiple of the level.
    pub fn embed(&self, level: u32) -> Result<Self> {
        let mut out = Self::new(level);
        for (m, f, c) in self.terms() {
            let f = f.iter().map(|s| Ok(EisSpec { k: s.k, c: s.c.embed(level)? })).collect::<Result<Vec<_>>>()?;
            out.add_term(m, f, c.embed(level)?)?;
        }
        Ok(out)
    }

    /// Weight of the terms at `mono`, if any.
    pub fn weight(&self, mono: Monomial) -> Option<u32> {
        self.terms.get(&mono).and_then(|t| t.keys().next()).map(|f| f.iter().map(|s| s.k).sum())
    }

    /// `H` of the scalar combination at `mono`.
    pub fn evaluate_monomial(&self, mono: Monomial, precision: usize) -> Result<NearlyHol> {
        let Some(t) = self.terms.get(&mono) else {
            let w = 2 + (mono.0 + mono.1) as i32;
            return Ok(NearlyHol::zero(w, self.level, precision));
        };
        let mut acc: Option<NearlyHol> = None;
        for (factors, c) in t {
            let mut prod: Option<NearlyHol> = None;
            for s in factors {
                let f = eis_series(s.k, &s.c, precision)?;
                prod = Some(match prod {
                    None => f,
                    Some(p) => p.try_mul(&f)?,
                });
            }
            let p = prod.ok_or_else(|| Error::Invalid("term without factors".into()))?;
            let h = NearlyHol::holomorphic(p.weight(), p.holomorphic_projection()?).scale(c);
            acc = Some(match acc {
                None => h,
                Some(a) => a.try_add(&h)?,
            });
        }
        Ok(acc.unwrap())
    }

    /// All monomials up to `degree`, as a bivariate series with weight offset 2.
    pub fn evaluate(&self, precision: usize, degree: u32) -> Result<BiSeries> {
        let mut out = BiSeries::zero(self.level, precision, degree, 2);
        let monos: Vec<Monomial> = self.monomials().filter(|m| m.0 + m.1 <= degree).collect();
        let vals = monos.par_iter().map(|m| self.evaluate_monomial(*m, precision)).collect::<Result<Vec<_>>>()?;
        for (m, v) in monos.into_iter().zip(vals) {
            out.add_term(m.0, m.1, v)?;
        }
        Ok(out)
    }

    /// Constant term at each cusp of the scalar combination at `mono`.
    pub fn cusp_constants(&self, mono: Monomial, cusps: &[[[i64; 2]; 2]]) -> Result<Vec<Cyclotomic>> {
        let zero = Cyclotomic::zero(self.level);
        let Some(t) = self.terms.get(&mono) else {
            return Ok(vec![zero; cusps.len()]);
        };
        cusps
            .iter()
            .map(|g| {
                let mut total = zero.clone();
                for (factors, c) in t {
                    let mut v = c.clone();
                    for s in factors {
                        v = &v * &eis_constant(s.k, &s.c.act(g))?;
                        if v.is_zero() {
                            break;
                        }
                    }
                    total += &v;
                }
                Ok(total)
            })
            .collect()
    }
}

/// `(X Y) m` raised to the monomial `X^i Y^j`, expanded.
pub fn expand_monomial(i: u32, j: u32, m: &RatMat) -> Vec<(Monomial, Rational)> {
    let x = [m[0][0].clone(), m[1][0].clone()];
    let y = [m[0][1].clone(), m[1][1].clone()];
    let pow = |l: &[Rational; 2], n: u32| -> Vec<Rational> {
        (0..=n)
            .map(|t| {
                &(&crate::arith::binomial(n, t) * &l[0].pow((n - t) as i32).unwrap()) * &l[1].pow(t as i32).unwrap()
            })
            .collect()
    };
    let (px, py) = (pow(&x, i), pow(&y, j));
    let d = i + j;
    let mut acc = vec![Rational::ZERO; d as usize + 1];
    for (a, u) in px.iter().enumerate() {
        for (b, v) in py.iter().enumerate() {
            acc[a + b] += &(u * v);
        }
    }
    acc.into_iter().enumerate().filter(|(_, r)| !r.is_zero()).map(|(t, r)| ((d - t as u32, t as u32), r)).collect()
}

/// `det(m)` as a rational, re-exported for callers assembling GL₂ actions.
pub fn det(m: &RatMat) -> Rational {
    mat_det(m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipOutcome {
    InSpan,
    NotInSpan,
    /// Not in the span of the computed basis, whose rank is below the
    /// expected Eisenstein dimension.
    SpanPossiblyIncomplete,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Membership {
    pub outcome: MembershipOutcome,
    /// Coefficients on the basis elements when in span.
    pub certificate: Option<Vec<Cyclotomic>>,
    pub basis: Vec<TorsionIndex>,
    pub rank: usize,
    pub expected_dim: usize,
    pub sturm_bound: usize,
    pub checked_precision: usize,
}

impl Membership {
    pub fn in_span(&self) -> bool {
        self.outcome == MembershipOutcome::InSpan
    }
}

/// Decides `f ∈ E_k(Γ(N))` from the first `sturm_bound(N, k)` coefficients
/// and confirms a found certificate on every coefficient below the precision.
pub fn is_in_eisenstein_span(f: &QExpansion, n: u32, k: u32) -> Result<Membership> {
    let sturm = sturm_bound(n, k);
    if f.precision() < sturm {
        return Err(Error::InsufficientPrecision { have: f.precision(), need: sturm });
    }
    if f.level() != n {
        return Err(Error::LevelMismatch(n, f.level()));
    }
    let basis = EisensteinBasis::new(n, k);
    let prec = f.precision();
    let series = (0..basis.len()).into_par_iter().map(|i| basis.series(i, prec)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<Cyclotomic>> = (0..sturm).map(|m| series.iter().map(|s| s.coeff(m)).collect()).collect();
    let rhs: Vec<Cyclotomic> = (0..sturm).map(|m| f.coeff(m)).collect();
    let red = solve_many(n, &rows, &[rhs], None);
    let expected = expected_eisenstein_dim(n, k);
    let mut report = Membership {
        outcome: MembershipOutcome::NotInSpan,
        certificate: None,
        basis: basis.elements.clone(),
        rank: red.rank,
        expected_dim: expected,
        sturm_bound: sturm,
        checked_precision: prec,
    };
    let sol = red.solutions.into_iter().next().unwrap();
    match sol {
        Solution::Unique(x) => {
            let mut e = QExpansion::zero(n, prec);
            for (s, c) in series.iter().zip(&x) {
                if !c.is_zero() {
                    e = e.try_add(&s.scale(c))?;
                }
            }
            if e != *f {
                return Err(Error::InconsistentSystem(
                    "certificate agrees to the Sturm bound but not beyond; input is not a modular form of this weight"
                        .into(),
                ));
            }
            report.outcome = MembershipOutcome::InSpan;
            report.certificate = Some(x);
        }
        Solution::Inconsistent => {
            if red.rank < expected {
                report.outcome = MembershipOutcome::SpanPossiblyIncomplete;
            }
        }
    }
    Ok(report)
}

/// Cusp parts of the scalar combinations at `monos`, all of weight `k`:
/// `H(combo) - e` with `e` Eisenstein matching every cusp constant.
/// `column_order` picks the pivot order in the (weight-2 rank-deficient)
/// constant-term system.
pub fn cusp_parts(
    combo: &EisProductCombo,
    monos: &[Monomial],
    k: u32,
    precision: usize,
    column_order: Option<&[usize]>,
) -> Result<Vec<QExpansion>> {
    let items: Vec<(&EisProductCombo, Monomial)> = monos.iter().map(|m| (combo, *m)).collect();
    cusp_parts_many(combo.level(), &items, k, precision, column_order)
}

/// [`cusp_parts`] over items drawn from several combinations of one level.
pub fn cusp_parts_many(
    n: u32,
    items: &[(&EisProductCombo, Monomial)],
    k: u32,
    precision: usize,
    column_order: Option<&[usize]>,
) -> Result<Vec<QExpansion>> {
    for (combo, m) in items {
        if combo.level() != n {
            return Err(Error::LevelMismatch(n, combo.level()));
        }
        if let Some(w) = combo.weight(*m) {
            if w != k {
                return Err(Error::Invalid(format!("monomial {m:?} has weight {w}, expected {k}")));
            }
        }
    }
    let cusps = cusp_reps(n);
    let basis = EisensteinBasis::new(n, k);
    let a: Vec<Vec<Cyclotomic>> = cusps
        .par_iter()
        .map(|g| (0..basis.len()).map(|i| basis.constant_at(i, g)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let rhs = items.par_iter().map(|(c, m)| c.cusp_constants(*m, &cusps)).collect::<Result<Vec<_>>>()?;
    let red = solve_many(n, &a, &rhs, column_order);
    let series = (0..basis.len()).into_par_iter().map(|i| basis.series(i, precision)).collect::<Result<Vec<_>>>()?;
    items
        .par_iter()
        .zip(red.solutions.into_par_iter())
        .map(|((combo, m), sol)| {
            let x = sol.ok().ok_or_else(|| {
                Error::InconsistentSystem(format!("no Eisenstein series matches the cusp constants at {m:?}"))
            })?;
            let mut f = combo.evaluate_monomial(*m, precision)?.holomorphic_projection()?;
            for (s, c) in series.iter().zip(&x) {
                if !c.is_zero() {
                    f = f.try_sub(&s.scale(c))?;
                }
            }
            Ok(f)
        })
        .collect()
}

pub fn cusp_part(combo: &EisProductCombo, mono: Monomial, k: u32, precision: usize) -> Result<QExpansion> {
    Ok(cusp_parts(combo, &[mono], k, precision, None)?.pop().unwrap())
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    k: u32,
    c: [u32; 2],
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coefficient: Cyclotomic,
    factors: Vec<FactorJson>,
    monomial: [u32; 2],
}

#[derive(Serialize, Deserialize)]
struct ComboJson {
    level: u32,
    terms: Vec<TermJson>,
}

impl Serialize for EisProductCombo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self
            .terms()
            .map(|(m, f, c)| TermJson {
                coefficient: c.clone(),
                factors: f.iter().map(|x| FactorJson { k: x.k, c: [x.c.c1, x.c.c2] }).collect(),
                monomial: [m.0, m.1],
            })
            .collect();
        ComboJson { level: self.level, terms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EisProductCombo {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ComboJson::deserialize(d)?;
        let mut out = EisProductCombo::new(j.level);
        for t in j.terms {
            if t.factors.is_empty() || t.factors.len() > 2 {
                return Err(D::Error::custom("a term needs one or two factors"));
            }
            let f = t
                .factors
                .iter()
                .map(|x| EisSpec { k: x.k, c: TorsionIndex::new(j.level, x.c[0] as i64, x.c[1] as i64) })
                .collect();
            out.add_term((t.monomial[0], t.monomial[1]), f, t.coefficient).map_err(D::Error::custom)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(k: u32, n: u32, a: i64, b: i64) -> EisSpec {
        EisSpec { k, c: TorsionIndex::new(n, a, b) }
    }

    #[test]
    fn sturm_values() {
        assert_eq!(sturm_bound(1, 12), 2);
        assert_eq!(sturm_bound(5, 2), 21);
        assert_eq!(sturm_bound(3, 4), 9);
        assert_eq!(sturm_bound(11, 2), 221);
    }

    #[test]
    fn cusp_counts() {
        assert_eq!(cusp_reps(1).len(), 1);
        assert_eq!(cusp_reps(2).len(), 3);
        assert_eq!(cusp_reps(3).len(), 4);
        assert_eq!(cusp_reps(4).len(), 6);
        assert_eq!(cusp_reps(5).len(), 12);
        assert_eq!(cusp_reps(11).len(), 60);
        for n in [2u32, 5, 6, 12] {
            for g in cusp_reps(n) {
                assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
            }
        }
    }

    #[test]
    fn lifts() {
        for n in [2u32, 5, 6, 9] {
            for c in 0..n as i64 {
                for d in 0..n as i64 {
                    if !is_primitive(c, d, n) {
                        continue;
                    }
                    let g = lift_row(c, d, n);
                    assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
                    assert_eq!(((g[1][0] - c) % n as i64, (g[1][1] - d) % n as i64), (0, 0));
                }
            }
        }
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(EisensteinBasis::new(5, 2).len(), 12);
        assert_eq!(EisensteinBasis::new(4, 4).len(), 9);
        assert_eq!(EisensteinBasis::new(4, 3).len(), 6);
        assert_eq!(EisensteinBasis::new(1, 2).len(), 0);
        assert_eq!(expected_eisenstein_dim(5, 2), 11);
        assert_eq!(expected_eisenstein_dim(3, 3), 4);
    }

    #[test]
    fn weight_one_square_is_eisenstein() {
        let c = TorsionIndex::new(5, 0, 1);
        let e = eis_series(1, &c, 30).unwrap();
        let sq = e.try_mul(&e).unwrap().part(0);
        let m = is_in_eisenstein_span(&sq, 5, 2).unwrap();
        assert!(m.in_span());
        assert_eq!(m.rank, 11);
        let zero = is_in_eisenstein_span(&QExpansion::zero(5, 30), 5, 2).unwrap();
        assert!(zero.certificate.unwrap().iter().all(Cyclotomic::is_zero));
        assert_eq!(
            is_in_eisenstein_span(&QExpansion::zero(5, 10), 5, 2).unwrap_err(),
            Error::InsufficientPrecision { have: 10, need: 21 }
        );
    }

    #[test]
    fn delta_is_not_eisenstein() {
        // q - 24 q² + 252 q³ at level one, weight 12
        let d =
            QExpansion::from_terms(1, 3, [(1, Cyclotomic::from_int(1, 1)), (2, Cyclotomic::from_int(1, -24))]).unwrap();
        let m = is_in_eisenstein_span(&d, 1, 12).unwrap();
        assert_eq!(m.outcome, MembershipOutcome::NotInSpan);
    }

    #[test]
    fn cusp_constants_at_infinity() {
        let n = 5;
        let mut combo = EisProductCombo::new(n);
        combo.add_term((0, 0), vec![spec(1, n, 0, 1), spec(1, n, 0, 2)], Cyclotomic::one(n)).unwrap();
        let id = [[1, 0], [0, 1]];
        let got = combo.cusp_constants((0, 0), &[id]).unwrap();
        let half = Cyclotomic::from_rational(n, Rational::new(1, 2));
        let l = |e: i64| {
            let w = Cyclotomic::root_power(n, e);
            &half + &w.try_div(&(Cyclotomic::one(n) - w.clone())).unwrap()
        };
        assert_eq!(got[0], l(1) * l(2));
    }

    #[test]
    fn weight_two_cusp_parts_vanish_at_level_five() {
        let n = 5;
        let mut combo = EisProductCombo::new(n);
        combo.add_term((0, 0), vec![spec(1, n, 0, 1), spec(1, n, 0, 2)], Cyclotomic::one(n)).unwrap();
        combo.add_term((1, 0), vec![spec(1, n, 1, 3), spec(1, n, 2, 2)], Cyclotomic::root_power(n, 1)).unwrap();
        let prec = sturm_bound(n, 2) + 8;
        for mono in [(0, 0), (1, 0)] {
            assert!(cusp_part(&combo.component(mono), (0, 0), 2, prec).unwrap().is_zero());
        }
    }

    #[test]
    fn pivot_order_does_not_change_cusp_part() {
        // level 11 weight 2: the cusp space is one-dimensional
        let n = 11;
        let mut combo = EisProductCombo::new(n);
        combo.add_term((0, 0), vec![spec(1, n, 0, 1), spec(1, n, 0, 3)], Cyclotomic::one(n)).unwrap();
        let prec = sturm_bound(n, 2) + 8;
        let b = EisensteinBasis::new(n, 2).len();
        let rev: Vec<usize> = (0..b).rev().collect();
        let a = cusp_parts(&combo, &[(0, 0)], 2, prec, None).unwrap();
        let r = cusp_parts(&combo, &[(0, 0)], 2, prec, Some(&rev)).unwrap();
        assert_eq!(a, r);
        assert!(!a[0].is_zero());
        let m = is_in_eisenstein_span(&a[0], n, 2).unwrap();
        assert!(!m.in_span());
    }

    #[test]
    fn substitution_and_slash() {
        let n = 5;
        let mut combo = EisProductCombo::new(n);
        combo.add_term((1, 0), vec![spec(2, n, 0, 1), spec(1, n, 0, 2)], Cyclotomic::one(n)).unwrap();
        let s = crate::opens::mat_from_ints([[0, -1], [1, 0]]);
        // X ↦ Y
        let t = combo.substitute(&s).unwrap();
        assert_eq!(t.monomials().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = [[0, -1], [1, 0]];
        let sl = combo.slash(&g);
        let f: Vec<_> = sl.terms().map(|(_, f, _)| f.clone()).collect();
        assert_eq!(f[0], vec![spec(1, n, 2, 0), spec(2, n, 1, 0)]);
    }

    #[test]
    fn combo_json_roundtrip() {
        let n = 3;
        let mut combo = EisProductCombo::new(n);
        combo.add_term((0, 1), vec![spec(1, n, 1, 0), spec(2, n, 0, 1)], Cyclotomic::root_power(n, 1)).unwrap();
        let s = serde_json::to_string(&combo).unwrap();
        let back: EisProductCombo = serde_json::from_str(&s).unwrap();
        assert_eq!(back, combo);
    }
}
