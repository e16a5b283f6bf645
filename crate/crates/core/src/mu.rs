//! The distribution `μ` on compact opens of `M₂(A_f)`, its `GL₂(Q)` action,
//! Manin-relation checks and evaluation on degree-zero divisors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{Cyclotomic, Rational};
use crate::bivariate::BiSeries;
use crate::cusp::{is_in_eisenstein_span, EisProductCombo, EisSpec, Membership};
use crate::eisenstein::TorsionIndex;
use crate::error::{Error, Result};
use crate::opens::{mat_det, mat_from_ints, torsion_point, CompactOpenM2, RatMat};

/// A value of `μ` with the Eisenstein-product combination it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MuValue {
    pub series: BiSeries,
    pub combo: EisProductCombo,
}

impl MuValue {
    pub fn level(&self) -> u32 {
        self.combo.level()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(MuValue { series: self.series.try_add(&other.series)?, combo: self.combo.try_add(&other.combo)? })
    }

    pub fn scale_int(&self, n: i64) -> Self {
        let c = Cyclotomic::from_int(self.level(), n);
        MuValue { series: self.series.scale(&c), combo: self.combo.scale(&c) }
    }

    /// Re-evaluates the provenance and compares with the stored series.
    pub fn provenance_consistent(&self) -> Result<bool> {
        let s = self.combo.evaluate(self.series.precision(), self.series.degree())?;
        Ok(s.agrees(&self.series))
    }
}

fn column_point(rep: &[Rational; 4], j: usize, alpha: &Rational) -> Result<TorsionIndex> {
    torsion_point(&[&rep[j] / alpha, &rep[2 + j] / alpha])
}

/// Least level at which every piece of `u` has its torsion points.
pub fn natural_level_m2(u: &CompactOpenM2) -> Result<u32> {
    let mut l = 1u32;
    for rep in u.reps() {
        for j in 0..2 {
            l = l.lcm(&column_point(rep, j, u.modulus())?.level);
        }
    }
    Ok(l)
}

/// The formal combination for `μ(U)` up to total degree `degree`.
pub fn mu_combo(u: &CompactOpenM2, level: u32, degree: u32) -> Result<EisProductCombo> {
    let alpha = u.modulus();
    let mut combo = EisProductCombo::new(level);
    for rep in u.reps() {
        let t1 = column_point(rep, 0, alpha)?.embed(level)?;
        let t2 = column_point(rep, 1, alpha)?.embed(level)?;
        for d in 0..=degree {
            for i in 0..=d {
                let j = d - i;
                // the lattice series has no X⁰ entry
                if (t1.is_zero() && i == 0) || (t2.is_zero() && j == 0) {
                    continue;
                }
                let s = alpha.pow(-(d as i32 + 2))?;
                let factors = vec![EisSpec { k: i + 1, c: t1 }, EisSpec { k: j + 1, c: t2 }];
                combo.add_term((i, j), factors, Cyclotomic::from_rational(level, s))?;
            }
        }
    }
    Ok(combo)
}

fn realize(combo: EisProductCombo, precision: usize, degree: u32) -> Result<MuValue> {
    let series = combo.evaluate(precision, degree)?;
    Ok(MuValue { series, combo })
}

/// `μ(U)` at the natural level.
pub fn mu_eval(u: &CompactOpenM2, precision: usize, degree: u32) -> Result<MuValue> {
    mu_eval_at(u, natural_level_m2(u)?, precision, degree)
}

/// `μ(U)` with indices embedded at `level`; precision counts powers of `q_level`.
pub fn mu_eval_at(u: &CompactOpenM2, level: u32, precision: usize, degree: u32) -> Result<MuValue> {
    realize(mu_combo(u, level, degree)?, precision, degree)
}

fn gl2_combo(rho: &RatMat, u: &CompactOpenM2, level: u32, degree: u32) -> Result<EisProductCombo> {
    let image = u.right_mul(rho)?;
    let det = mat_det(rho);
    let c = mu_combo(&image, level, degree)?.substitute(rho)?;
    Ok(c.scale(&Cyclotomic::from_rational(level, det)))
}

/// Level needed to evaluate `(ρμ)(U)`.
pub fn gl2_level(rho: &RatMat, u: &CompactOpenM2) -> Result<u32> {
    natural_level_m2(&u.right_mul(rho)?)
}

/// `(ρμ)(U)(X, Y) = det ρ · μ(Uρ)((X Y)ρ)`.
pub fn gl2_act(rho: &RatMat, u: &CompactOpenM2, level: u32, precision: usize, degree: u32) -> Result<MuValue> {
    realize(gl2_combo(rho, u, level, degree)?, precision, degree)
}

pub fn s_matrix() -> RatMat {
    mat_from_ints([[0, -1], [1, 0]])
}

pub fn r_matrix() -> RatMat {
    mat_from_ints([[0, -1], [1, -1]])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub monomial: [u32; 2],
    pub weight: u32,
    pub zero: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub membership: Option<Membership>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManinReport {
    pub relation: String,
    pub open: CompactOpenM2,
    pub level: u32,
    pub precision: usize,
    pub degree: u32,
    pub pass: bool,
    pub components: Vec<ComponentReport>,
}

fn common_level(u: &CompactOpenM2, mats: &[RatMat], level: Option<u32>) -> Result<u32> {
    let mut l = level.unwrap_or(1);
    for m in mats {
        l = l.lcm(&gl2_level(m, u)?);
    }
    Ok(l)
}

/// `μ(U) + (Sμ)(U) = 0`, checked as an exact identity of truncated series.
pub fn manin1_check(u: &CompactOpenM2, level: Option<u32>, precision: usize, degree: u32) -> Result<ManinReport> {
    let s = s_matrix();
    let level = common_level(u, &[mat_from_ints([[1, 0], [0, 1]]), s.clone()], level)?;
    let total = mu_eval_at(u, level, precision, degree)?.try_add(&gl2_act(&s, u, level, precision, degree)?)?;
    let mut components = Vec::new();
    for d in 0..=degree {
        for i in 0..=d {
            let f = total.series.coeff(i, d - i);
            components.push(ComponentReport {
                monomial: [i, d - i],
                weight: d + 2,
                zero: f.is_zero(),
                membership: None,
            });
        }
    }
    let pass = components.iter().all(|c| c.zero);
    Ok(ManinReport { relation: "man1".into(), open: u.clone(), level, precision, degree, pass, components })
}

/// The three-term sum `μ(U)(X,Y) + μ(UR)(Y,-X-Y) + μ(UR²)(-X-Y,X)`.
pub fn manin2_sum(u: &CompactOpenM2, level: u32, precision: usize, degree: u32) -> Result<MuValue> {
    let r = r_matrix();
    let r2 = crate::opens::mat_mul(&r, &r);
    let mut combo = mu_combo(u, level, degree)?;
    combo = combo.try_add(&gl2_combo(&r, u, level, degree)?)?;
    combo = combo.try_add(&gl2_combo(&r2, u, level, degree)?)?;
    realize(combo, precision, degree)
}

/// Each weight-`(d+2)` component of the three-term sum must be Eisenstein.
pub fn manin2_check(u: &CompactOpenM2, level: Option<u32>, precision: usize, degree: u32) -> Result<ManinReport> {
    let r = r_matrix();
    let r2 = crate::opens::mat_mul(&r, &r);
    let level = common_level(u, &[mat_from_ints([[1, 0], [0, 1]]), r, r2], level)?;
    let total = manin2_sum(u, level, precision, degree)?;
    let monos: Vec<(u32, u32)> = (0..=degree).flat_map(|d| (0..=d).map(move |i| (i, d - i))).collect();
    let components = monos
        .par_iter()
        .map(|&(i, j)| {
            let f = total.series.coeff(i, j);
            let weight = i + j + 2;
            let q = f.holomorphic_projection()?;
            let membership = if f.is_zero() { None } else { Some(is_in_eisenstein_span(&q, level, weight)?) };
            Ok(ComponentReport { monomial: [i, j], weight, zero: f.is_zero(), membership })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = components.iter().all(|c| c.zero || c.membership.as_ref().is_some_and(Membership::in_span));
    Ok(ManinReport { relation: "man2".into(), open: u.clone(), level, precision, degree, pass, components })
}

/// A point of `P¹(Q)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cusp {
    Infinity,
    Finite(Rational),
}

impl fmt::Display for Cusp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cusp::Infinity => write!(f, "oo"),
            Cusp::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for Cusp {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if matches!(s, "oo" | "inf" | "∞" | "infinity") {
            return Ok(Cusp::Infinity);
        }
        s.parse::<Rational>().map(Cusp::Finite)
    }
}

/// A degree-zero formal combination of cusps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DivisorPath {
    points: BTreeMap<Cusp, i64>,
}

impl DivisorPath {
    pub fn new(points: impl IntoIterator<Item = (Cusp, i64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (p, n) in points {
            *map.entry(p).or_insert(0) += n;
        }
        map.retain(|_, n| *n != 0);
        let deg: i64 = map.values().sum();
        if deg != 0 {
            return Err(Error::Invalid(format!("divisor has degree {deg}, expected 0")));
        }
        Ok(DivisorPath { points: map })
    }

    /// `{a} - {b}`.
    pub fn path(a: Cusp, b: Cusp) -> Self {
        Self::new([(a, 1), (b, -1)]).expect("degree zero")
    }

    /// `D_∞ = {∞} - {0}`.
    pub fn d_infinity() -> Self {
        Self::path(Cusp::Infinity, Cusp::Finite(Rational::ZERO))
    }

    pub fn points(&self) -> impl Iterator<Item = (&Cusp, i64)> {
        self.points.iter().map(|(c, n)| (c, *n))
    }

    /// `D = Σ nᵢ γᵢ D_∞` with `γᵢ` integral of determinant ±1.
    pub fn decompose(&self) -> BTreeMap<[[i64; 2]; 2], i64> {
        let mut out: BTreeMap<[[i64; 2]; 2], i64> = BTreeMap::new();
        for (c, n) in &self.points {
            if let Cusp::Finite(r) = c {
                for g in convergent_matrices(r) {
                    *out.entry(g).or_insert(0) += n;
                }
            }
        }
        out.retain(|_, n| *n != 0);
        out
    }
}

impl fmt::Display for DivisorPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.points.iter().map(|(c, n)| format!("{n}*{{{c}}}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Parses `"{1/2} - {0}"` or `"2*{1/3} - {oo} - {0}"`.
impl FromStr for DivisorPath {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad divisor: {s}"));
        let mut points = Vec::new();
        let mut rest = s.trim();
        let mut sign = 1i64;
        while !rest.is_empty() {
            if let Some(r) = rest.strip_prefix('+') {
                rest = r.trim_start();
                continue;
            }
            if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r.trim_start();
                continue;
            }
            let open = rest.find('{').ok_or_else(bad)?;
            let close = rest.find('}').ok_or_else(bad)?;
            let mult = rest[..open].trim().trim_end_matches('*').trim();
            let n: i64 = if mult.is_empty() { 1 } else { mult.parse().map_err(|_| bad())? };
            points.push((rest[open + 1..close].parse::<Cusp>()?, sign * n));
            sign = 1;
            rest = rest[close + 1..].trim_start();
        }
        Self::new(points)
    }
}

/// `{r} - {∞} = Σ_k g_k D_∞` with `g_k = (p_k p_{k-1}; q_k q_{k-1})` from
/// floor-based convergents and `p_{-1}/q_{-1} = 1/0`.
pub fn convergent_matrices(r: &Rational) -> Vec<[[i64; 2]; 2]> {
    let (mut pm2, mut qm2, mut pm1, mut qm1) = (0i64, 1i64, 1i64, 0i64);
    let mut x = r.clone();
    let mut out = Vec::new();
    loop {
        let a = x.floor().to_i64().expect("partial quotient fits i64");
        let (p, q) = (a * pm1 + pm2, a * qm1 + qm2);
        out.push([[p, pm1], [q, qm1]]);
        (pm2, qm2, pm1, qm1) = (pm1, qm1, p, q);
        let frac = &x - &Rational::from_int(a);
        if frac.is_zero() {
            return out;
        }
        x = frac.recip().expect("nonzero");
    }
}

/// `Σ nᵢ (γᵢ μ)(U)` over the unimodular decomposition of `D`.
pub fn symbol_eval(
    d: &DivisorPath,
    u: &CompactOpenM2,
    level: Option<u32>,
    precision: usize,
    degree: u32,
) -> Result<MuValue> {
    let parts = d.decompose();
    let mats: Vec<RatMat> = parts.keys().map(|g| mat_from_ints(*g)).collect();
    let level = common_level(u, &mats, level)?;
    let mut combo = EisProductCombo::new(level);
    for (g, n) in &parts {
        let c = gl2_combo(&mat_from_ints(*g), u, level, degree)?;
        combo = combo.try_add(&c.scale(&Cyclotomic::from_int(level, *n)))?;
    }
    realize(combo, precision, degree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn open(s: &str) -> CompactOpenM2 {
        s.parse().unwrap()
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn product_entry_needs_no_projection() {
        let u = open("0,0,1/5,2/5 mod 1");
        let v = mu_eval(&u, 12, 1).unwrap();
        let a = crate::eisenstein::eis_series(1, &TorsionIndex::new(5, 0, 1), 12).unwrap();
        let b = crate::eisenstein::eis_series(1, &TorsionIndex::new(5, 0, 2), 12).unwrap();
        assert_eq!(v.series.coeff(0, 0), a.try_mul(&b).unwrap());
        assert!(v.provenance_consistent().unwrap());
    }

    #[test]
    fn lattice_constant_entry_vanishes() {
        let u = open("0,0,0,0 mod 1");
        let v = mu_eval(&u, 8, 2).unwrap();
        assert!(v.series.coeff(0, 0).is_zero());
        assert!(!v.series.coeff(1, 1).is_zero());
    }

    #[test]
    fn distribution_refinement() {
        for (s, p) in [("0,0,0,0 mod 1", 2), ("0,0,1/3,1/3 mod 1", 2), ("1/2,0,0,1/2 mod 1", 3)] {
            let u = open(s);
            let deg = 2;
            let pieces = u.refine(p);
            let mut level = natural_level_m2(&u).unwrap();
            for q in &pieces {
                level = level.lcm(&natural_level_m2(q).unwrap());
            }
            let whole = mu_eval_at(&u, level, 12, deg).unwrap();
            let mut sum = MuValue { series: BiSeries::zero(level, 12, deg, 2), combo: EisProductCombo::new(level) };
            for q in &pieces {
                sum = sum.try_add(&mu_eval_at(q, level, 12, deg).unwrap()).unwrap();
            }
            assert!(sum.series.agrees(&whole.series), "{s} refined by {p}");
        }
    }

    #[test]
    fn identity_action() {
        let u = open("1/3,0,1/3,0 mod 1");
        let id = mat_from_ints([[1, 0], [0, 1]]);
        let a = gl2_act(&id, &u, 3, 10, 2).unwrap();
        assert_eq!(a.series, mu_eval(&u, 10, 2).unwrap().series);
    }

    #[test]
    fn torus_invariance() {
        let u = open("0,0,1/5,2/5 mod 1");
        for (a, d) in [(2, 1), (1, -1)] {
            let rho = [[Rational::from_int(a), Rational::ZERO], [Rational::ZERO, Rational::from_int(d)]];
            let level = gl2_level(&rho, &u).unwrap().lcm(&5);
            let lhs = gl2_act(&rho, &u, level, 10, 2).unwrap();
            assert!(lhs.series.agrees(&mu_eval_at(&u, level, 10, 2).unwrap().series), "diag({a},{d})");
        }
    }

    #[test]
    fn manin1_cases() {
        for s in ["0,0,0,0 mod 1", "0,0,1/3,1/3 mod 1", "1/4,3/4,1/2,1/4 mod 1"] {
            let rep = manin1_check(&open(s), None, 10, 3).unwrap();
            assert!(rep.pass, "{s}");
        }
    }

    #[test]
    fn manin2_case_b() {
        let u = open("1/3,0,1/3,0 mod 1");
        let rep = manin2_check(&u, None, 40, 2).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn manin2_case_a_degree_zero_vanishes() {
        let u = open("0,0,0,0 mod 1");
        let rep = manin2_check(&u, None, 8, 2).unwrap();
        assert!(rep.pass);
        assert!(rep.components[0].zero);
    }

    #[test]
    fn convergents() {
        assert_eq!(convergent_matrices(&r(1, 2)), vec![[[0, 1], [1, 0]], [[1, 0], [2, 1]]]);
        for x in [r(7, 5), r(-3, 7), r(13, 1), r(0, 1)] {
            let ms = convergent_matrices(&x);
            let last = ms.last().unwrap();
            assert_eq!(Rational::new(last[0][0], last[1][0]), x);
            for m in &ms {
                assert_eq!((m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs(), 1);
            }
        }
    }

    #[test]
    fn divisor_parsing() {
        let d: DivisorPath = "{1/2} - {0}".parse().unwrap();
        assert_eq!(d, DivisorPath::path(Cusp::Finite(r(1, 2)), Cusp::Finite(Rational::ZERO)));
        assert!("{1/2}".parse::<DivisorPath>().is_err());
        let e: DivisorPath = "2*{1/3} - {oo} - {0}".parse().unwrap();
        assert_eq!(e.points().count(), 3);
    }

    #[test]
    fn symbols_on_simple_paths() {
        let u = open("0,0,1/5,2/5 mod 1");
        let (prec, deg) = (8, 2);
        let base = mu_eval(&u, prec, deg).unwrap();
        assert!(symbol_eval(&DivisorPath::d_infinity(), &u, None, prec, deg).unwrap().series.agrees(&base.series));
        let back = DivisorPath::path(Cusp::Finite(Rational::ZERO), Cusp::Infinity);
        assert!(symbol_eval(&back, &u, None, prec, deg).unwrap().series.agrees(&base.series.neg()));
        let half = DivisorPath::path(Cusp::Finite(r(1, 2)), Cusp::Finite(Rational::ZERO));
        let g = mat_from_ints([[1, 0], [2, 1]]);
        let level = gl2_level(&g, &u).unwrap().lcm(&5);
        let direct = gl2_act(&g, &u, level, prec, deg).unwrap();
        assert!(symbol_eval(&half, &u, Some(level), prec, deg).unwrap().series.agrees(&direct.series));
    }
}
