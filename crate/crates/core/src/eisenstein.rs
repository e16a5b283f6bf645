//! Normalized torsion Eisenstein series `ε_{k,c}` for `Γ(N)`.
//!
//! For `c = (c₁, c₂) ∈ (Z/N)²`, the coefficient of `q_N^n` (`n >= 1`) is
//!
//! ```text
//! (1/(k-1)!) [ Σ_{d|n, n/d ≡ c₁} d^{k-1} ζ^{c₂ d} + (-1)^k Σ_{d|n, n/d ≡ -c₁} d^{k-1} ζ^{-c₂ d} ]
//! ```
//!
//! with `ζ = e^{2πi/N}`. Weight 2 carries the extra `ρ`-part `-1`. The index
//! `c = 0` gives the level-one series `ε_k` re-expanded in `q_N`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{bernoulli_numbers, factorial, Cyclotomic, Rational};
use crate::error::{Error, Result};
use crate::qseries::{NearlyHol, QExpansion};

/// An element of `(Z/N)²`, stored reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TorsionIndex {
    pub level: u32,
    pub c1: u32,
    pub c2: u32,
}

impl TorsionIndex {
    pub fn new(level: u32, c1: i64, c2: i64) -> Self {
        let n = level as i64;
        TorsionIndex { level, c1: c1.rem_euclid(n) as u32, c2: c2.rem_euclid(n) as u32 }
    }

    pub fn zero(level: u32) -> Self {
        TorsionIndex { level, c1: 0, c2: 0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == 0 && self.c2 == 0
    }

    pub fn neg(&self) -> Self {
        Self::new(self.level, -(self.c1 as i64), -(self.c2 as i64))
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.level, other.level);
        Self::new(self.level, self.c1 as i64 + other.c1 as i64, self.c2 as i64 + other.c2 as i64)
    }

    /// The row vector `c · γ` reduced mod `N`.
    pub fn act(&self, g: &[[i64; 2]; 2]) -> Self {
        let (a, b) = (self.c1 as i64, self.c2 as i64);
        Self::new(self.level, a * g[0][0] + b * g[1][0], a * g[0][1] + b * g[1][1])
    }

    /// Representative of `{c, -c}`: the lexicographically smaller one.
    pub fn sign_class(&self) -> Self {
        let n = self.neg();
        if (n.c1, n.c2) < (self.c1, self.c2) {
            n
        } else {
            *self
        }
    }

    /// The same point of `Q²/Z²` at a multiple of the level.
    pub fn embed(&self, level: u32) -> Result<Self> {
        if !level.is_multiple_of(self.level) {
            return Err(Error::NotDivisible { from: self.level, to: level });
        }
        let s = level / self.level;
        Ok(TorsionIndex { level, c1: self.c1 * s, c2: self.c2 * s })
    }
}

/// Slash action on indices: `ε_{k,c} | γ = ε_{k, cγ}`.
pub fn slash_index(c: &TorsionIndex, g: &[[i64; 2]; 2]) -> TorsionIndex {
    c.act(g)
}

/// Divisor sum `σ_r(n)`.
pub fn sigma(r: u32, n: u64) -> u128 {
    (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| (d as u128).pow(r)).sum()
}

/// Numerator `A_k(w)` of the constant term `A_k(w)/(1-w)^k`, with
/// `A_1 = (1+w)/2` and `A_{k+1} = w(1-w)A_k' + k w A_k`.
fn a_poly(k: u32) -> Vec<Rational> {
    static CACHE: OnceLock<Mutex<Vec<Vec<Rational>>>> = OnceLock::new();
    let mut cache =
        CACHE.get_or_init(|| Mutex::new(vec![vec![Rational::new(1, 2), Rational::new(1, 2)]])).lock().unwrap();
    while cache.len() < k as usize {
        let j = cache.len() as i64;
        let a = cache.last().unwrap();
        let mut next = vec![Rational::ZERO; a.len() + 1];
        for (i, ai) in a.iter().enumerate() {
            // w(1-w) * i a_i w^{i-1} = i a_i (w^i - w^{i+1})
            let d = ai * &Rational::from_int(i as i64);
            next[i] += &d;
            next[i + 1] -= &d;
            next[i + 1] += &(ai * &Rational::from_int(j));
        }
        cache.push(next);
    }
    cache[k as usize - 1].clone()
}

/// Constant term (`ρ^0` part, `q_N^0`) of `ε_{k,c}`.
pub fn eis_constant(k: u32, c: &TorsionIndex) -> Result<Cyclotomic> {
    let level = c.level;
    if k == 0 {
        return Err(Error::Invalid("weight must be positive".into()));
    }
    if c.is_zero() {
        if k == 1 {
            return Err(Error::ZeroIndex);
        }
        if k % 2 == 1 {
            return Ok(Cyclotomic::zero(level));
        }
        let b = &bernoulli_numbers(k as usize)[k as usize];
        return Ok(Cyclotomic::from_rational(level, -(b / &factorial(k))));
    }
    if c.c1 != 0 {
        if k == 1 {
            return Ok(Cyclotomic::from_rational(
                level,
                Rational::new(1, 2) - Rational::new(c.c1 as i64, level as i64),
            ));
        }
        return Ok(Cyclotomic::zero(level));
    }
    let w = Cyclotomic::root_power(level, c.c2 as i64);
    let a = a_poly(k);
    let mut num = Cyclotomic::zero(level);
    let mut wp = Cyclotomic::one(level);
    for ai in &a {
        num += &wp.scale(ai);
        wp = &wp * &w;
    }
    let den = (Cyclotomic::one(level) - &w).pow(k);
    Ok(num.try_div(&den)?.scale(&factorial(k - 1).recip()?))
}

/// Coefficient of `q_N^n`, `n >= 1`, in the holomorphic part of `ε_{k,c}`.
pub fn eis_coefficient(k: u32, c: &TorsionIndex, n: u64) -> Cyclotomic {
    assert!(n >= 1);
    let level = c.level as u64;
    let sign: i64 = if k.is_multiple_of(2) { 1 } else { -1 };
    let mut terms: Vec<(i64, Rational)> = Vec::new();
    for d in (1..=n).filter(|d| n.is_multiple_of(*d)) {
        let m = (n / d) % level;
        let p = Rational::from_bigint(BigInt::from(d).pow(k - 1));
        if m == c.c1 as u64 {
            terms.push(((c.c2 as u64 * d % level) as i64, p.clone()));
        }
        if (m + c.c1 as u64).is_multiple_of(level) {
            terms.push((-((c.c2 as u64 * d % level) as i64), &p * &Rational::from_int(sign)));
        }
    }
    Cyclotomic::from_exponents(c.level, &terms).scale(&factorial(k - 1).recip().unwrap())
}

fn compute_series(k: u32, c: &TorsionIndex, precision: usize) -> Result<NearlyHol> {
    let level = c.level;
    let n = level as usize;
    let constant = eis_constant(k, c)?;
    // acc[m][e]: integer weight of ζ^e in the coefficient of q_N^m
    let mut acc: Vec<Vec<BigInt>> = vec![Vec::new(); precision];
    let sign = if k.is_multiple_of(2) { 1 } else { -1 };
    for d in 1..precision {
        let p = BigInt::from(d).pow(k - 1);
        let e = (c.c2 as usize * d) % n;
        let mut add = |m: usize, e: usize, s: i32| {
            let slot = &mut acc[m * d];
            if slot.is_empty() {
                *slot = vec![BigInt::zero(); n];
            }
            if s > 0 {
                slot[e] += &p;
            } else {
                slot[e] -= &p;
            }
        };
        let mut m = 1;
        while m * d < precision {
            let r = m % n;
            if r == c.c1 as usize {
                add(m, e, 1);
            }
            if (r + c.c1 as usize).is_multiple_of(n) {
                add(m, (n - e) % n, sign);
            }
            m += 1;
        }
    }
    let scale = factorial(k - 1).recip()?;
    let mut hol = QExpansion::zero(level, precision);
    if precision > 0 {
        hol.set(0, constant);
    }
    for (m, slot) in acc.into_iter().enumerate().skip(1) {
        if slot.is_empty() {
            continue;
        }
        let terms: Vec<(i64, Rational)> = slot
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(e, v)| (e as i64, Rational::from_bigint(v)))
            .collect();
        hol.set(m, Cyclotomic::from_exponents(level, &terms).scale(&scale));
    }
    if k == 2 {
        let rho = QExpansion::constant(Cyclotomic::from_int(level, -1), precision);
        NearlyHol::from_parts(2, vec![hol, rho])
    } else {
        Ok(NearlyHol::holomorphic(k as i32, hol))
    }
}

type SeriesKey = (u32, TorsionIndex, usize);

fn series_cache() -> &'static Mutex<HashMap<SeriesKey, Arc<OnceLock<Result<NearlyHol>>>>> {
    static CACHE: OnceLock<Mutex<HashMap<SeriesKey, Arc<OnceLock<Result<NearlyHol>>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `ε_{k,c}` modulo `q_N^precision`. Results are memoized per process.
pub fn eis_series(k: u32, c: &TorsionIndex, precision: usize) -> Result<NearlyHol> {
    let cell = {
        let mut map = series_cache().lock().unwrap();
        map.entry((k, *c, precision)).or_default().clone()
    };
    cell.get_or_init(|| compute_series(k, c, precision)).clone()
}

/// Level-one `ε_k` expanded in `q_N`.
pub fn level1_series(k: u32, level: u32, precision: usize) -> Result<NearlyHol> {
    eis_series(k, &TorsionIndex::zero(level), precision)
}

/// `℘̃_c = ε_{2,c} - ε_2`, holomorphic of weight 2.
pub fn wp_series(c: &TorsionIndex, precision: usize) -> Result<NearlyHol> {
    let a = eis_series(2, c, precision)?;
    let b = level1_series(2, c.level, precision)?;
    a.try_sub(&b)
}
