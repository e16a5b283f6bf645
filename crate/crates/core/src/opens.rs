//! Finite unions of cosets `β + αZ^D` in `Q^D`, for `D = 2` (vectors) and
//! `D = 4` (2×2 matrices, entries in row order `a11, a12, a21, a22`).
//!
//! The canonical form uses one modulus `α > 0` for all pieces, with every
//! representative reduced into `[0, α)^D`, and `α` as small as the set allows.
//! Two descriptions of the same set therefore canonicalize identically.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::Rational;
use crate::bivariate::{taylor_point, BiSeries};
use crate::eisenstein::TorsionIndex;
use crate::error::{Error, Result};

/// A rational 2×2 matrix `[[a, b], [c, d]]`.
pub type RatMat = [[Rational; 2]; 2];

/// Default bound on the number of residues produced by [`right_mul`].
pub const INDEX_GUARD: u64 = 10_000;

pub fn mat_from_ints(m: [[i64; 2]; 2]) -> RatMat {
    m.map(|row| row.map(Rational::from_int))
}

pub fn mat_mul(a: &RatMat, b: &RatMat) -> RatMat {
    let e = |i: usize, j: usize| &(&a[i][0] * &b[0][j]) + &(&a[i][1] * &b[1][j]);
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

pub fn mat_det(a: &RatMat) -> Rational {
    &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0])
}

pub fn mat_inv(a: &RatMat) -> Result<RatMat> {
    let d = mat_det(a);
    if d.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let r = d.recip()?;
    Ok([[&a[1][1] * &r, -(&a[0][1] * &r)], [-(&a[1][0] * &r), &a[0][0] * &r]])
}

fn prime_factors(mut n: u64) -> Vec<u64> {
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

fn reduce_mod(x: &Rational, alpha: &Rational) -> Rational {
    let q = Rational::from_bigint((x / alpha).floor());
    x - &(&q * alpha)
}

/// Denominator lcm of a list of rationals, as a rational.
fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Rational {
    let l = xs.into_iter().fold(num_bigint::BigInt::from(1), |acc, x| acc.lcm(&x.denom()));
    Rational::from_bigint(l)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CosetUnion<const D: usize> {
    modulus: Rational,
    reps: BTreeSet<[Rational; D]>,
}

pub type CompactOpenQ2 = CosetUnion<2>;
pub type CompactOpenM2 = CosetUnion<4>;

impl<const D: usize> CosetUnion<D> {
    /// The empty set.
    pub fn empty() -> Self {
        CosetUnion { modulus: Rational::ONE, reps: BTreeSet::new() }
    }

    /// `β + αZ^D`.
    pub fn coset(beta: [Rational; D], alpha: Rational) -> Result<Self> {
        Self::from_pieces(vec![(beta, alpha)])
    }

    /// Union of arbitrary (possibly overlapping) cosets, canonicalized.
    pub fn from_pieces(pieces: Vec<([Rational; D], Rational)>) -> Result<Self> {
        if pieces.iter().any(|(_, a)| a.signum() <= 0) {
            return Err(Error::Invalid("coset modulus must be positive".into()));
        }
        let Some(modulus) = pieces.iter().map(|(_, a)| a.clone()).reduce(|a, b| Rational::lcm(&a, &b)) else {
            return Ok(Self::empty());
        };
        let mut reps = BTreeSet::new();
        for (beta, a) in &pieces {
            // β + aZ^D splits into (α/a)^D cosets of αZ^D
            let m = (&modulus / a).numer().to_u64().ok_or(Error::IndexOverflow(u64::MAX, INDEX_GUARD))?;
            for t in 0..m.pow(D as u32) {
                let mut rem = t;
                let rep: [Rational; D] = std::array::from_fn(|i| {
                    let s = rem % m;
                    rem /= m;
                    reduce_mod(&(&beta[i] + &(a * &Rational::from_int(s as i64))), &modulus)
                });
                reps.insert(rep);
            }
        }
        Ok(CosetUnion { modulus, reps }.coarsened())
    }

    pub fn modulus(&self) -> &Rational {
        &self.modulus
    }

    pub fn reps(&self) -> impl Iterator<Item = &[Rational; D]> {
        self.reps.iter()
    }

    /// Number of cosets of the canonical modulus.
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn contains(&self, x: &[Rational; D]) -> bool {
        let r: [Rational; D] = std::array::from_fn(|i| reduce_mod(&x[i], &self.modulus));
        self.reps.contains(&r)
    }

    /// Re-expresses the set with a modulus that is an integer multiple of the current one.
    pub fn at_modulus(&self, modulus: &Rational) -> Result<Self> {
        let m = modulus / &self.modulus;
        if !m.is_integer() || m.signum() <= 0 {
            return Err(Error::Invalid(format!("{modulus} is not a multiple of {}", self.modulus)));
        }
        let pieces = self.reps.iter().map(|b| (b.clone(), self.modulus.clone())).collect::<Vec<_>>();
        let mut out = CosetUnion { modulus: modulus.clone(), reps: BTreeSet::new() };
        for (b, a) in pieces {
            let k = m.numer().to_u64().unwrap();
            for t in 0..k.pow(D as u32) {
                let mut rem = t;
                let rep: [Rational; D] = std::array::from_fn(|i| {
                    let s = rem % k;
                    rem /= k;
                    reduce_mod(&(&b[i] + &(&a * &Rational::from_int(s as i64))), modulus)
                });
                out.reps.insert(rep);
            }
        }
        Ok(out)
    }

    /// Coarsens the modulus by primes while the set stays invariant.
    fn coarsened(mut self) -> Self {
        if self.reps.is_empty() {
            self.modulus = Rational::ONE;
            return self;
        }
        'outer: loop {
            let n = self.reps.len() as u64;
            for p in prime_factors(n) {
                if n.is_multiple_of(p.pow(D as u32)) {
                    if let Some(c) = self.try_coarsen(p) {
                        self = c;
                        continue 'outer;
                    }
                }
            }
            return self;
        }
    }

    fn try_coarsen(&self, p: u64) -> Option<Self> {
        let step = &self.modulus / &Rational::from_int(p as i64);
        let reps: BTreeSet<[Rational; D]> =
            self.reps.iter().map(|r| std::array::from_fn(|i| reduce_mod(&r[i], &step))).collect();
        let expanded = CosetUnion { modulus: step.clone(), reps: reps.clone() };
        let back = expanded.at_modulus(&self.modulus).ok()?;
        (back.reps == self.reps).then_some(expanded)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut pieces: Vec<_> = self.reps.iter().map(|b| (b.clone(), self.modulus.clone())).collect();
        pieces.extend(other.reps.iter().map(|b| (b.clone(), other.modulus.clone())));
        Self::from_pieces(pieces)
    }

    /// `αU` for a positive rational scalar.
    pub fn scale(&self, alpha: &Rational) -> Result<Self> {
        let pieces = self.reps.iter().map(|b| (b.clone().map(|x| &x * alpha), &self.modulus * alpha)).collect();
        Self::from_pieces(pieces)
    }

    /// Single-coset pieces of the canonical form.
    pub fn pieces(&self) -> Vec<Self> {
        self.reps.iter().map(|b| CosetUnion { modulus: self.modulus.clone(), reps: [b.clone()].into() }).collect()
    }

    /// Splits each piece into `p^D` cosets of `p·α`.
    pub fn refine(&self, p: u64) -> Vec<Self> {
        let modulus = &self.modulus * &Rational::from_int(p as i64);
        let fine = self.at_modulus(&modulus).expect("integer multiple");
        fine.reps.into_iter().map(|b| CosetUnion { modulus: modulus.clone(), reps: [b].into() }).collect()
    }
}

impl CompactOpenQ2 {
    /// Whether the origin lies in the set.
    pub fn contains_origin(&self) -> bool {
        self.contains(&[Rational::ZERO, Rational::ZERO])
    }
}

impl CompactOpenM2 {
    /// The set of matrices `γ + αM₂(Z)` with `γ` given by rows.
    pub fn matrix_coset(gamma: &RatMat, alpha: Rational) -> Result<Self> {
        Self::coset([gamma[0][0].clone(), gamma[0][1].clone(), gamma[1][0].clone(), gamma[1][1].clone()], alpha)
    }

    /// `U₁ = U·(1 0)ᵗ` and `U₂ = U·(0 1)ᵗ`.
    pub fn project_cols(&self) -> (CompactOpenQ2, CompactOpenQ2) {
        let col = |j: usize| {
            let pieces = self.reps.iter().map(|r| ([r[j].clone(), r[2 + j].clone()], self.modulus.clone())).collect();
            CompactOpenQ2::from_pieces(pieces).expect("positive modulus")
        };
        (col(0), col(1))
    }

    /// Columns of each piece, with the common modulus.
    pub fn column_pieces(&self) -> Vec<(CompactOpenQ2, CompactOpenQ2)> {
        self.pieces().iter().map(CompactOpenM2::project_cols).collect()
    }

    /// The image `Uρ` under right multiplication.
    pub fn right_mul(&self, rho: &RatMat) -> Result<Self> {
        self.right_mul_guarded(rho, INDEX_GUARD)
    }

    pub fn right_mul_guarded(&self, rho: &RatMat, guard: u64) -> Result<Self> {
        let inv = mat_inv(rho)?;
        let alpha = &self.modulus;
        let c = alpha * &common_denominator(inv.iter().flatten());
        let index = (&(&c / alpha).pow(4)? / &mat_det(rho).pow(2)?).abs();
        let count = index.numer().to_u64().filter(|_| index.is_integer()).unwrap_or(u64::MAX);
        if count > guard {
            return Err(Error::IndexOverflow(count, guard));
        }
        let as_vec = |m: &RatMat| [m[0][0].clone(), m[0][1].clone(), m[1][0].clone(), m[1][1].clone()];
        // generators α E_ij ρ of the image lattice
        let gens: Vec<[Rational; 4]> = (0..4)
            .map(|k| {
                let mut e = mat_from_ints([[0, 0], [0, 0]]);
                e[k / 2][k % 2] = alpha.clone();
                as_vec(&mat_mul(&e, rho))
            })
            .collect();
        let reduce = |v: [Rational; 4]| v.map(|x| reduce_mod(&x, &c));
        let zero: [Rational; 4] = std::array::from_fn(|_| Rational::ZERO);
        let mut residues = BTreeSet::from([zero.clone()]);
        let mut queue = VecDeque::from([zero]);
        while let Some(v) = queue.pop_front() {
            for g in &gens {
                let w = reduce(std::array::from_fn(|i| &v[i] + &g[i]));
                if residues.insert(w.clone()) {
                    if residues.len() as u64 > guard {
                        return Err(Error::IndexOverflow(residues.len() as u64, guard));
                    }
                    queue.push_back(w);
                }
            }
        }
        debug_assert_eq!(residues.len() as u64, count);
        let mut pieces = Vec::with_capacity(self.reps.len() * residues.len());
        for r in &self.reps {
            let g = [[r[0].clone(), r[1].clone()], [r[2].clone(), r[3].clone()]];
            let base = as_vec(&mat_mul(&g, rho));
            for l in &residues {
                pieces.push((std::array::from_fn(|i| &base[i] + &l[i]), c.clone()));
            }
        }
        Self::from_pieces(pieces)
    }
}

/// One-variable Eisenstein series of a compact open: each piece `β + αZ²`
/// contributes `Σ_n α^{-(n+1)} ε_{n+1, β/α} X^n`, with `F̃` for pieces through
/// the origin. Every piece level must divide `level`; `precision` is in `q_level`.
pub fn e_compact_open(v: &CompactOpenQ2, level: u32, precision: usize, degree: u32) -> Result<BiSeries> {
    let mut total = BiSeries::zero(level, precision, degree, 1);
    let alpha = v.modulus();
    for rep in v.reps() {
        let t = [rep[0].clone() / alpha.clone(), rep[1].clone() / alpha.clone()];
        let c = torsion_point(&t)?;
        let own = c.level;
        if !level.is_multiple_of(own) {
            return Err(Error::NotDivisible { from: own, to: level });
        }
        let prec_own = precision.div_ceil((level / own) as usize);
        let series = taylor_point(&c, degree, prec_own)?.level_raise(level)?.truncate(degree, precision);
        let mut scaled = BiSeries::zero(level, precision, degree, 1);
        for ((i, j), f) in series.terms() {
            let s = alpha.pow(-(i as i32 + 1))?;
            scaled.add_term(i, j, f.scale_rational(&s))?;
        }
        total = total.try_add(&scaled)?;
    }
    Ok(total)
}

/// The point `t ∈ Q²/Z²` as a torsion index at its exact order.
pub fn torsion_point(t: &[Rational; 2]) -> Result<TorsionIndex> {
    let level = common_denominator(t.iter());
    let n = level.numer().to_u32().ok_or_else(|| Error::Invalid("torsion level too large".into()))?;
    let coord = |x: &Rational| {
        let v = reduce_mod(x, &Rational::ONE) * level.clone();
        v.numer().to_i64().unwrap()
    };
    Ok(TorsionIndex::new(n, coord(&t[0]), coord(&t[1])))
}

/// Least common multiple of the piece levels of a vector open.
pub fn natural_level(v: &CompactOpenQ2) -> Result<u32> {
    let mut l = 1u32;
    for rep in v.reps() {
        let t = [rep[0].clone() / v.modulus().clone(), rep[1].clone() / v.modulus().clone()];
        l = l.lcm(&torsion_point(&t)?.level);
    }
    Ok(l)
}

impl<const D: usize> fmt::Display for CosetUnion<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reps.is_empty() {
            return write!(f, "empty");
        }
        for (k, r) in self.reps.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let entries: Vec<String> = r.iter().map(Rational::to_string).collect();
            write!(f, "{} mod {}", entries.join(","), self.modulus)?;
        }
        Ok(())
    }
}

/// Parses `"a1,…,aD mod alpha [+ …]"`.
impl<const D: usize> FromStr for CosetUnion<D> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut pieces = Vec::new();
        for part in s.split('+') {
            let (entries, alpha) =
                part.split_once("mod").ok_or_else(|| Error::Parse(format!("missing 'mod' in '{}'", part.trim())))?;
            let parse = |x: &str| {
                x.trim().parse::<Rational>().map_err(|_| Error::Parse(format!("bad rational '{}'", x.trim())))
            };
            let vals = entries.split(',').map(parse).collect::<Result<Vec<_>>>()?;
            let beta: [Rational; D] = vals
                .try_into()
                .map_err(|v: Vec<Rational>| Error::Parse(format!("expected {D} entries, got {}", v.len())))?;
            pieces.push((beta, parse(alpha)?));
        }
        Self::from_pieces(pieces)
    }
}

/// Serialized in the text syntax.
impl<const D: usize> Serialize for CosetUnion<D> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de, const D: usize> Deserialize<'de> for CosetUnion<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        let s = String::deserialize(d)?;
        if s == "empty" {
            return Ok(Self::empty());
        }
        s.parse().map_err(serde::de::Error::custom)
    }
}
