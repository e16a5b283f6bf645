//! Manin symbol tables for `Γ₁(N)` with cusp-form-valued polynomial entries.
//!
//! The entry at a primitive pair `(c, d)` is the degree-`(k-2)` slice of
//! `H(Ẽ_{(0,c)}(X) Ẽ_{(0,d)}(Y))` reduced to its cusp part. It depends only
//! on the pair. The value at a lift `γ` is that polynomial evaluated at
//! `(X Y)γ`, computed independently by [`bg_entry_at_lift`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::linalg::rank;
use crate::arith::{Cyclotomic, Rational};
use crate::cusp::{
    cusp_parts_many, expand_monomial, is_primitive, lift_row, sturm_bound, EisProductCombo, EisSpec, Monomial,
};
use crate::eisenstein::TorsionIndex;
use crate::error::{Error, Result};
use crate::opens::{mat_from_ints, mat_inv, RatMat};
use crate::qseries::QExpansion;

pub type Pair = (u32, u32);

/// Homogeneous polynomial in `X, Y` with q-expansion coefficients.
pub type PolyEntry = BTreeMap<Monomial, QExpansion>;

/// Primitive pairs mod `N` with a lift whose bottom row reduces to the pair.
pub fn coset_reps(n: u32) -> Vec<(Pair, [[i64; 2]; 2])> {
    let mut out = Vec::new();
    for c in 0..n {
        for d in 0..n {
            if is_primitive(c as i64, d as i64, n) {
                out.push(((c, d), lift_row(c as i64, d as i64, n)));
            }
        }
    }
    out
}

fn pair_combo(n: u32, k: u32, (c, d): Pair) -> Result<EisProductCombo> {
    let t1 = TorsionIndex::new(n, 0, c as i64);
    let t2 = TorsionIndex::new(n, 0, d as i64);
    let mut combo = EisProductCombo::new(n);
    let deg = k - 2;
    for i in 0..=deg {
        let j = deg - i;
        if (t1.is_zero() && i == 0) || (t2.is_zero() && j == 0) {
            continue;
        }
        let f = vec![EisSpec { k: i + 1, c: t1 }, EisSpec { k: j + 1, c: t2 }];
        combo.add_term((i, j), f, Cyclotomic::one(n))?;
    }
    Ok(combo)
}

fn check_inputs(n: u32, k: u32, precision: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Invalid("level must be at least 2".into()));
    }
    if k < 2 {
        return Err(Error::Invalid("weight must be at least 2".into()));
    }
    let need = sturm_bound(n, k);
    if precision < need {
        return Err(Error::InsufficientPrecision { have: precision, need });
    }
    Ok(())
}

fn reduce_combos(n: u32, k: u32, precision: usize, combos: &[EisProductCombo]) -> Result<Vec<PolyEntry>> {
    let mut items = Vec::new();
    let mut owner = Vec::new();
    for (e, c) in combos.iter().enumerate() {
        for m in c.monomials() {
            items.push((c, m));
            owner.push(e);
        }
    }
    let parts = cusp_parts_many(n, &items, k, precision, None)?;
    let mut out = vec![PolyEntry::new(); combos.len()];
    for ((e, (_, m)), f) in owner.into_iter().zip(&items).zip(parts) {
        if !f.is_zero() {
            out[e].insert(*m, f);
        }
    }
    Ok(out)
}

/// The entry at `(c, d)`: monomial ↦ cusp part.
pub fn bg_entry(n: u32, k: u32, pair: Pair, precision: usize) -> Result<PolyEntry> {
    check_inputs(n, k, precision)?;
    if !is_primitive(pair.0 as i64, pair.1 as i64, n) {
        return Err(Error::Invalid(format!("pair {pair:?} is not primitive mod {n}")));
    }
    Ok(reduce_combos(n, k, precision, &[pair_combo(n, k, pair)?])?.pop().unwrap())
}

/// Cusp part of `H(Ẽ_{(0,c)}((X Y)γ e₁) Ẽ_{(0,d)}((X Y)γ e₂))^{(k-2)}` for a lift `γ`
/// with bottom row `≡ (c, d)`.
pub fn bg_entry_at_lift(n: u32, k: u32, g: [[i64; 2]; 2], precision: usize) -> Result<PolyEntry> {
    check_inputs(n, k, precision)?;
    let pair = (g[1][0].rem_euclid(n as i64) as u32, g[1][1].rem_euclid(n as i64) as u32);
    let combo = pair_combo(n, k, pair)?.substitute(&mat_from_ints(g))?;
    Ok(reduce_combos(n, k, precision, &[combo])?.pop().unwrap())
}

/// `P((X Y) m)` for a polynomial entry.
pub fn substitute_entry(p: &PolyEntry, m: &RatMat) -> PolyEntry {
    let mut out = PolyEntry::new();
    for (&(i, j), f) in p {
        for (mono, r) in expand_monomial(i, j, m) {
            let t = f.scale_rational(&r);
            match out.get_mut(&mono) {
                Some(v) => *v = v.try_add(&t).expect("same level"),
                None => {
                    out.insert(mono, t);
                }
            }
        }
    }
    out.retain(|_, f| !f.is_zero());
    out
}

fn add_entries(a: &PolyEntry, b: &PolyEntry) -> PolyEntry {
    let mut out = a.clone();
    for (m, f) in b {
        match out.get_mut(m) {
            Some(v) => *v = v.try_add(f).expect("same level"),
            None => {
                out.insert(*m, f.clone());
            }
        }
    }
    out.retain(|_, f| !f.is_zero());
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BgTable {
    pub level: u32,
    pub weight: u32,
    pub precision: usize,
    pub sturm_bound: usize,
    pub entries: BTreeMap<Pair, PolyEntry>,
}

/// Builds the full table and verifies both relations before returning.
pub fn bg_build(n: u32, k: u32, precision: Option<usize>) -> Result<BgTable> {
    let sturm = sturm_bound(n, k);
    let precision = precision.unwrap_or(sturm + 8);
    check_inputs(n, k, precision)?;
    let pairs: Vec<Pair> = coset_reps(n).into_iter().map(|(p, _)| p).collect();
    let combos = pairs.iter().map(|p| pair_combo(n, k, *p)).collect::<Result<Vec<_>>>()?;
    let reduced = reduce_combos(n, k, precision, &combos)?;
    let entries = pairs.into_iter().zip(reduced).collect();
    let table = BgTable { level: n, weight: k, precision, sturm_bound: sturm, entries };
    table.verify_relations()?;
    Ok(table)
}

impl BgTable {
    pub fn entry(&self, pair: Pair) -> Option<&PolyEntry> {
        let n = self.level;
        self.entries.get(&(pair.0 % n, pair.1 % n))
    }

    fn at(&self, c: i64, d: i64) -> Result<&PolyEntry> {
        let n = self.level as i64;
        let p = (c.rem_euclid(n) as u32, d.rem_euclid(n) as u32);
        self.entries.get(&p).ok_or_else(|| Error::RelationViolation(format!("missing entry {p:?}")))
    }

    /// The two-term and three-term relations, exactly.
    pub fn verify_relations(&self) -> Result<()> {
        let s = mat_from_ints([[0, -1], [1, 0]]);
        let r = mat_from_ints([[0, -1], [1, -1]]);
        let r2 = mat_from_ints([[-1, 1], [-1, 0]]);
        for &(c, d) in self.entries.keys() {
            let (c, d) = (c as i64, d as i64);
            let f = self.at(c, d)?;
            let two = add_entries(f, &substitute_entry(self.at(d, -c)?, &s));
            if !two.is_empty() {
                return Err(Error::RelationViolation(format!("two-term relation at ({c},{d})")));
            }
            let three = add_entries(
                &add_entries(f, &substitute_entry(self.at(d, -c - d)?, &r)),
                &substitute_entry(self.at(-c - d, c)?, &r2),
            );
            if !three.is_empty() {
                return Err(Error::RelationViolation(format!("three-term relation at ({c},{d})")));
            }
        }
        Ok(())
    }

    /// Dimension of the span of all entry coefficients.
    pub fn cusp_rank(&self) -> usize {
        let vectors: Vec<Vec<Cyclotomic>> = self
            .entries
            .values()
            .flat_map(|e| e.values())
            .map(|f| (0..self.precision).map(|m| f.coeff(m)).collect())
            .collect();
        rank(self.level, &vectors)
    }

    /// The entry at a lift `γ`, obtained by substituting `(X Y)γ` into the stored polynomial.
    pub fn value_at_lift(&self, g: [[i64; 2]; 2]) -> Result<PolyEntry> {
        Ok(substitute_entry(self.at(g[1][0], g[1][1])?, &mat_from_ints(g)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TableJson::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str::<TableJson>(s)?.try_into()
    }

    pub fn export(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Back-substitutes a lift value to the pair entry: `P((X Y) γ⁻¹)`.
pub fn back_substitute(p: &PolyEntry, g: [[i64; 2]; 2]) -> Result<PolyEntry> {
    Ok(substitute_entry(p, &mat_inv(&mat_from_ints(g))?))
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    level: u32,
    weight: u32,
    precision: usize,
    sturm_bound: usize,
    entries: BTreeMap<String, BTreeMap<String, QExpansion>>,
}

fn parse_pair(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Parse(format!("bad key {s}"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

impl From<&BgTable> for TableJson {
    fn from(t: &BgTable) -> Self {
        let entries = t
            .entries
            .iter()
            .map(|((c, d), e)| {
                (format!("{c},{d}"), e.iter().map(|((i, j), f)| (format!("{i},{j}"), f.clone())).collect())
            })
            .collect();
        TableJson { level: t.level, weight: t.weight, precision: t.precision, sturm_bound: t.sturm_bound, entries }
    }
}

impl TryFrom<TableJson> for BgTable {
    type Error = Error;
    fn try_from(j: TableJson) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (p, e) in j.entries {
            let mut poly = PolyEntry::new();
            for (m, f) in e {
                poly.insert(parse_pair(&m)?, f);
            }
            entries.insert(parse_pair(&p)?, poly);
        }
        Ok(BgTable { level: j.level, weight: j.weight, precision: j.precision, sturm_bound: j.sturm_bound, entries })
    }
}

/// `λ` with `f = λ g` exactly, if one exists.
pub fn proportionality(f: &QExpansion, g: &QExpansion) -> Option<Cyclotomic> {
    let (m, gm) = g.terms().next()?;
    let lambda = f.coeff(m).try_div(gm).ok()?;
    (g.scale(&lambda) == *f).then_some(lambda)
}

/// Whether a cyclotomic number is rational.
pub fn rational_value(c: &Cyclotomic) -> Option<Rational> {
    c.as_rational().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coset_counts_and_lifts() {
        let two: Vec<Pair> = coset_reps(2).into_iter().map(|(p, _)| p).collect();
        assert_eq!(two, vec![(0, 1), (1, 0), (1, 1)]);
        assert_eq!(coset_reps(5).len(), 24);
        for (p, g) in coset_reps(6) {
            assert_eq!(g[0][0] * g[1][1] - g[0][1] * g[1][0], 1);
            assert_eq!((g[1][0].rem_euclid(6) as u32, g[1][1].rem_euclid(6) as u32), p);
        }
    }

    #[test]
    fn level_five_weight_two_is_zero() {
        let t = bg_build(5, 2, None).unwrap();
        assert_eq!(t.entries.len(), 24);
        assert!(t.entries.values().all(|e| e.is_empty()));
        assert_eq!(t.precision, 29);
    }

    #[test]
    fn level_two_lattice_entry_is_zero() {
        assert!(bg_entry(2, 2, (0, 1), 7).unwrap().is_empty());
        assert!(matches!(bg_entry(2, 2, (0, 1), 1), Err(Error::InsufficientPrecision { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let t = bg_build(2, 4, None).unwrap();
        let s = t.to_json().unwrap();
        assert_eq!(BgTable::from_json(&s).unwrap(), t);
        assert_eq!(BgTable::from_json(&s).unwrap().to_json().unwrap(), s);
    }

    #[test]
    fn lifts_agree_after_back_substitution() {
        let (n, k) = (5, 4);
        let prec = sturm_bound(n, k) + 2;
        let direct = bg_entry(n, k, (1, 2), prec).unwrap();
        for g in [[[1, 0], [1, 2]], [[-4, -1], [11, 2]]] {
            let v = bg_entry_at_lift(n, k, g, prec).unwrap();
            assert_eq!(back_substitute(&v, g).unwrap(), direct);
        }
    }
}
