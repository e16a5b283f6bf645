//! Level-one identities among Eisenstein series and divisor sums.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{bernoulli_numbers, factorial, Cyclotomic, Rational};
use crate::bivariate::{polynomial, BiSeries};
use crate::eisenstein::level1_series;
use crate::error::Result;
use crate::qseries::{NearlyHol, QExpansion};

/// `σ_r(n)` for `r ∈ {1, 3, 5, 7}` and `1 ≤ n ≤ n_max`.
#[derive(Clone, Debug)]
pub struct SigmaTable {
    n_max: usize,
    values: BTreeMap<u32, Vec<BigInt>>,
}

impl SigmaTable {
    pub fn new(n_max: usize) -> Self {
        let mut values = BTreeMap::new();
        for r in [1u32, 3, 5, 7] {
            let mut v = vec![BigInt::from(0); n_max + 1];
            for d in 1..=n_max {
                let p = BigInt::from(d).pow(r);
                for m in (d..=n_max).step_by(d) {
                    v[m] += &p;
                }
            }
            values.insert(r, v);
        }
        SigmaTable { n_max, values }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sigma(&self, r: u32, n: usize) -> &BigInt {
        &self.values[&r][n]
    }

    /// `Σ_{i=1}^{n-1} σ_r(i) σ_s(n-i)`.
    pub fn convolution(&self, r: u32, s: u32, n: usize) -> BigInt {
        (1..n).map(|i| self.sigma(r, i) * self.sigma(s, n - i)).sum()
    }
}

pub fn sigma_convolution(r: u32, s: u32, n: usize) -> BigInt {
    SigmaTable::new(n).convolution(r, s, n)
}

/// Level-one `ε_k`, zero for odd `k` (including `k = 1`).
pub fn eps(k: u32, precision: usize) -> Result<NearlyHol> {
    if k % 2 == 1 {
        return Ok(NearlyHol::zero(k as i32, 1, precision));
    }
    level1_series(k, 1, precision)
}

fn convolution_sum(n: u32, precision: usize, f: impl Fn(u32) -> Result<NearlyHol>) -> Result<NearlyHol> {
    let mut acc = NearlyHol::zero(n as i32 + 2, 1, precision);
    for i in 0..=n {
        acc = acc.try_add(&f(i + 1)?.try_mul(&f(n - i + 1)?)?)?;
    }
    Ok(acc)
}

/// Right-hand side `(n+3) ε_{n+2} - (2/n) del ε_n`.
fn master_rhs(n: u32, precision: usize) -> Result<NearlyHol> {
    let a = eps(n + 2, precision)?.scale_rational(&Rational::from_int(n as i64 + 3));
    let b = eps(n, precision)?.del().scale_rational(&Rational::new(2, n as i64));
    a.try_sub(&b)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub n: u32,
    pub pass: bool,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesIdentityReport {
    pub name: String,
    pub precision: usize,
    pub pass: bool,
    pub instances: Vec<InstanceResult>,
}

/// `Σ_{i+j=n} ε_{i+1} ε_{j+1} = (n+3) ε_{n+2} - (2/n) del ε_n` for `2 ≤ n ≤ n_max`,
/// compared in every `ρ`-component.
pub fn verify_master_convolution(n_max: u32, precision: usize) -> Result<SeriesIdentityReport> {
    let instances = (2..=n_max)
        .into_par_iter()
        .map(|n| {
            let lhs = convolution_sum(n, precision, |k| eps(k, precision))?;
            let rhs = master_rhs(n, precision)?;
            Ok(InstanceResult { n, pass: lhs == rhs, depth: lhs.depth() })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = instances.iter().all(|i| i.pass);
    Ok(SeriesIdentityReport { name: "master convolution".into(), precision, pass, instances })
}

/// A divisor-sum identity
/// `L σ_{a}(n) = Σ (α n + β) σ_r(n) + Σ γ Σ_{i+j=n} σ_r(i) σ_s(j)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaIdentity {
    pub lhs_coeff: Rational,
    pub lhs_sigma: u32,
    /// `r ↦ (α, β)`
    pub linear: BTreeMap<u32, (Rational, Rational)>,
    /// `(r, s) ↦ γ` with `r ≤ s`
    pub convolutions: BTreeMap<(u32, u32), Rational>,
}

impl SigmaIdentity {
    /// First `n` where the identity fails, if any.
    pub fn first_failure(&self, table: &SigmaTable) -> Option<usize> {
        (1..=table.n_max()).find(|&n| !self.holds_at(table, n))
    }

    pub fn holds_at(&self, t: &SigmaTable, n: usize) -> bool {
        let int = |b: &BigInt| Rational::from_bigint(b.clone());
        let lhs = &self.lhs_coeff * &int(t.sigma(self.lhs_sigma, n));
        let mut rhs = Rational::ZERO;
        for (r, (a, b)) in &self.linear {
            let coeff = &(a * &Rational::from_int(n as i64)) + b;
            rhs += &(&coeff * &int(t.sigma(*r, n)));
        }
        for ((r, s), g) in &self.convolutions {
            rhs += &(g * &int(&t.convolution(*r, *s, n)));
        }
        lhs == rhs
    }

    /// Rescales so the left coefficient becomes `c`.
    pub fn normalized(&self, c: &Rational) -> Self {
        let f = c / &self.lhs_coeff;
        SigmaIdentity {
            lhs_coeff: c.clone(),
            lhs_sigma: self.lhs_sigma,
            linear: self.linear.iter().map(|(r, (a, b))| (*r, (a * &f, b * &f))).collect(),
            convolutions: self.convolutions.iter().map(|(k, g)| (*k, g * &f)).collect(),
        }
    }
}

impl std::fmt::Display for SigmaIdentity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut s = format!("{}*s{}(n) =", self.lhs_coeff, self.lhs_sigma);
        let mut first = true;
        let mut push = |s: &mut String, c: &Rational, body: String| {
            if c.is_zero() {
                return;
            }
            let sep = if first { " " } else { " + " };
            first = false;
            let _ = write!(s, "{sep}({c})*{body}");
        };
        for (r, (a, b)) in self.linear.iter().rev() {
            push(&mut s, a, format!("n*s{r}(n)"));
            push(&mut s, b, format!("s{r}(n)"));
        }
        for ((r, t), g) in &self.convolutions {
            push(&mut s, g, format!("sum s{r}(i)s{t}(j)"));
        }
        write!(f, "{s}")
    }
}

fn eps_constants(k: u32) -> (Rational, Rational) {
    // ε_k = a + b Σ σ_{k-1}(m) q^m at level one, k even
    let b_k = &bernoulli_numbers(k as usize)[k as usize];
    let a = -(b_k / &factorial(k));
    let b = &Rational::from_int(2) / &factorial(k - 1);
    (a, b)
}

/// Reads the divisor-sum identity off the holomorphic part of the master
/// identity at even `n`.
pub fn derive_sigma_identity(n: u32) -> SigmaIdentity {
    assert!(n >= 2 && n.is_multiple_of(2), "even n ≥ 2");
    let (_, b_top) = eps_constants(n + 2);
    let mut linear: BTreeMap<u32, (Rational, Rational)> = BTreeMap::new();
    let mut convolutions: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
    let mut add_lin = |r: u32, a: Rational, b: Rational| {
        let e = linear.entry(r).or_insert((Rational::ZERO, Rational::ZERO));
        e.0 += &a;
        e.1 += &b;
    };
    for i in 0..=n {
        let (p, q) = (i + 1, n - i + 1);
        if p % 2 == 1 || q % 2 == 1 {
            continue;
        }
        let (ap, bp) = eps_constants(p);
        let (aq, bq) = eps_constants(q);
        add_lin(q - 1, Rational::ZERO, &ap * &bq);
        add_lin(p - 1, Rational::ZERO, &aq * &bp);
        let key = ((p - 1).min(q - 1), (p - 1).max(q - 1));
        *convolutions.entry(key).or_insert(Rational::ZERO) += &(&bp * &bq);
    }
    let (_, bn) = eps_constants(n);
    add_lin(n - 1, &Rational::new(2, n as i64) * &bn, Rational::ZERO);
    linear.retain(|_, (a, b)| !(a.is_zero() && b.is_zero()));
    SigmaIdentity { lhs_coeff: &Rational::from_int(n as i64 + 3) * &b_top, lhs_sigma: n + 1, linear, convolutions }
}

/// The stated forms of the three divisor-sum identities.
pub fn stated_sigma_identities() -> Vec<SigmaIdentity> {
    let r = Rational::new;
    let z = Rational::ZERO;
    vec![
        SigmaIdentity {
            lhs_coeff: r(5, 1),
            lhs_sigma: 3,
            linear: [(1, (r(6, 1), r(-1, 1)))].into(),
            convolutions: [((1, 1), r(12, 1))].into(),
        },
        SigmaIdentity {
            lhs_coeff: r(21, 1),
            lhs_sigma: 5,
            linear: [(3, (r(30, 1), r(-10, 1)))].into(),
            convolutions: [((1, 3), r(240, 1))].into(),
        },
        SigmaIdentity {
            lhs_coeff: r(9, 1),
            lhs_sigma: 7,
            linear: [(5, (r(14, 1), r(-7, 1))), (3, (z.clone(), r(14, 15))), (1, (z, r(-5, 15)))].into(),
            convolutions: [((1, 5), r(168, 1)), ((3, 3), r(280, 1))].into(),
        },
    ]
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorSumReport {
    pub index: usize,
    pub stated: String,
    pub stated_pass: bool,
    pub stated_first_failure: Option<usize>,
    pub derived: String,
    pub derived_pass: bool,
    pub derived_first_failure: Option<usize>,
    /// The stated form fails while the derived one holds.
    pub discrepancy: bool,
}

/// Stated divisor-sum identities against the table, with derived corrections.
pub fn verify_divisor_sums(n_max: usize) -> Vec<DivisorSumReport> {
    let table = SigmaTable::new(n_max);
    stated_sigma_identities()
        .into_par_iter()
        .enumerate()
        .map(|(idx, stated)| {
            let derived = derive_sigma_identity(2 * idx as u32 + 2).normalized(&stated.lhs_coeff);
            let pf = stated.first_failure(&table);
            let df = derived.first_failure(&table);
            DivisorSumReport {
                index: idx + 1,
                stated: stated.to_string(),
                stated_pass: pf.is_none(),
                stated_first_failure: pf,
                derived: derived.to_string(),
                derived_pass: df.is_none(),
                derived_first_failure: df,
                discrepancy: pf.is_some() && df.is_none(),
            }
        })
        .collect()
}

/// Coefficients of `P_n = X^n + Y^n + (-X-Y)^n`, indexed by the power of `Y`.
pub fn p_poly(n: u32) -> Vec<Rational> {
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    let mut c: Vec<Rational> = (0..=n).map(|t| &crate::arith::binomial(n, t) * &Rational::from_int(sign)).collect();
    c[0] += &Rational::ONE;
    c[n as usize] += &Rational::ONE;
    c
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

fn poly_series(c: &[Rational], precision: usize, degree: u32) -> Result<BiSeries> {
    let d = c.len() as u32 - 1;
    let terms: Vec<(u32, u32, Rational)> =
        c.iter().enumerate().filter(|(_, r)| !r.is_zero()).map(|(t, r)| (d - t as u32, t as u32, r.clone())).collect();
    if terms.is_empty() {
        return Ok(BiSeries::zero(1, precision, degree, -(d as i32)));
    }
    polynomial(1, precision, degree, &terms)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialIdentityReport {
    /// `Σ P_i P_j ε_{i+1} ε_{j+1} = ((n+1)P_n - P_{n+1}P₂/(XY(X+Y))) ε_{n+2}`
    pub stated: SeriesIdentityReport,
    /// the same with `+ P_{n+1}P₂/(XY(X+Y))`
    pub corrected: SeriesIdentityReport,
    pub discrepancy: bool,
}

/// Both signs of the quotient term; holomorphy of the left side is part of each check.
pub fn verify_polynomial_identity(n_max: u32, precision: usize) -> Result<PolynomialIdentityReport> {
    let stated = polynomial_identity_with_sign(n_max, precision, -1)?;
    let corrected = polynomial_identity_with_sign(n_max, precision, 1)?;
    let discrepancy = !stated.pass && corrected.pass;
    Ok(PolynomialIdentityReport { stated, corrected, discrepancy })
}

/// `Σ_{i+j=n} P_i P_j ε_{i+1} ε_{j+1} = ((n+1)P_n + sign·P_{n+1}P₂/(XY(X+Y))) ε_{n+2}`.
pub fn polynomial_identity_with_sign(n_max: u32, precision: usize, sign: i64) -> Result<SeriesIdentityReport> {
    let instances = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut lhs = BiSeries::zero(1, precision, n, 2);
            for i in 0..=n {
                let j = n - i;
                let prod = eps(i + 1, precision)?.try_mul(&eps(j + 1, precision)?)?;
                if prod.is_zero() {
                    continue;
                }
                let poly = poly_series(&poly_mul(&p_poly(i), &p_poly(j)), precision, n)?;
                lhs = lhs.try_add(&poly.scale_series(&prod)?)?;
            }
            // odd weight vanishes at level one, and only then is the quotient inexact
            let rhs = if n % 2 == 1 {
                BiSeries::zero(1, precision, n, 2)
            } else {
                let q = poly_series(&poly_mul(&p_poly(n + 1), &p_poly(2)), precision, n + 3)?;
                let quotient = q.div_x()?.div_y()?.div_linear(&Rational::ONE, &Rational::ONE)?;
                let pn: Vec<Rational> = p_poly(n).iter().map(|c| c * &Rational::from_int(n as i64 + 1)).collect();
                poly_series(&pn, precision, n)?
                    .try_add(&quotient.scale_rational(&Rational::from_int(sign)))?
                    .scale_series(&eps(n + 2, precision)?)?
            };
            let depth = lhs.terms().map(|(_, f)| f.depth()).max().unwrap_or(0);
            Ok(InstanceResult { n, pass: lhs.agrees(&rhs) && depth == 0, depth })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = instances.iter().all(|i| i.pass);
    Ok(SeriesIdentityReport {
        name: format!("P-polynomial convolution, quotient sign {sign:+}"),
        precision,
        pass,
        instances,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub precision: usize,
    /// weight ↦ reconstruction equals `ε_k` and is holomorphic
    pub reconstructed: BTreeMap<u32, bool>,
    pub delta: Vec<Rational>,
    pub delta_oracle: Vec<Rational>,
    pub delta_pass: bool,
    pub pass: bool,
}

/// `q ∏ (1 - qⁿ)²⁴` below `q^len`.
pub fn delta_oracle(len: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::from(0); len];
    if len > 1 {
        c[1] = BigInt::from(1);
    }
    for n in 1..len {
        for _ in 0..24 {
            for m in (n..len).rev() {
                let t = c[m - n].clone();
                c[m] -= t;
            }
        }
    }
    c
}

/// Rebuilds `ε_4, ε_6, …, ε_{k_max}` from `ε₂` by the master identity and
/// assembles the weight-12 cusp form from `ε₄` and `ε₆`.
pub fn e2_generators(k_max: u32, precision: usize) -> Result<GeneratorReport> {
    let k_max = k_max.max(6);
    let mut built: BTreeMap<u32, NearlyHol> = BTreeMap::new();
    built.insert(2, eps(2, precision)?);
    let get = |b: &BTreeMap<u32, NearlyHol>, k: u32| {
        if k % 2 == 1 {
            NearlyHol::zero(k as i32, 1, precision)
        } else {
            b[&k].clone()
        }
    };
    let mut reconstructed = BTreeMap::new();
    for n in (2..=k_max - 2).step_by(2) {
        let sum = convolution_sum(n, precision, |k| Ok(get(&built, k)))?;
        let d = get(&built, n).del().scale_rational(&Rational::new(2, n as i64));
        let e = sum.try_add(&d)?.scale_rational(&Rational::new(1, n as i64 + 3));
        reconstructed.insert(n + 2, e.is_holomorphic() && e == eps(n + 2, precision)?);
        built.insert(n + 2, e);
    }
    let e4 = built[&4].part(0).scale_rational(&Rational::from_int(720));
    let e6 = built[&6].part(0).scale_rational(&Rational::from_int(-30240));
    let delta = e4.try_mul(&e4)?.try_mul(&e4)?.try_sub(&e6.try_mul(&e6)?)?.scale_rational(&Rational::new(1, 1728));
    let as_rats = |f: &QExpansion| -> Vec<Rational> {
        (0..f.precision()).map(|m| f.coeff(m).as_rational().cloned().unwrap_or(Rational::ZERO)).collect()
    };
    let delta_q = as_rats(&delta);
    let oracle = delta_oracle(precision);
    let delta_pass = delta.terms().all(|(_, c)| c.as_rational().is_some())
        && delta_q.iter().zip(&oracle).all(|(a, b)| *a == Rational::from_bigint(b.clone()));
    let pass = delta_pass && reconstructed.values().all(|&b| b);
    let delta_oracle = oracle.into_iter().map(Rational::from_bigint).collect();
    Ok(GeneratorReport { precision, reconstructed, delta: delta_q, delta_oracle, delta_pass, pass })
}

/// Whether a level-one series has only rational coefficients.
pub fn is_rational_series(f: &QExpansion) -> bool {
    f.terms().all(|(_, c): (usize, &Cyclotomic)| c.as_rational().is_some())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convolution_values() {
        assert_eq!(sigma_convolution(1, 1, 2), BigInt::from(1));
        assert_eq!(sigma_convolution(1, 1, 3), BigInt::from(6));
        assert_eq!(sigma_convolution(1, 3, 2), BigInt::from(1));
    }

    #[test]
    fn sigma_at_primes() {
        let t = SigmaTable::new(50);
        for p in [2usize, 3, 5, 7, 47] {
            for r in [1u32, 3, 5, 7] {
                assert_eq!(*t.sigma(r, p), BigInt::from(p).pow(r) + 1);
            }
        }
    }

    #[test]
    fn master_identity_weight_four() {
        let r = verify_master_convolution(6, 20).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.instances[0].depth, 2);
    }

    #[test]
    fn first_divisor_identity() {
        let t = SigmaTable::new(10);
        let stated = &stated_sigma_identities()[0];
        assert!(stated.holds_at(&t, 1));
        assert!(stated.holds_at(&t, 3));
        assert_eq!(derive_sigma_identity(2).normalized(&Rational::from_int(5)), *stated);
    }

    #[test]
    fn second_identity_needs_extra_term() {
        let reports = verify_divisor_sums(60);
        assert!(reports[0].stated_pass && reports[0].derived_pass);
        assert_eq!(reports[1].stated_first_failure, Some(1));
        assert!(reports[1].derived_pass && reports[1].discrepancy);
        let d = derive_sigma_identity(4).normalized(&Rational::from_int(21));
        assert_eq!(d.linear[&1], (Rational::ZERO, Rational::ONE));
        assert!(reports[2].derived_pass);
    }

    #[test]
    fn p_polynomials() {
        assert!(p_poly(1).iter().all(Rational::is_zero));
        assert_eq!(p_poly(0), vec![Rational::from_int(3)]);
        assert_eq!(p_poly(3), vec![Rational::ZERO, Rational::from_int(-3), Rational::from_int(-3), Rational::ZERO]);
    }

    #[test]
    fn polynomial_identity_small_n() {
        let r = verify_polynomial_identity(6, 12).unwrap();
        assert!(r.corrected.pass, "{r:?}");
        let failing: Vec<u32> = r.stated.instances.iter().filter(|i| !i.pass).map(|i| i.n).collect();
        assert_eq!(failing, vec![2, 4, 6]);
        assert!(r.discrepancy);
    }

    #[test]
    fn delta_from_e2() {
        let r = e2_generators(8, 8).unwrap();
        assert!(r.pass, "{r:?}");
        let want: Vec<Rational> = [0, 1, -24, 252, -1472].iter().map(|&v| Rational::from_int(v)).collect();
        assert_eq!(&r.delta[..5], &want[..]);
    }
}
