//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion listed in `KNOWN_FAILURES` still prints FAIL, but does not fail
//! the target as long as its documented replacement holds.

mod common;

use std::time::{Duration, Instant};

use num_integer::Integer;

use cuspsym::bgtable::{bg_build, bg_entry, proportionality, rational_value};
use cuspsym::bivariate::{constant, taylor_e, taylor_f, taylor_phi, taylor_wp, BiSeries};
use cuspsym::cusp::{is_in_eisenstein_span, sturm_bound, EisProductCombo};
use cuspsym::eisenstein::{eis_series, level1_series, TorsionIndex};
use cuspsym::identities::{e2_generators, verify_divisor_sums, verify_master_convolution, verify_polynomial_identity};
use cuspsym::mu::{gl2_act, gl2_level, manin1_check, manin2_check, mu_eval_at, natural_level_m2, MuValue};
use cuspsym::opens::CompactOpenM2;
use cuspsym::qseries::QExpansion;
use cuspsym::{Cyclotomic, Rational};

/// The P-polynomial identity holds only with the opposite quotient sign.
const KNOWN_FAILURES: [u32; 1] = [3];

struct Verdict {
    pass: bool,
    detail: String,
    /// For known failures: whether the documented replacement holds.
    replacement_holds: bool,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into(), replacement_holds: false }
    }
}

type Outcome = cuspsym::Result<Verdict>;

fn int(n: i64) -> Rational {
    Rational::from_int(n)
}

fn in_y(s: &BiSeries) -> BiSeries {
    s.swap()
}

fn in_z(s: &BiSeries) -> BiSeries {
    s.substitute_int([[-1, -1], [-1, -1]]).unwrap()
}

fn open(s: &str) -> CompactOpenM2 {
    s.parse().unwrap()
}

const SAMPLE_OPENS: [&str; 6] = [
    "0,0,0,0 mod 1",
    "0,0,1/3,1/3 mod 1",
    "1/2,0,0,1/2 mod 1",
    "0,0,1/5,2/5 mod 1",
    "1/4,3/4,1/2,1/4 mod 1",
    "1/5,2/5,1/5,4/5 mod 1",
];

fn divisor_sums() -> Outcome {
    let r = verify_divisor_sums(500);
    let first_ok = r[0].stated_pass;
    let derived_ok = r.iter().all(|x| x.derived_pass);
    let detected = r[1].stated_first_failure == Some(1);
    Ok(Verdict::new(
        first_ok && derived_ok && detected,
        format!(
            "first identity as stated: {first_ok}; derived forms hold to 500: {derived_ok}; second as stated fails first at n = {:?}",
            r[1].stated_first_failure
        ),
    ))
}

fn master_convolution() -> Outcome {
    let r = verify_master_convolution(20, 50)?;
    let bad: Vec<u32> = r.instances.iter().filter(|i| !i.pass).map(|i| i.n).collect();
    Ok(Verdict::new(r.pass, format!("2 <= n <= 20 at B = 50, failing n: {bad:?}")))
}

fn polynomial_identity() -> Outcome {
    let r = verify_polynomial_identity(10, 30)?;
    let bad: Vec<u32> = r.stated.instances.iter().filter(|i| !i.pass).map(|i| i.n).collect();
    let mut v = Verdict::new(
        r.stated.pass,
        format!("stated sign fails at n = {bad:?}; with the quotient sign flipped: {}", r.corrected.pass),
    );
    v.replacement_holds = r.corrected.pass;
    Ok(v)
}

fn three_term_torsion() -> Outcome {
    let (prec, d) = (40, 6);
    let cases = [(3, (1, 0), (0, 1)), (3, (1, 1), (1, 2)), (5, (1, 2), (3, 0)), (5, (0, 1), (2, 2))];
    let mut ok = true;
    for (n, a, b) in cases {
        let a = TorsionIndex::new(n, a.0, a.1);
        let b = TorsionIndex::new(n, b.0, b.1);
        let c = a.add(&b).neg();
        let s = &(&taylor_e(&a, d, prec)? + &in_y(&taylor_e(&b, d, prec)?)) + &in_z(&taylor_e(&c, d, prec)?);
        let rhs = &(&taylor_wp(&a, d, prec)? + &in_y(&taylor_wp(&b, d, prec)?)) + &in_z(&taylor_wp(&c, d, prec)?);
        ok &= (&s * &s).agrees(&rhs);
    }
    Ok(Verdict::new(ok, "N in {3, 5}, two index pairs each, B = 40, W = 6"))
}

fn square_identities() -> Outcome {
    let (prec, d) = (40, 8);
    let mut torsion_ok = true;
    for c in [TorsionIndex::new(3, 1, 0), TorsionIndex::new(4, 0, 1), TorsionIndex::new(5, 1, 2)] {
        let e = taylor_e(&c, d, prec)?;
        let e1 = eis_series(1, &c, prec)?;
        let rhs = &(&constant(e1.try_mul(&e1)?, d)? + &taylor_phi(&c, 3, d, prec)?.int_x()?.scale_rational(&int(2)))
            - &e.int_x()?.del().scale_rational(&int(2));
        torsion_ok &= (&e * &e).agrees(&rhs);
    }
    let f = taylor_f(1, d + 1, prec)?;
    let e2 = level1_series(2, 1, prec)?;
    let rhs = &(&(&f.d_x()? + &f.div_x()?.scale_rational(&int(2))) - &f.int_x()?.del().scale_rational(&int(2)))
        - &constant(e2.scale_rational(&int(3)), d)?;
    let lattice_ok = (&f * &f).agrees(&rhs);
    Ok(Verdict::new(torsion_ok && lattice_ok, format!("torsion square: {torsion_ok}; lattice square: {lattice_ok}")))
}

fn projected_squares() -> Outcome {
    let mut checked = 0;
    let mut failures = Vec::new();
    for n in [3u32, 4, 5] {
        let prec = sturm_bound(n, 8);
        for c1 in 0..n as i64 {
            for c2 in 0..n as i64 {
                let c = TorsionIndex::new(n, c1, c2);
                if c.is_zero() || c.sign_class() != c {
                    continue;
                }
                let e = taylor_e(&c, 6, prec)?;
                let h = (&e * &e).holomorphic_projection()?;
                for m in 0..=6u32 {
                    let f = h.coeff(m, 0).part(0);
                    checked += 1;
                    if !is_in_eisenstein_span(&f, n, m + 2)?.in_span() {
                        failures.push(format!("N={n} c=({c1},{c2}) k={}", m + 2));
                    }
                }
            }
        }
    }
    Ok(Verdict::new(failures.is_empty(), format!("{checked} entries checked; not in span: {failures:?}")))
}

fn mu_sum(pieces: &[CompactOpenM2], level: u32, prec: usize, deg: u32) -> cuspsym::Result<MuValue> {
    let mut sum = MuValue { series: BiSeries::zero(level, prec, deg, 2), combo: EisProductCombo::new(level) };
    for q in pieces {
        sum = sum.try_add(&mu_eval_at(q, level, prec, deg)?)?;
    }
    Ok(sum)
}

fn distribution_and_torus() -> Outcome {
    let (prec, deg) = (8, 3);
    let mut failures = Vec::new();
    for s in SAMPLE_OPENS {
        let u = open(s);
        for p in [2, 3] {
            let pieces = u.refine(p);
            let mut level = natural_level_m2(&u)?;
            for q in &pieces {
                level = level.lcm(&natural_level_m2(q)?);
            }
            let whole = mu_eval_at(&u, level, prec, deg)?;
            if !mu_sum(&pieces, level, prec, deg)?.series.agrees(&whole.series) {
                failures.push(format!("{s} refined by {p}"));
            }
        }
        for (a, d) in [(2, 1), (2, 3), (1, -1)] {
            let rho = [[int(a), Rational::ZERO], [Rational::ZERO, int(d)]];
            let level = gl2_level(&rho, &u)?.lcm(&natural_level_m2(&u)?);
            let lhs = gl2_act(&rho, &u, level, prec, deg)?;
            if !lhs.series.agrees(&mu_eval_at(&u, level, prec, deg)?.series) {
                failures.push(format!("{s} under diag({a},{d})"));
            }
        }
    }
    Ok(Verdict::new(failures.is_empty(), format!("6 opens, W = 3; failures: {failures:?}")))
}

fn manin_relations() -> Outcome {
    let mut failures = Vec::new();
    for s in SAMPLE_OPENS {
        if !manin1_check(&open(s), None, 10, 3)?.pass {
            failures.push(format!("two-term on {s}"));
        }
    }
    let mut certificates = 0;
    for n in [3u32, 5] {
        let prec = sturm_bound(n, 6);
        let cases =
            ["0,0,0,0 mod 1".to_string(), format!("1/{n},0,1/{n},0 mod 1"), format!("1/{n},2/{n},1/{n},4/{n} mod 1")];
        for s in &cases {
            let rep = manin2_check(&open(s), Some(n), prec, 4)?;
            certificates += rep
                .components
                .iter()
                .filter(|c| c.membership.as_ref().is_some_and(|m| m.certificate.is_some()))
                .count();
            if !rep.pass {
                failures.push(format!("three-term on {s} at N = {n}"));
            }
        }
    }
    Ok(Verdict::new(failures.is_empty(), format!("{certificates} membership certificates; failures: {failures:?}")))
}

/// `q ∏ (1 - qⁿ)² (1 - q^{11n})²` below `q^len`.
fn eta_product_11(len: usize) -> Vec<i64> {
    let mut c = vec![0i64; len];
    c[1] = 1;
    for n in 1..len {
        for step in [n, 11 * n] {
            for _ in 0..2 {
                for m in (step..len).rev() {
                    c[m] -= c[m - step];
                }
            }
        }
    }
    c
}

fn weight_two_tables() -> Outcome {
    let t5 = bg_build(5, 2, None)?;
    let five_ok = t5.entries.values().all(|e| e.is_empty());
    let t11 = bg_build(11, 2, None)?;
    let nonzero: Vec<&QExpansion> =
        t11.entries.values().filter_map(|e| e.get(&(0, 0))).filter(|f| !f.is_zero()).collect();
    let base = nonzero.first().copied();
    let rational_multiples =
        base.is_some_and(|g| nonzero.iter().all(|f| proportionality(f, g).as_ref().and_then(rational_value).is_some()));
    // compare against the oracle on 20 coefficients of q = q_11^11
    let n = 11;
    let pair = *t11.entries.iter().find(|(_, e)| !e.is_empty()).map(|(p, _)| p).unwrap();
    let prec = sturm_bound(n, 4).max(11 * 20);
    let long = bg_entry(n, 2, pair, prec)?;
    let f = long.get(&(0, 0)).cloned().unwrap_or_else(|| QExpansion::zero(n, prec));
    let oracle = QExpansion::from_terms(
        n,
        11 * 20,
        eta_product_11(20).iter().enumerate().map(|(m, &v)| (11 * m, Cyclotomic::from_int(n, v))),
    )?;
    let oracle_ok = proportionality(&f.truncate(11 * 20), &oracle).is_some_and(|l| !l.is_zero());
    let pass = five_ok && rational_multiples && oracle_ok;
    Ok(Verdict::new(
        pass,
        format!(
            "N=5 all cusp parts zero: {five_ok}; N=11 {} nonzero entries, rational multiples: {rational_multiples}, 20-coefficient oracle match: {oracle_ok}; relations exact",
            nonzero.len()
        ),
    ))
}

fn weight_four_rank() -> Outcome {
    let t = bg_build(5, 4, None)?;
    let rank = t.cusp_rank();
    Ok(Verdict::new(rank == 1, format!("{} entries, relations exact, rank {rank}, expected 1", t.entries.len())))
}

fn operator_axioms() -> Outcome {
    let mut r = common::rng(2024);
    let mut ok = true;
    for _ in 0..100 {
        let k = rand::Rng::gen_range(&mut r, 2..=8);
        let f = common::random_nearly_hol(&mut r, k, (k - 1) as usize, 12);
        ok &= f.del().holomorphic_projection()?.is_zero();
    }
    for _ in 0..100 {
        let k = rand::Rng::gen_range(&mut r, 0..=8);
        let f = common::random_nearly_hol(&mut r, k, 5, 12);
        let mut g = f.clone();
        for _ in 0..=f.depth() {
            g = g.lower();
        }
        ok &= g.is_zero();
    }
    Ok(Verdict::new(ok, "100 random inputs per axiom"))
}

fn generators() -> Outcome {
    let r = e2_generators(6, 50)?;
    let expected: Vec<Rational> = [1, -24, 252, -1472].into_iter().map(int).collect();
    let delta_ok = r.delta.len() >= 5 && r.delta[1..5] == expected[..];
    let recon = r.reconstructed.get(&4) == Some(&true) && r.reconstructed.get(&6) == Some(&true);
    Ok(Verdict::new(
        r.pass && delta_ok && recon,
        format!("weights 4 and 6 reconstructed: {recon}; delta prefix matches: {delta_ok}"),
    ))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 12] = [
        (1, "divisor-sum identities", Duration::from_secs(10), divisor_sums),
        (2, "master convolution identity", Duration::from_secs(30), master_convolution),
        (3, "P-polynomial identity", Duration::MAX, polynomial_identity),
        (4, "three-term torsion identity", Duration::MAX, three_term_torsion),
        (5, "square identities", Duration::MAX, square_identities),
        (6, "projected squares in the Eisenstein span", Duration::from_secs(300), projected_squares),
        (7, "distribution and torus invariance", Duration::MAX, distribution_and_torus),
        (8, "Manin relations", Duration::from_secs(900), manin_relations),
        (9, "weight-two symbol tables", Duration::MAX, weight_two_tables),
        (10, "weight-four rank at level five", Duration::from_secs(600), weight_four_rank),
        (11, "operator axioms", Duration::MAX, operator_axioms),
        (12, "level-one generators", Duration::MAX, generators),
    ];
    let mut unexpected = 0;
    for (id, name, budget, check) in criteria {
        let t0 = Instant::now();
        let outcome = check();
        let elapsed = t0.elapsed();
        let (pass, detail, replacement) = match outcome {
            Ok(v) => (v.pass && elapsed <= budget, v.detail, v.replacement_holds),
            Err(e) => (false, format!("error: {e}"), false),
        };
        let over = if elapsed > budget { " (over time budget)" } else { "" };
        println!(
            "{} criterion {id:>2} {name}: {detail} [{:.2}s{over}]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass && !(KNOWN_FAILURES.contains(&id) && replacement) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
