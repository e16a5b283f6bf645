use cuspsym::bgtable::{bg_build, bg_entry, proportionality, rational_value};
use cuspsym::cusp::{is_in_eisenstein_span, sturm_bound};
use cuspsym::Cyclotomic;

/// `q ∏ (1 - qⁿ)² (1 - q^{11n})²` to `len` terms, integer coefficients.
fn eta_product_11(len: usize) -> Vec<i64> {
    let mut c = vec![0i64; len];
    if len > 1 {
        c[1] = 1;
    }
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

/// Dimension of `S_k(Γ₁(N))` for `N ≥ 5` from the genus formula.
fn dim_cusp_gamma1(n: u64, k: u64) -> u64 {
    let mut index = n * n;
    for p in 2..=n {
        if n.is_multiple_of(p) && (2..p).all(|q| p % q != 0) {
            index = index / (p * p) * (p * p - 1);
        }
    }
    index /= 2;
    let divisors = (1..=n).filter(|d| n.is_multiple_of(*d));
    let cusps: u64 = divisors.map(|d| totient(d) * totient(n / d)).sum::<u64>() / 2;
    let genus = (12 + index as i64 - 6 * cusps as i64) / 12;
    let (k, cusps) = (k as i64, cusps as i64);
    let d = if k == 2 { genus } else { (k - 1) * (genus - 1) + (k / 2 - 1) * cusps };
    d as u64
}

fn totient(n: u64) -> u64 {
    (1..=n).filter(|&i| num_integer::gcd(i, n) == 1).count() as u64
}

#[test]
fn dimension_oracle_values() {
    assert_eq!(dim_cusp_gamma1(5, 2), 0);
    assert_eq!(dim_cusp_gamma1(11, 2), 1);
    assert_eq!(dim_cusp_gamma1(5, 4), 1);
    assert_eq!(dim_cusp_gamma1(7, 4), 3);
}

#[test]
fn eta_oracle_prefix() {
    assert_eq!(&eta_product_11(11)[..], &[0, 1, -2, -1, 2, 1, 2, -2, 0, -2, -2]);
}

#[test]
fn level_five_weight_four_rank_matches_dimension() {
    let t = bg_build(5, 4, None).unwrap();
    assert_eq!(t.cusp_rank() as u64, dim_cusp_gamma1(5, 4));
}

#[test]
fn level_eleven_entry_is_multiple_of_eta_product() {
    let n = 11;
    let prec = sturm_bound(n, 2) + 8;
    let e = bg_entry(n, 2, (1, 3), prec).unwrap();
    let f = e.get(&(0, 0)).expect("nonzero entry");
    let len = prec.div_ceil(11);
    let oracle = eta_product_11(len);
    let g = cuspsym::qseries::QExpansion::from_terms(
        n,
        prec,
        oracle.iter().enumerate().map(|(m, &v)| (11 * m, Cyclotomic::from_int(n, v))),
    )
    .unwrap();
    let lambda = proportionality(f, &g).expect("proportional to the oracle");
    assert!(!lambda.is_zero());
    assert!(rational_value(&lambda).is_some(), "multiple {lambda:?} is not rational");
    assert!(!is_in_eisenstein_span(f, n, 2).unwrap().in_span());
}

#[test]
fn level_eleven_table_spans_one_dimension() {
    let t = bg_build(11, 2, None).unwrap();
    assert_eq!(t.entries.len(), 120);
    assert_eq!(t.cusp_rank() as u64, dim_cusp_gamma1(11, 2));
    for ((c, d), e) in &t.entries {
        if c % 11 == 0 || d % 11 == 0 {
            assert!(e.is_empty());
        }
        for f in e.values() {
            assert!(f.terms().all(|(m, _)| m % 11 == 0));
        }
    }
}
