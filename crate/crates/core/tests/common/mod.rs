#![allow(dead_code)]

use cuspsym::qseries::{NearlyHol, QExpansion};
use cuspsym::{Cyclotomic, Rational};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_coeff(rng: &mut ChaCha8Rng, level: u32) -> Cyclotomic {
    let terms: Vec<(i64, Rational)> = (0..rng.gen_range(1..=2))
        .map(|_| {
            let e = rng.gen_range(0..level as i64);
            (e, Rational::new(rng.gen_range(-9..=9), rng.gen_range(1..=6)))
        })
        .collect();
    Cyclotomic::from_exponents(level, &terms)
}

pub fn random_series(rng: &mut ChaCha8Rng, level: u32, precision: usize) -> QExpansion {
    let mut terms = Vec::new();
    for m in 0..precision {
        if rng.gen_bool(0.6) {
            terms.push((m, random_coeff(rng, level)));
        }
    }
    QExpansion::from_terms(level, precision, terms).unwrap()
}

/// Random input of weight `k` and depth at most `max_depth`.
pub fn random_nearly_hol(rng: &mut ChaCha8Rng, k: i32, max_depth: usize, precision: usize) -> NearlyHol {
    let level = [1u32, 3, 4, 5][rng.gen_range(0..4)];
    let depth = rng.gen_range(0..=max_depth);
    let parts = (0..=depth).map(|_| random_series(rng, level, precision)).collect();
    NearlyHol::from_parts(k, parts).unwrap()
}
