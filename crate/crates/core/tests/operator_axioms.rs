mod common;

use common::{random_nearly_hol, rng};

#[test]
fn holomorphic_projection_kills_raised_inputs() {
    let mut r = rng(11);
    for _ in 0..100 {
        let k = rand::Rng::gen_range(&mut r, 2..=8);
        let f = random_nearly_hol(&mut r, k, (k - 1) as usize, 12);
        assert!(f.del().holomorphic_projection().unwrap().is_zero(), "{f:?}");
    }
}

#[test]
fn lowering_depth_plus_one_times_vanishes() {
    let mut r = rng(12);
    for _ in 0..100 {
        let k = rand::Rng::gen_range(&mut r, 0..=8);
        let f = random_nearly_hol(&mut r, k, 5, 12);
        let mut g = f.clone();
        for _ in 0..=f.depth() {
            g = g.lower();
        }
        assert!(g.is_zero());
        if !f.part(f.depth()).is_zero() {
            let mut h = f.clone();
            for _ in 0..f.depth() {
                h = h.lower();
            }
            assert!(!h.is_zero(), "lowering depth times leaves the top part");
        }
    }
}

#[test]
fn projection_fixes_holomorphic_inputs() {
    let mut r = rng(13);
    for _ in 0..50 {
        let f = random_nearly_hol(&mut r, 4, 0, 10);
        assert_eq!(f.holomorphic_projection().unwrap(), f.part(0));
    }
}

#[test]
fn lower_del_commutator_matches_components() {
    let mut r = rng(14);
    for _ in 0..50 {
        let k = rand::Rng::gen_range(&mut r, 1..=8);
        let f = random_nearly_hol(&mut r, k, 3, 10);
        let lhs = f.del().lower().try_sub(&f.lower().del()).unwrap();
        let expected = f.scale_rational(&cuspsym::Rational::from_int(k as i64));
        assert_eq!(lhs.truncate(f.precision()), expected, "k = {k}");
    }
}
