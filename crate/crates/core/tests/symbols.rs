use cuspsym::cusp::{is_in_eisenstein_span, sturm_bound};
use cuspsym::mu::{symbol_eval, Cusp, DivisorPath};
use cuspsym::opens::CompactOpenM2;
use num_integer::Integer;

fn cusp(s: &str) -> Cusp {
    s.parse().unwrap()
}

#[test]
fn paths_compose_modulo_eisenstein_series() {
    let u: CompactOpenM2 = "0,0,1/3,1/3 mod 1".parse().unwrap();
    let deg = 2;
    let legs = [("1/2", "2/5"), ("2/5", "oo"), ("1/2", "oo")];
    let paths: Vec<DivisorPath> = legs.iter().map(|(a, b)| DivisorPath::path(cusp(a), cusp(b))).collect();
    let mut level = 1;
    for p in &paths {
        level = level.lcm(&symbol_eval(p, &u, None, 4, deg).unwrap().level());
    }
    let prec = sturm_bound(level, deg + 2);
    let v: Vec<_> = paths.iter().map(|p| symbol_eval(p, &u, Some(level), prec, deg).unwrap()).collect();
    let diff = v[0].series.try_add(&v[1].series).unwrap().try_sub(&v[2].series).unwrap();
    for ((i, j), f) in diff.terms() {
        if f.is_zero() {
            continue;
        }
        assert!(f.is_holomorphic());
        let m = is_in_eisenstein_span(&f.part(0), level, i + j + 2).unwrap();
        assert!(m.in_span(), "component ({i},{j}): {:?}", m.outcome);
    }
}

#[test]
fn reversed_path_negates() {
    let u: CompactOpenM2 = "1/4,3/4,1/2,1/4 mod 1".parse().unwrap();
    let fwd = DivisorPath::path(cusp("1/3"), cusp("-2/7"));
    let back = DivisorPath::path(cusp("-2/7"), cusp("1/3"));
    let a = symbol_eval(&fwd, &u, None, 6, 1).unwrap();
    let b = symbol_eval(&back, &u, Some(a.level()), 6, 1).unwrap();
    assert!(a.series.try_add(&b.series).unwrap().is_zero());
}

#[test]
fn general_divisors_are_linear() {
    let u: CompactOpenM2 = "0,0,1/5,2/5 mod 1".parse().unwrap();
    let d: DivisorPath = "2*{1/2} - {oo} - {0}".parse().unwrap();
    let a = DivisorPath::path(cusp("1/2"), cusp("oo"));
    let b = DivisorPath::path(cusp("1/2"), cusp("0"));
    let whole = symbol_eval(&d, &u, None, 6, 2).unwrap();
    let level = whole.level();
    let sum = symbol_eval(&a, &u, Some(level), 6, 2)
        .unwrap()
        .try_add(&symbol_eval(&b, &u, Some(level), 6, 2).unwrap())
        .unwrap();
    assert!(whole.series.agrees(&sum.series));
}
