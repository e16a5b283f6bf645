//! Exact Gauss–Jordan elimination over `Q(ζ_N)`.
//!
//! Systems are solved for several right-hand sides at once so that the
//! elimination work on the coefficient matrix is shared.

use super::cyclo::Cyclotomic;
use super::rational::Rational;

/// Result of reducing `A x = b` for one right-hand side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    /// A particular solution (free variables set to zero).
    Unique(Vec<Cyclotomic>),
    Inconsistent,
}

impl Solution {
    pub fn ok(self) -> Option<Vec<Cyclotomic>> {
        match self {
            Solution::Unique(v) => Some(v),
            Solution::Inconsistent => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Reduced {
    pub rank: usize,
    pub pivots: Vec<usize>,
    pub solutions: Vec<Solution>,
}

/// Solves `A x = b_r` for every `b_r` in `rhs`. `A` is given by rows.
///
/// `column_order` fixes the order in which columns are tried as pivots; the
/// default is left to right. Different orders can give different particular
/// solutions when `A` is rank deficient.
pub fn solve_many(
    level: u32,
    a: &[Vec<Cyclotomic>],
    rhs: &[Vec<Cyclotomic>],
    column_order: Option<&[usize]>,
) -> Reduced {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let nrhs = rhs.len();
    let zero = Cyclotomic::zero(level);
    let mut m: Vec<Vec<Cyclotomic>> = (0..nrows)
        .map(|i| {
            let mut row = a[i].clone();
            row.extend(rhs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();
    let default_order: Vec<usize> = (0..ncols).collect();
    let order = column_order.unwrap_or(&default_order);
    let mut pivots = Vec::new();
    let mut pivot_row = 0;
    for &col in order {
        if pivot_row >= nrows {
            break;
        }
        let Some(p) = (pivot_row..nrows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(pivot_row, p);
        let inv = m[pivot_row][col].inverse().expect("nonzero pivot");
        let width = ncols + nrhs;
        for j in 0..width {
            if !m[pivot_row][j].is_zero() {
                m[pivot_row][j] = &m[pivot_row][j] * &inv;
            }
        }
        let prow = m[pivot_row].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == pivot_row || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for j in 0..width {
                if !prow[j].is_zero() {
                    row[j] -= &(&f * &prow[j]);
                }
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    let rank = pivots.len();
    let solutions = (0..nrhs)
        .map(|r| {
            let c = ncols + r;
            if (rank..nrows).any(|i| !m[i][c].is_zero()) {
                return Solution::Inconsistent;
            }
            let mut x = vec![zero.clone(); ncols];
            for (i, &col) in pivots.iter().enumerate() {
                x[col] = m[i][c].clone();
            }
            Solution::Unique(x)
        })
        .collect();
    Reduced { rank, pivots, solutions }
}

pub fn solve(level: u32, a: &[Vec<Cyclotomic>], b: &[Cyclotomic]) -> (usize, Solution) {
    let red = solve_many(level, a, &[b.to_vec()], None);
    (red.rank, red.solutions.into_iter().next().unwrap())
}

/// Rank of a list of vectors over `Q(ζ_N)`.
pub fn rank(level: u32, vectors: &[Vec<Cyclotomic>]) -> usize {
    solve_many(level, vectors, &[], None).rank
}

/// Restriction of scalars: rewrites `A x = b` over `Q(ζ_N)` as a system over
/// `Q` (embedded at level 1) whose unknowns are the power-basis coordinates
/// of `x`.
pub fn flatten_system(level: u32, a: &[Vec<Cyclotomic>], b: &[Cyclotomic]) -> (Vec<Vec<Cyclotomic>>, Vec<Cyclotomic>) {
    let phi = Cyclotomic::zero(level).coeffs().len();
    let ncols = a.first().map_or(0, Vec::len);
    let lift = |r: &Rational| Cyclotomic::from_rational(1, r.clone());
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (i, arow) in a.iter().enumerate() {
        // column (j, t) holds the coordinates of A_ij · ζ^t
        let mut block = vec![vec![Cyclotomic::zero(1); ncols * phi]; phi];
        for (j, aij) in arow.iter().enumerate() {
            for t in 0..phi {
                let prod = aij * &Cyclotomic::root_power(level, t as i64);
                for (s, c) in prod.coeffs().iter().enumerate() {
                    block[s][j * phi + t] = lift(c);
                }
            }
        }
        rows.extend(block);
        rhs.extend(b[i].coeffs().iter().map(lift));
    }
    (rows, rhs)
}

/// Inverse of [`flatten_system`] on solution vectors.
pub fn unflatten_solution(level: u32, x: &[Cyclotomic]) -> Vec<Cyclotomic> {
    let phi = Cyclotomic::zero(level).coeffs().len();
    x.chunks(phi)
        .map(|chunk| {
            let coeffs = chunk.iter().map(|c| c.coeffs()[0].clone()).collect();
            Cyclotomic::from_coeffs(level, coeffs).unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(level: u32, e: i64) -> Cyclotomic {
        Cyclotomic::root_power(level, e)
    }

    #[test]
    fn solves_a_cyclotomic_system_both_ways() {
        let n = 5;
        let a = vec![
            vec![z(n, 1), Cyclotomic::one(n)],
            vec![Cyclotomic::one(n), z(n, 2)],
            vec![z(n, 1) + z(n, 1), z(n, 2) + Cyclotomic::one(n)],
        ];
        let x = vec![z(n, 3), Cyclotomic::from_int(n, 7) - z(n, 4)];
        let b: Vec<Cyclotomic> =
            a.iter().map(|row| row.iter().zip(&x).fold(Cyclotomic::zero(n), |acc, (p, q)| acc + p * q)).collect();
        let (rank, sol) = solve(n, &a, &b);
        assert_eq!(rank, 2);
        assert_eq!(sol, Solution::Unique(x.clone()));

        let (fa, fb) = flatten_system(n, &a, &b);
        let (frank, fsol) = solve(1, &fa, &fb);
        assert_eq!(frank, 8);
        assert_eq!(unflatten_solution(n, &fsol.ok().unwrap()), x);
    }

    #[test]
    fn detects_inconsistency() {
        let n = 3;
        let a = vec![vec![Cyclotomic::one(n)], vec![Cyclotomic::from_int(n, 2)]];
        let b = vec![Cyclotomic::one(n), Cyclotomic::one(n)];
        assert_eq!(solve(n, &a, &b).1, Solution::Inconsistent);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let n = 4;
        let v = vec![z(n, 1), Cyclotomic::one(n)];
        let w: Vec<_> = v.iter().map(|c| c * &z(n, 1)).collect();
        assert_eq!(rank(n, &[v, w]), 1);
    }
}
