//! Phase-1 simplex over exact rationals.
//!
//! Decides whether `A x = b, x >= 0` has a solution and returns one. Pivoting
//! follows Bland's rule (lowest eligible index both for the entering column
//! and for ties in the ratio test), which rules out cycling.

use crate::rational::{one, zero, Rational};
use num_traits::{Signed, Zero};

/// Returns some `x >= 0` with `A x = b`, or `None` when the system is infeasible.
pub fn find_nonnegative_solution(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let m = a.len();
    assert_eq!(m, b.len());
    let n = a.first().map_or(0, Vec::len);
    if m == 0 {
        return Some(vec![zero(); n]);
    }

    // Columns: n structural, m artificial, then the rhs.
    let width = n + m + 1;
    let mut tab: Vec<Vec<Rational>> = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        assert_eq!(row.len(), n);
        let flip = rhs.is_negative();
        let mut t = Vec::with_capacity(width);
        t.extend(row.iter().map(|v| if flip { -v } else { v.clone() }));
        t.extend((0..m).map(|j| if i == j { one() } else { zero() }));
        t.push(if flip { -rhs } else { rhs.clone() });
        tab.push(t);
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Reduced costs of min sum(artificials), priced out against the starting basis.
    let mut cost = vec![zero(); width];
    for t in &tab {
        for j in 0..n {
            cost[j] -= &t[j];
        }
        cost[width - 1] -= &t[width - 1];
    }

    while let Some(enter) = (0..n).find(|&j| cost[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for (i, t) in tab.iter().enumerate() {
            if !t[enter].is_positive() {
                continue;
            }
            let r = &t[width - 1] / &t[enter];
            leave = match leave {
                None => Some((i, r)),
                Some((li, lr)) => {
                    if r < lr || (r == lr && basis[i] < basis[li]) {
                        Some((i, r))
                    } else {
                        Some((li, lr))
                    }
                }
            };
        }
        // Phase 1 is bounded below by zero, so an improving column always has a pivot row.
        let (row, _) = leave.expect("phase-1 objective is bounded");
        pivot(&mut tab, &mut cost, row, enter);
        basis[row] = enter;
    }

    if !cost[width - 1].is_zero() {
        return None;
    }
    let mut x = vec![zero(); n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tab[i][width - 1].clone();
        }
    }
    Some(x)
}

fn pivot(tab: &mut [Vec<Rational>], cost: &mut [Rational], row: usize, col: usize) {
    let inv = one() / &tab[row][col];
    for v in tab[row].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let pivot_row = tab[row].clone();
    let eliminate = |target: &mut [Rational]| {
        if target[col].is_zero() {
            return;
        }
        let f = target[col].clone();
        for (t, p) in target.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *t -= &f * p;
            }
        }
    };
    for (i, t) in tab.iter_mut().enumerate() {
        if i != row {
            eliminate(t);
        }
    }
    eliminate(cost);
}
