//! Exact Gaussian elimination over the rationals.

use crate::rational::{one, zero, Rational};
use num_traits::Zero;
use std::collections::HashSet;

/// Solution set `particular + span(null_basis)` of a consistent linear system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSolution {
    pub particular: Vec<Rational>,
    pub null_basis: Vec<Vec<Rational>>,
    pub rank: usize,
}

impl AffineSolution {
    pub fn dimension(&self) -> usize {
        self.null_basis.len()
    }
}

/// Incrementally maintained reduced row echelon form of an augmented system.
#[derive(Debug, Clone)]
pub struct RowEchelon {
    n: usize,
    // (pivot column, coefficients, rhs); every pivot column is zero in all other rows
    rows: Vec<(usize, Vec<Rational>, Rational)>,
    seen: HashSet<(Vec<Rational>, Rational)>,
    inconsistent: bool,
}

impl RowEchelon {
    pub fn new(n: usize) -> Self {
        RowEchelon { n, rows: Vec::new(), seen: HashSet::new(), inconsistent: false }
    }

    /// Adds the equation `coeffs . x = rhs`.
    pub fn push(&mut self, mut coeffs: Vec<Rational>, mut rhs: Rational) {
        assert_eq!(coeffs.len(), self.n);
        if self.inconsistent || !self.seen.insert((coeffs.clone(), rhs.clone())) {
            return;
        }
        for (col, row, r) in &self.rows {
            if coeffs[*col].is_zero() {
                continue;
            }
            let f = coeffs[*col].clone();
            for (c, v) in coeffs.iter_mut().zip(row) {
                if !v.is_zero() {
                    *c -= &f * v;
                }
            }
            rhs -= &f * r;
        }
        let Some(pivot) = coeffs.iter().position(|c| !c.is_zero()) else {
            if !rhs.is_zero() {
                self.inconsistent = true;
            }
            return;
        };
        let inv = one() / &coeffs[pivot];
        for c in coeffs.iter_mut() {
            *c *= &inv;
        }
        rhs *= &inv;
        for (_, row, r) in self.rows.iter_mut() {
            if row[pivot].is_zero() {
                continue;
            }
            let f = row[pivot].clone();
            for (c, v) in row.iter_mut().zip(&coeffs) {
                if !v.is_zero() {
                    *c -= &f * v;
                }
            }
            *r -= &f * &rhs;
        }
        self.rows.push((pivot, coeffs, rhs));
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Particular solution (free variables at zero) and a null-space basis,
    /// or `None` if the system is inconsistent.
    pub fn solve(&self) -> Option<AffineSolution> {
        if self.inconsistent {
            return None;
        }
        let mut particular = vec![zero(); self.n];
        let mut is_pivot = vec![false; self.n];
        for (col, _, rhs) in &self.rows {
            particular[*col] = rhs.clone();
            is_pivot[*col] = true;
        }
        let null_basis = (0..self.n)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = vec![zero(); self.n];
                v[f] = one();
                for (col, row, _) in &self.rows {
                    v[*col] = -row[f].clone();
                }
                v
            })
            .collect();
        Some(AffineSolution { particular, null_basis, rank: self.rows.len() })
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The point of the solution set closest to the origin in Euclidean norm.
///
/// It is the unique solution orthogonal to every null-space direction, so it
/// does not depend on which variables elimination happened to leave free.
pub fn min_norm_solution(sol: &AffineSolution) -> Vec<Rational> {
    let k = sol.null_basis.len();
    if k == 0 {
        return sol.particular.clone();
    }
    // Gram system (N^T N) c = N^T x_p
    let mut gram = RowEchelon::new(k);
    for i in 0..k {
        let coeffs = (0..k).map(|j| dot(&sol.null_basis[i], &sol.null_basis[j])).collect();
        gram.push(coeffs, dot(&sol.null_basis[i], &sol.particular));
    }
    let c = gram.solve().expect("Gram matrix of a basis is nonsingular").particular;
    let mut x = sol.particular.clone();
    for (ci, v) in c.iter().zip(&sol.null_basis) {
        for (xj, vj) in x.iter_mut().zip(v) {
            *xj -= ci * vj;
        }
    }
    x
}
