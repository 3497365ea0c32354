//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's membership, LP or coupler code. Boxes are
//! scaled to integer arrays and all decisions are made in `i128`.

#![allow(dead_code)]

use nlswap::boxes::BipartiteBox;
use nlswap::rational::{ratio, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

pub type IntBox = [[[[i128; 2]; 2]; 2]; 2];

/// Scales a rational box to integers, returning the entries and the common denominator.
pub fn to_integer_box(bx: &BipartiteBox) -> (IntBox, i128) {
    let mut lcm = BigInt::one();
    bx.for_each(|_, _, _, _, v| {
        let d = v.denom();
        lcm = &lcm / num_integer::gcd(lcm.clone(), d.clone()) * d;
    });
    let mut out = [[[[0i128; 2]; 2]; 2]; 2];
    bx.for_each(|x, y, a, b, v| {
        let scaled = v.numer() * (&lcm / v.denom());
        out[x][y][a][b] = scaled.to_i128().expect("entry fits in i128");
    });
    (out, lcm.to_i128().expect("denominator fits in i128"))
}

/// The 16 deterministic boxes, scaled by 2 so the PR box is integral too.
pub fn oracle_locals() -> Vec<IntBox> {
    let mut out = Vec::new();
    for alpha in 0..2 {
        for beta in 0..2 {
            for gamma in 0..2 {
                for delta in 0..2 {
                    let mut p = [[[[0i128; 2]; 2]; 2]; 2];
                    for x in 0..2 {
                        for y in 0..2 {
                            p[x][y][(alpha * x) ^ beta][(gamma * y) ^ delta] = 2;
                        }
                    }
                    out.push(p);
                }
            }
        }
    }
    out
}

/// The PR box scaled by 2.
pub fn oracle_pr() -> IntBox {
    let mut p = [[[[0i128; 2]; 2]; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            for a in 0..2 {
                p[x][y][a][a ^ (x & y)] = 1;
            }
        }
    }
    p
}

/// Nine coordinates fixing a non-signalling box: the (0,0) normalization,
/// Alice's and Bob's marginals on outcome 0, and `P(00|xy)`.
fn coordinates(p: &IntBox) -> [i128; 9] {
    let n = p[0][0].iter().flatten().sum();
    [
        n,
        p[0][0][0][0] + p[0][0][0][1],
        p[1][0][0][0] + p[1][0][0][1],
        p[0][0][0][0] + p[0][0][1][0],
        p[0][1][0][0] + p[0][1][1][0],
        p[0][0][0][0],
        p[0][1][0][0],
        p[1][0][0][0],
        p[1][1][0][0],
    ]
}

/// Whether `p` is normalized and non-signalling, i.e. in the span of the vertices.
pub fn in_vertex_span(p: &IntBox) -> bool {
    let c = coordinates(p);
    let alice = |x: usize| c[1 + x];
    let bob = |y: usize| c[3 + y];
    (0..2).all(|x| {
        (0..2).all(|y| {
            let p00 = p[x][y][0][0];
            p[x][y][0][1] == alice(x) - p00
                && p[x][y][1][0] == bob(y) - p00
                && p[x][y][1][1] == c[0] - alice(x) - bob(y) + p00
        })
    })
}

const N: usize = 9;

/// Fraction-free Gauss-Jordan. Returns `(d, R)` with `M·R = d·I`, or `None` if singular.
#[allow(clippy::needless_range_loop)]
fn bareiss_inverse(m: &[[i128; N]; N]) -> Option<(i128, [[i128; N]; N])> {
    let mut a = [[0i128; 2 * N]; N];
    for i in 0..N {
        a[i][..N].copy_from_slice(&m[i]);
        a[i][N + i] = 1;
    }
    let mut prev = 1i128;
    for k in 0..N {
        let pivot = (k..N).find(|&r| a[r][k] != 0)?;
        a.swap(k, pivot);
        for i in 0..N {
            if i == k {
                continue;
            }
            for j in 0..2 * N {
                if j == k {
                    continue;
                }
                let num = a[k][k] * a[i][j] - a[i][k] * a[k][j];
                assert_eq!(num % prev, 0, "fraction-free step must divide exactly");
                a[i][j] = num / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    let mut r = [[0i128; N]; N];
    for i in 0..N {
        assert_eq!(a[i][i], prev);
        r[i].copy_from_slice(&a[i][N..]);
    }
    for (i, row) in m.iter().enumerate() {
        for j in 0..N {
            let s: i128 = (0..N).map(|k| row[k] * r[k][j]).sum();
            assert_eq!(s, if i == j { prev } else { 0 }, "adjugate check");
        }
    }
    Some((prev, r))
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Membership by enumerating every basis of 9 vertices and testing the sign of
/// the unique coefficients. A point of the hull lies in the cone of some basis.
pub struct BasisOracle {
    bases: Vec<(i128, [[i128; N]; N])>,
}

impl BasisOracle {
    pub fn new(vertices: &[IntBox]) -> Self {
        let coords: Vec<[i128; N]> = vertices.iter().map(coordinates).collect();
        let bases = subsets(vertices.len(), N)
            .into_iter()
            .filter_map(|s| {
                let mut m = [[0i128; N]; N];
                for (col, &v) in s.iter().enumerate() {
                    for row in 0..N {
                        m[row][col] = coords[v][row];
                    }
                }
                bareiss_inverse(&m)
            })
            .collect();
        BasisOracle { bases }
    }

    pub fn basis_count(&self) -> usize {
        self.bases.len()
    }

    pub fn contains(&self, p: &IntBox) -> bool {
        if !in_vertex_span(p) {
            return false;
        }
        let c = coordinates(p);
        self.bases.iter().any(|(d, r)| {
            (0..N).all(|i| {
                let w: i128 = (0..N).map(|k| r[i][k] * c[k]).sum();
                w == 0 || (w > 0) == (*d > 0)
            })
        })
    }
}

pub fn local_oracle() -> BasisOracle {
    BasisOracle::new(&oracle_locals())
}

pub fn genuine_oracle() -> BasisOracle {
    let mut v = oracle_locals();
    v.push(oracle_pr());
    BasisOracle::new(&v)
}

/// Local polytope membership from its facets: positivity, the span condition and
/// the eight relabelled CH functionals lying in `[0, 1]`.
pub fn facet_local_test(p: &IntBox, denom: i128) -> bool {
    if p.iter().flatten().flatten().flatten().any(|&v| v < 0) || !in_vertex_span(p) {
        return false;
    }
    for alpha in 0..2 {
        for beta in 0..2 {
            for gamma in 0..2 {
                let t = |x: usize, y: usize, a: usize, b: usize| p[x][y][a ^ (alpha * x) ^ gamma][b ^ (beta * y)];
                let ch = t(0, 0, 1, 1) + t(1, 0, 0, 0) + t(0, 1, 0, 0) - t(1, 1, 0, 0);
                if ch < 0 || ch > denom {
                    return false;
                }
            }
        }
    }
    true
}

/// A PR variant `a⊕b = xy⊕αx⊕βy⊕γ`, built from the formula.
pub fn oracle_pr_variant(alpha: usize, beta: usize, gamma: usize) -> BipartiteBox {
    BipartiteBox::from_fn(|x, y, a, b| {
        if a ^ b == (x & y) ^ (alpha * x) ^ (beta * y) ^ gamma {
            ratio(1, 2)
        } else {
            Rational::zero()
        }
    })
}

pub fn oracle_local_box(alpha: usize, beta: usize, gamma: usize, delta: usize) -> BipartiteBox {
    BipartiteBox::from_fn(|x, y, a, b| {
        if a == (alpha * x) ^ beta && b == (gamma * y) ^ delta {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// Noisy box by its correlators: `E00 = E01 = xi+gamma`, `E10 = -E11 = xi-gamma`,
/// uniform marginals.
pub fn oracle_noisy(xi: &Rational, gamma: &Rational) -> BipartiteBox {
    BipartiteBox::from_fn(|x, y, a, b| {
        let e = match (x, y) {
            (0, _) => xi + gamma,
            (1, 0) => xi - gamma,
            _ => gamma - xi,
        };
        let sign = if a == b { Rational::one() } else { -Rational::one() };
        (Rational::one() + sign * e) * ratio(1, 4)
    })
}

/// CH from the four correlators, valid for boxes with uniform marginals.
pub fn ch_from_uniform_correlators(e: [[Rational; 2]; 2]) -> Rational {
    let [[e00, e01], [e10, e11]] = e;
    (e00 + e01 + e10 - e11) * ratio(1, 4) + ratio(1, 2)
}

/// A random box mixing up to four of the 16 deterministic boxes and 8 PR variants.
/// Roughly a third of the draws also get a small signalling perturbation.
pub fn random_test_box<R: Rng>(rng: &mut R) -> BipartiteBox {
    let mut pool: Vec<BipartiteBox> = Vec::new();
    for k in 0..16 {
        pool.push(oracle_local_box(k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1));
    }
    for k in 0..8 {
        pool.push(oracle_pr_variant(k >> 2 & 1, k >> 1 & 1, k & 1));
    }
    let terms = rng.gen_range(1..=4);
    let mut raw = Vec::new();
    for _ in 0..terms {
        // lean towards the PR box itself so genuine nonlocal points are common
        let idx = if rng.gen_bool(0.3) { 16 } else { rng.gen_range(0..pool.len()) };
        raw.push((idx, rng.gen_range(1..=6i64)));
    }
    let total: i64 = raw.iter().map(|(_, w)| w).sum();
    let mut out = BipartiteBox::from_fn(|_, _, _, _| Rational::zero());
    for (idx, w) in raw {
        out = out.plus(&pool[idx].scale(&ratio(w, total)));
    }
    if rng.gen_range(0..3) == 0 {
        let shift = ratio(1, rng.gen_range(8..=20));
        let (x, a) = (rng.gen_range(0..2), rng.gen_range(0..2));
        let v = out.get(x, 0, a, 0).clone();
        if v >= shift {
            out = out.with_entry(x, 0, a, 0, &v - &shift).with_entry(x, 0, a, 1, out.get(x, 0, a, 1) + &shift);
        }
    }
    out
}

pub fn is_nonnegative(v: &Rational) -> bool {
    !v.is_negative()
}
