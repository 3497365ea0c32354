//! Bipartite and single-party boxes with exact entries.
//!
//! A [`BipartiteBox`] stores `P(ab|xy)` for binary inputs and outputs, indexed
//! `[x][y][a][b]` (inputs first, outputs second). The same order is used by
//! the JSON format and the coupler tensor.

use crate::rational::{half, int, one, ratio, zero, Rational};
use num_traits::{Signed, Zero};
use std::fmt;

/// One bit, stored as `0` or `1`.
pub type Bit = u8;

pub const BITS: [Bit; 2] = [0, 1];

fn check_bit(name: &str, v: Bit) -> usize {
    assert!(v <= 1, "{name} must be 0 or 1, got {v}");
    v as usize
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BoxError {
    #[error("noisy-box parameters must satisfy xi >= 0, gamma >= 0, xi + gamma <= 1 (got xi = {xi}, gamma = {gamma})")]
    InvalidNoisyParams { xi: String, gamma: String },
    #[error("mixture weight {index} is negative ({weight})")]
    NegativeWeight { index: usize, weight: String },
    #[error("mixture weights sum to {0}, expected 1")]
    WeightsNotNormalized(String),
    #[error("mixture has no terms")]
    EmptyMixture,
}

/// Bipartite conditional distribution `P(ab|xy)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipartiteBox {
    p: [[[[Rational; 2]; 2]; 2]; 2],
}

impl BipartiteBox {
    /// Builds a box entry by entry; arguments are `(x, y, a, b)`.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> Rational) -> Self {
        let p = std::array::from_fn(|x| {
            std::array::from_fn(|y| std::array::from_fn(|a| std::array::from_fn(|b| f(x, y, a, b))))
        });
        BipartiteBox { p }
    }

    pub fn from_array(p: [[[[Rational; 2]; 2]; 2]; 2]) -> Self {
        BipartiteBox { p }
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> &Rational {
        &self.p[x][y][a][b]
    }

    pub fn entries(&self) -> &[[[[Rational; 2]; 2]; 2]; 2] {
        &self.p
    }

    /// Entries in row-major `[x][y][a][b]` order.
    pub fn to_vec(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(16);
        self.for_each(|_, _, _, _, v| out.push(v.clone()));
        out
    }

    pub fn from_slice(v: &[Rational]) -> Self {
        assert_eq!(v.len(), 16, "a bipartite box has 16 entries");
        Self::from_fn(|x, y, a, b| v[flat_index(x, y, a, b)].clone())
    }

    pub fn for_each(&self, mut f: impl FnMut(usize, usize, usize, usize, &Rational)) {
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        f(x, y, a, b, &self.p[x][y][a][b]);
                    }
                }
            }
        }
    }

    pub fn map(&self, mut f: impl FnMut(&Rational) -> Rational) -> Self {
        Self::from_fn(|x, y, a, b| f(&self.p[x][y][a][b]))
    }

    pub fn scale(&self, w: &Rational) -> Self {
        self.map(|v| v * w)
    }

    /// Entrywise sum, with no validity requirement on either side.
    pub fn plus(&self, other: &Self) -> Self {
        Self::from_fn(|x, y, a, b| &self.p[x][y][a][b] + &other.p[x][y][a][b])
    }

    pub fn minus(&self, other: &Self) -> Self {
        Self::from_fn(|x, y, a, b| &self.p[x][y][a][b] - &other.p[x][y][a][b])
    }

    /// Returns a copy with a single entry replaced.
    pub fn with_entry(&self, x: usize, y: usize, a: usize, b: usize, v: Rational) -> Self {
        let mut out = self.clone();
        out.p[x][y][a][b] = v;
        out
    }

    /// Alice's marginal `P(a|x)`, read at `y = 0`.
    pub fn alice_marginal(&self, x: usize, a: usize) -> Rational {
        &self.p[x][0][a][0] + &self.p[x][0][a][1]
    }

    /// Bob's marginal `P(b|y)`, read at `x = 0`.
    pub fn bob_marginal(&self, y: usize, b: usize) -> Rational {
        &self.p[0][y][0][b] + &self.p[0][y][1][b]
    }
}

pub(crate) fn flat_index(x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * 2 + y) * 2 + a) * 2 + b
}

/// Single-party box `P(b|y)`, indexed `[y][b]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SingleBox {
    p: [[Rational; 2]; 2],
}

impl SingleBox {
    pub fn from_array(p: [[Rational; 2]; 2]) -> Self {
        SingleBox { p }
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        SingleBox {
            p: std::array::from_fn(|y| std::array::from_fn(|b| f(y, b))),
        }
    }

    /// Deterministic box with `b = alpha * y XOR beta`.
    pub fn local(alpha: Bit, beta: Bit) -> Self {
        let (alpha, beta) = (check_bit("alpha", alpha), check_bit("beta", beta));
        Self::from_fn(|y, b| if b == (alpha & y) ^ beta { one() } else { zero() })
    }

    pub fn get(&self, y: usize, b: usize) -> &Rational {
        &self.p[y][b]
    }

    pub fn entries(&self) -> &[[Rational; 2]; 2] {
        &self.p
    }

    /// Convex mixture of single boxes.
    pub fn mix(terms: &[(Rational, SingleBox)]) -> Result<SingleBox, BoxError> {
        check_convex(terms.iter().map(|(w, _)| w))?;
        Ok(Self::from_fn(|y, b| terms.iter().map(|(w, s)| w * &s.p[y][b]).sum()))
    }

    /// First violation found, if any.
    pub fn violation(&self) -> Option<Violation> {
        for y in 0..2 {
            for b in 0..2 {
                if self.p[y][b].is_negative() {
                    return Some(Violation::NegativeSingle { y: y as Bit, b: b as Bit });
                }
            }
        }
        for y in 0..2 {
            if &self.p[y][0] + &self.p[y][1] != one() {
                return Some(Violation::UnnormalizedSingle { y: y as Bit });
            }
        }
        None
    }

    pub fn is_valid(&self) -> bool {
        self.violation().is_none()
    }
}

/// One of the 17 genuine extremal boxes: the 16 deterministic boxes and the PR box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    /// `a = alpha * x XOR beta`, `b = gamma * y XOR delta`.
    Local { alpha: Bit, beta: Bit, gamma: Bit, delta: Bit },
    Pr,
}

impl VertexId {
    pub fn local(alpha: Bit, beta: Bit, gamma: Bit, delta: Bit) -> Self {
        for (n, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma), ("delta", delta)] {
            check_bit(n, v);
        }
        VertexId::Local { alpha, beta, gamma, delta }
    }

    /// The 16 deterministic vertices, ordered by `(alpha, beta, gamma, delta)`.
    pub fn locals() -> Vec<VertexId> {
        let mut out = Vec::with_capacity(16);
        for alpha in BITS {
            for beta in BITS {
                for gamma in BITS {
                    for delta in BITS {
                        out.push(VertexId::Local { alpha, beta, gamma, delta });
                    }
                }
            }
        }
        out
    }

    /// All 17 genuine vertices: the locals followed by the PR box.
    pub fn genuine() -> Vec<VertexId> {
        let mut out = Self::locals();
        out.push(VertexId::Pr);
        out
    }

    pub fn to_box(self) -> BipartiteBox {
        match self {
            VertexId::Local { alpha, beta, gamma, delta } => {
                make_local_vertex(alpha, beta, gamma, delta)
            }
            VertexId::Pr => make_pr_box(),
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Local { alpha, beta, gamma, delta } => {
                write!(f, "L{alpha}{beta}{gamma}{delta}")
            }
            VertexId::Pr => write!(f, "PR"),
        }
    }
}

/// Parameters of `xi * PR + gamma * PR2 + (1 - xi - gamma) * identity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NoisyBoxParams {
    xi: Rational,
    gamma: Rational,
}

impl NoisyBoxParams {
    pub fn new(xi: Rational, gamma: Rational) -> Result<Self, BoxError> {
        if xi.is_negative() || gamma.is_negative() || &xi + &gamma > one() {
            return Err(BoxError::InvalidNoisyParams {
                xi: crate::rational::format_rational(&xi),
                gamma: crate::rational::format_rational(&gamma),
            });
        }
        Ok(NoisyBoxParams { xi, gamma })
    }

    pub fn xi(&self) -> &Rational {
        &self.xi
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }
}

/// Deterministic box `a = alpha x XOR beta`, `b = gamma y XOR delta`.
pub fn make_local_vertex(alpha: Bit, beta: Bit, gamma: Bit, delta: Bit) -> BipartiteBox {
    let alpha = check_bit("alpha", alpha);
    let beta = check_bit("beta", beta);
    let gamma = check_bit("gamma", gamma);
    let delta = check_bit("delta", delta);
    BipartiteBox::from_fn(|x, y, a, b| {
        if a == (alpha & x) ^ beta && b == (gamma & y) ^ delta {
            one()
        } else {
            zero()
        }
    })
}

/// Box uniform on the outputs satisfying `a XOR b = xy XOR alpha x XOR beta y XOR gamma`.
///
/// The eight choices are the PR box `(0,0,0)` and its relabelings. Only the
/// PR box itself is genuine; the others (for instance the anti-PR box
/// `(0,0,1)` and `PR2 = (1,0,0)`) are valid non-signalling boxes that carry
/// no [`VertexId`].
pub fn make_pr_variant(alpha: Bit, beta: Bit, gamma: Bit) -> BipartiteBox {
    let alpha = check_bit("alpha", alpha);
    let beta = check_bit("beta", beta);
    let gamma = check_bit("gamma", gamma);
    BipartiteBox::from_fn(|x, y, a, b| {
        if a ^ b == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma {
            half()
        } else {
            zero()
        }
    })
}

pub fn make_pr_box() -> BipartiteBox {
    make_pr_variant(0, 0, 0)
}

/// `a XOR b XOR 1 = xy`.
pub fn make_anti_pr_box() -> BipartiteBox {
    make_pr_variant(0, 0, 1)
}

/// `a XOR b = xy XOR x`.
pub fn make_pr2_box() -> BipartiteBox {
    make_pr_variant(1, 0, 0)
}

/// The fully mixed box, every entry 1/4.
pub fn make_identity_box() -> BipartiteBox {
    BipartiteBox::from_fn(|_, _, _, _| ratio(1, 4))
}

pub fn make_noisy_box(params: &NoisyBoxParams) -> BipartiteBox {
    let noise = one() - params.xi() - params.gamma();
    let pr = make_pr_box();
    let pr2 = make_pr2_box();
    let id = make_identity_box();
    BipartiteBox::from_fn(|x, y, a, b| {
        params.xi() * pr.get(x, y, a, b)
            + params.gamma() * pr2.get(x, y, a, b)
            + &noise * id.get(x, y, a, b)
    })
}

/// `P(11|00) + P(00|10) + P(00|01) - P(00|11)`.
pub fn ch_value(bx: &BipartiteBox) -> Rational {
    bx.get(0, 0, 1, 1) + bx.get(1, 0, 0, 0) + bx.get(0, 1, 0, 0) - bx.get(1, 1, 0, 0)
}

/// Coefficients of the CH functional over `[x][y][a][b]`.
pub fn ch_coefficients() -> BipartiteBox {
    BipartiteBox::from_fn(|x, y, a, b| match (x, y, a, b) {
        (0, 0, 1, 1) | (1, 0, 0, 0) | (0, 1, 0, 0) => one(),
        (1, 1, 0, 0) => int(-1),
        _ => zero(),
    })
}

/// `E_xy = P(a = b | xy) - P(a != b | xy)`.
pub fn correlator(bx: &BipartiteBox, x: Bit, y: Bit) -> Rational {
    let (x, y) = (x as usize, y as usize);
    bx.get(x, y, 0, 0) + bx.get(x, y, 1, 1) - bx.get(x, y, 0, 1) - bx.get(x, y, 1, 0)
}

fn check_convex<'a>(weights: impl Iterator<Item = &'a Rational>) -> Result<(), BoxError> {
    let mut total = zero();
    let mut any = false;
    for (index, w) in weights.enumerate() {
        any = true;
        if w.is_negative() {
            return Err(BoxError::NegativeWeight {
                index,
                weight: crate::rational::format_rational(w),
            });
        }
        total += w;
    }
    if !any {
        return Err(BoxError::EmptyMixture);
    }
    if total != one() {
        return Err(BoxError::WeightsNotNormalized(crate::rational::format_rational(&total)));
    }
    Ok(())
}

/// Convex combination `sum_i w_i B_i`. Weights must be nonnegative and sum to one.
pub fn mix(terms: &[(Rational, BipartiteBox)]) -> Result<BipartiteBox, BoxError> {
    check_convex(terms.iter().map(|(w, _)| w))?;
    Ok(BipartiteBox::from_fn(|x, y, a, b| {
        terms.iter().map(|(w, bx)| w * bx.get(x, y, a, b)).sum()
    }))
}

/// A single broken invariant, located by its first offending index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    Negative { x: Bit, y: Bit, a: Bit, b: Bit },
    Unnormalized { x: Bit, y: Bit },
    /// Alice's marginal `P(a|x)` depends on Bob's input.
    AliceMarginal { x: Bit, a: Bit },
    /// Bob's marginal `P(b|y)` depends on Alice's input.
    BobMarginal { y: Bit, b: Bit },
    NegativeSingle { y: Bit, b: Bit },
    UnnormalizedSingle { y: Bit },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Negative { x, y, a, b } => write!(f, "negative entry at p[{x}][{y}][{a}][{b}]"),
            Violation::Unnormalized { x, y } => {
                write!(f, "entries at p[{x}][{y}] do not sum to 1")
            }
            Violation::AliceMarginal { x, a } => {
                write!(f, "Alice's marginal P(a={a}|x={x}) depends on y")
            }
            Violation::BobMarginal { y, b } => {
                write!(f, "Bob's marginal P(b={b}|y={y}) depends on x")
            }
            Violation::NegativeSingle { y, b } => write!(f, "negative entry at p[{y}][{b}]"),
            Violation::UnnormalizedSingle { y } => write!(f, "entries at p[{y}] do not sum to 1"),
        }
    }
}

/// Outcome of [`validate`]; each field holds the first violation of that invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub positivity: Option<Violation>,
    pub normalization: Option<Violation>,
    pub alice_no_signalling: Option<Violation>,
    pub bob_no_signalling: Option<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.first_violation().is_none()
    }

    pub fn first_violation(&self) -> Option<Violation> {
        self.positivity
            .or(self.normalization)
            .or(self.alice_no_signalling)
            .or(self.bob_no_signalling)
    }

    pub fn violations(&self) -> Vec<Violation> {
        [self.positivity, self.normalization, self.alice_no_signalling, self.bob_no_signalling]
            .into_iter()
            .flatten()
            .collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let line = |f: &mut fmt::Formatter<'_>, name: &str, v: &Option<Violation>| match v {
            None => writeln!(f, "{name}: pass"),
            Some(v) => writeln!(f, "{name}: FAIL ({v})"),
        };
        line(f, "positivity", &self.positivity)?;
        line(f, "normalization", &self.normalization)?;
        line(f, "no-signalling (Alice)", &self.alice_no_signalling)?;
        line(f, "no-signalling (Bob)", &self.bob_no_signalling)
    }
}

/// Checks positivity, normalization and no-signalling in both directions, exactly.
pub fn validate(bx: &BipartiteBox) -> ValidationReport {
    let mut report = ValidationReport::default();
    bx.for_each(|x, y, a, b, v| {
        if report.positivity.is_none() && v.is_negative() {
            report.positivity =
                Some(Violation::Negative { x: x as Bit, y: y as Bit, a: a as Bit, b: b as Bit });
        }
    });
    'norm: for x in 0..2 {
        for y in 0..2 {
            let total: Rational = (0..2).flat_map(|a| (0..2).map(move |b| (a, b)))
                .map(|(a, b)| bx.get(x, y, a, b))
                .sum();
            if total != one() {
                report.normalization = Some(Violation::Unnormalized { x: x as Bit, y: y as Bit });
                break 'norm;
            }
        }
    }
    'alice: for x in 0..2 {
        for a in 0..2 {
            let m0 = bx.get(x, 0, a, 0) + bx.get(x, 0, a, 1);
            let m1 = bx.get(x, 1, a, 0) + bx.get(x, 1, a, 1);
            if !(m0 - m1).is_zero() {
                report.alice_no_signalling = Some(Violation::AliceMarginal { x: x as Bit, a: a as Bit });
                break 'alice;
            }
        }
    }
    'bob: for y in 0..2 {
        for b in 0..2 {
            let m0 = bx.get(0, y, 0, b) + bx.get(0, y, 1, b);
            let m1 = bx.get(1, y, 0, b) + bx.get(1, y, 1, b);
            if !(m0 - m1).is_zero() {
                report.bob_no_signalling = Some(Violation::BobMarginal { y: y as Bit, b: b as Bit });
                break 'bob;
            }
        }
    }
    report
}
