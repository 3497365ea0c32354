//! The coupler: a linear map from Bob's two box ports to a single output bit.
//!
//! The coupler is stored as a [`CouplerTensor`] `t[b'][y1][y2][b1][b2]`. Fed
//! with Alice–Bob and Bob–Charlie boxes it produces the tripartite
//! distribution
//!
//! ```text
//! P(a b' c | x z) = sum over y1 y2 b1 b2 of t[b'][y1][y2][b1][b2] · P(a b1 | x y1) · P(b2 c | y2 z)
//! ```
//!
//! and fed with a single box on both ports it produces `P(b')` directly.
//!
//! The tensor is not written down by hand. [`synthesize_coupler`] collects the
//! defining requirements as exact linear equations on its 32 coefficients:
//!
//! * on two PR boxes the `b' = 0` branch is `(1/3)·PR` and the `b' = 1` branch is
//!   `(2/3)·Pᶠ`;
//! * on each genuine vertex, `P(b' = 0) = (2/3)·CH`;
//! * on every pair of genuine vertices, summing over `b'` gives back the
//!   product marginal of Alice and Charlie.
//!
//! These pin the action of the coupler on every non-signalling input. The
//! remaining freedom lies in directions that no non-signalling input can see,
//! and the representative of minimum Euclidean norm is returned. Positivity of
//! all vertex-pair outputs and closure of the genuine set are then enforced:
//! a tensor that violates either is rejected as infeasible.

use crate::boxes::{ch_value, flat_index, validate, BipartiteBox, Violation, VertexId};
use crate::linalg::{dot, min_norm_solution, RowEchelon};
use crate::polytope::genuine_membership;
use crate::rational::{format_rational, is_probability, one, ratio, zero, Rational};
use crate::sampling::random_genuine_box;
use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

/// Success probability of swapping two PR boxes.
pub fn pr_swap_probability() -> Rational {
    ratio(1, 3)
}

/// Proportionality constant between `P(b' = 0)` and the CH value.
pub fn ch_scale() -> Rational {
    ratio(2, 3)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CouplerError {
    #[error("coupler constraints are infeasible: {0}")]
    Infeasible(String),
    #[error("input box is invalid: {0}")]
    InvalidInput(Violation),
    #[error("negative output probability {value} at x={x}, z={z}, a={a}, b'={b_out}, c={c}")]
    InvalidOutput { x: u8, z: u8, a: u8, b_out: u8, c: u8, value: String },
    #[error("output b'={branch} has probability {value}, outside [0, 1]")]
    InvalidProbability { branch: u8, value: Rational },
    #[error("branch b'={branch} has probability zero")]
    DegenerateBranch { branch: u8 },
    #[error("P(b'=0) depends on the outer inputs: {at_00} at (x,z)=(0,0) but {other} at (x,z)=({x},{z})")]
    SignallingToBob { at_00: String, other: String, x: u8, z: u8 },
}

type Tensor5 = [[[[[Rational; 2]; 2]; 2]; 2]; 2];

/// Coupler coefficients indexed `[b'][y1][y2][b1][b2]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CouplerTensor {
    t: Tensor5,
}

fn array5(mut f: impl FnMut(usize, usize, usize, usize, usize) -> Rational) -> Tensor5 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| std::array::from_fn(|l| std::array::from_fn(|m| f(i, j, k, l, m))))
        })
    })
}

impl CouplerTensor {
    pub fn from_fn(f: impl FnMut(usize, usize, usize, usize, usize) -> Rational) -> Self {
        CouplerTensor { t: array5(f) }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _, _, _, _| zero())
    }

    /// Builds a tensor from 32 coefficients in row-major `[b'][y1][y2][b1][b2]` order.
    pub fn from_slice(v: &[Rational]) -> Self {
        assert_eq!(v.len(), 32, "a coupler tensor has 32 coefficients");
        Self::from_fn(|bo, y1, y2, b1, b2| v[coeff_index(bo, y1, y2, b1, b2)].clone())
    }

    pub fn to_vec(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(32);
        for bo in 0..2 {
            out.extend(self.port_functional(bo));
        }
        out
    }

    pub fn get(&self, b_out: usize, y1: usize, y2: usize, b1: usize, b2: usize) -> &Rational {
        &self.t[b_out][y1][y2][b1][b2]
    }

    pub fn scale(&self, w: &Rational) -> Self {
        Self::from_fn(|i, j, k, l, m| &self.t[i][j][k][l][m] * w)
    }

    /// The canonical synthesized coupler, computed once per process.
    pub fn canonical() -> &'static CouplerTensor {
        static CANONICAL: OnceLock<CouplerTensor> = OnceLock::new();
        CANONICAL.get_or_init(|| {
            synthesize_coupler()
                .expect("coupler constraints are satisfiable")
                .tensor
        })
    }

    /// Coefficients of output `b_out` as a 16-vector over the port box `[y1][y2][b1][b2]`.
    fn port_functional(&self, b_out: usize) -> Vec<Rational> {
        let mut v = Vec::with_capacity(16);
        for y1 in 0..2 {
            for y2 in 0..2 {
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        v.push(self.t[b_out][y1][y2][b1][b2].clone());
                    }
                }
            }
        }
        v
    }
}

fn coeff_index(b_out: usize, y1: usize, y2: usize, b1: usize, b2: usize) -> usize {
    b_out * 16 + flat_index(y1, y2, b1, b2)
}

/// Three-party distribution `P(a b' c | x z)`, indexed `[x][z][a][b'][c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripartiteBox {
    p: Tensor5,
}

impl TripartiteBox {
    pub fn from_fn(f: impl FnMut(usize, usize, usize, usize, usize) -> Rational) -> Self {
        TripartiteBox { p: array5(f) }
    }

    pub fn get(&self, x: usize, z: usize, a: usize, b_out: usize, c: usize) -> &Rational {
        &self.p[x][z][a][b_out][c]
    }

    /// `sum_{a,c} P(a b' c | x z)`.
    pub fn branch_probability(&self, x: usize, z: usize, b_out: usize) -> Rational {
        let mut s = zero();
        for a in 0..2 {
            for c in 0..2 {
                s += &self.p[x][z][a][b_out][c];
            }
        }
        s
    }

    /// Alice–Charlie box with Bob's output summed out.
    pub fn outer_marginal(&self) -> BipartiteBox {
        BipartiteBox::from_fn(|x, z, a, c| &self.p[x][z][a][0][c] + &self.p[x][z][a][1][c])
    }

    /// Unnormalized Alice–Charlie box on branch `b_out`.
    pub fn branch(&self, b_out: usize) -> BipartiteBox {
        BipartiteBox::from_fn(|x, z, a, c| self.p[x][z][a][b_out][c].clone())
    }

    /// Alice–Charlie box conditioned on `b_out`, or `None` if that branch has
    /// probability zero. Assumes the branch probability does not depend on `(x, z)`.
    pub fn conditioned(&self, b_out: usize) -> Option<BipartiteBox> {
        let q = self.branch_probability(0, 0, b_out);
        if q.is_zero() {
            return None;
        }
        Some(self.branch(b_out).map(|v| v / &q))
    }

    pub fn first_negative(&self) -> Option<(usize, usize, usize, usize, usize)> {
        for x in 0..2 {
            for z in 0..2 {
                for a in 0..2 {
                    for bo in 0..2 {
                        for c in 0..2 {
                            if self.p[x][z][a][bo][c].is_negative() {
                                return Some((x, z, a, bo, c));
                            }
                        }
                    }
                }
            }
        }
        None
    }
}

/// Result of conditioning a tripartite output on Bob's bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapOutcome {
    /// `P(b' = 0)`.
    pub q: Rational,
    /// Alice–Charlie box given `b' = 0`.
    pub success_box: BipartiteBox,
    /// Alice–Charlie box given `b' = 1`; absent when `q = 1`.
    pub failure_box: Option<BipartiteBox>,
}

/// Port box `u ⊗ v` seen by the coupler for fixed outer indices `(x, a, z, c)`.
fn port_box(ab: &BipartiteBox, bc: &BipartiteBox, x: usize, a: usize, z: usize, c: usize) -> Vec<Rational> {
    let mut v = Vec::with_capacity(16);
    for y1 in 0..2 {
        for y2 in 0..2 {
            for b1 in 0..2 {
                for b2 in 0..2 {
                    v.push(ab.get(x, y1, a, b1) * bc.get(y2, z, b2, c));
                }
            }
        }
    }
    v
}

/// Bilinear pair action with no validity checks on inputs or outputs.
pub fn pair_output(t: &CouplerTensor, ab: &BipartiteBox, bc: &BipartiteBox) -> TripartiteBox {
    let f = [t.port_functional(0), t.port_functional(1)];
    let mut ports: HashMap<(usize, usize, usize, usize), Vec<Rational>> = HashMap::new();
    TripartiteBox::from_fn(|x, z, a, bo, c| {
        let u = ports.entry((x, z, a, c)).or_insert_with(|| port_box(ab, bc, x, a, z, c));
        dot(&f[bo], u)
    })
}

/// Applies the coupler to Bob's ends of an Alice–Bob and a Bob–Charlie box.
pub fn apply_to_pair(
    t: &CouplerTensor,
    ab: &BipartiteBox,
    bc: &BipartiteBox,
) -> Result<TripartiteBox, CouplerError> {
    for bx in [ab, bc] {
        if let Some(v) = validate(bx).first_violation() {
            return Err(CouplerError::InvalidInput(v));
        }
    }
    let tri = pair_output(t, ab, bc);
    if let Some((x, z, a, bo, c)) = tri.first_negative() {
        return Err(CouplerError::InvalidOutput {
            x: x as u8,
            z: z as u8,
            a: a as u8,
            b_out: bo as u8,
            c: c as u8,
            value: format_rational(tri.get(x, z, a, bo, c)),
        });
    }
    Ok(tri)
}

/// Splits a tripartite distribution into Bob's success and failure branches.
pub fn condition_on_outcome(tri: &TripartiteBox) -> Result<SwapOutcome, CouplerError> {
    let q = tri.branch_probability(0, 0, 0);
    for (x, z) in [(0, 1), (1, 0), (1, 1)] {
        let other = tri.branch_probability(x, z, 0);
        if other != q {
            return Err(CouplerError::SignallingToBob {
                at_00: format_rational(&q),
                other: format_rational(&other),
                x: x as u8,
                z: z as u8,
            });
        }
    }
    if q.is_zero() {
        return Err(CouplerError::DegenerateBranch { branch: 0 });
    }
    let success_box = tri.branch(0).map(|v| v / &q);
    let failure_box = (q != one()).then(|| {
        let r = one() - &q;
        tri.branch(1).map(|v| v / &r)
    });
    Ok(SwapOutcome { q, success_box, failure_box })
}

/// `P(b')` with no range check.
pub fn single_output(t: &CouplerTensor, bx: &BipartiteBox) -> [Rational; 2] {
    let v = bx.to_vec();
    [dot(&t.port_functional(0), &v), dot(&t.port_functional(1), &v)]
}

/// Applies the coupler to both ends of one box, returning `[P(b'=0), P(b'=1)]`.
pub fn apply_to_single(t: &CouplerTensor, bx: &BipartiteBox) -> Result<[Rational; 2], CouplerError> {
    if let Some(v) = validate(bx).first_violation() {
        return Err(CouplerError::InvalidInput(v));
    }
    let out = single_output(t, bx);
    for (branch, value) in out.iter().enumerate() {
        if !is_probability(value) {
            return Err(CouplerError::InvalidProbability { branch: branch as u8, value: value.clone() });
        }
    }
    Ok(out)
}

/// `Pᶠ = (3/2)·(identity − (1/3)·PR)`, the box left after a failed PR swap.
pub fn failure_box() -> BipartiteBox {
    let id = crate::boxes::make_identity_box();
    let pr = crate::boxes::make_pr_box();
    id.minus(&pr.scale(&ratio(1, 3))).scale(&ratio(3, 2))
}

/// Output of [`synthesize_coupler`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplerSynthesis {
    pub tensor: CouplerTensor,
    /// Number of distinct equations in the constraint system.
    pub equations: usize,
    pub rank: usize,
    /// Dimension of the solution set of the equality constraints.
    pub solution_space_dim: usize,
    /// Dimension of that solution set as seen through non-signalling inputs.
    pub observable_dim: usize,
    pub canonical_rule: &'static str,
}

pub const CANONICAL_RULE: &str = "minimum Euclidean norm";

fn genuine_boxes() -> Vec<BipartiteBox> {
    VertexId::genuine().into_iter().map(VertexId::to_box).collect()
}

fn outer_indices() -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..16).map(|k| (k >> 3 & 1, k >> 2 & 1, k >> 1 & 1, k & 1))
}

/// Builds the canonical coupler from its defining constraints.
pub fn synthesize_coupler() -> Result<CouplerSynthesis, CouplerError> {
    let vertices = genuine_boxes();
    let pr = crate::boxes::make_pr_box();
    let pf = failure_box();
    let mut system = RowEchelon::new(32);
    let block = |u: &[Rational], b_out: usize| {
        let mut row = vec![zero(); 32];
        row[b_out * 16..b_out * 16 + 16].clone_from_slice(u);
        row
    };

    // Two PR boxes: (1/3)·PR on success and (2/3)·Pᶠ on failure.
    let success = pr_swap_probability();
    let fail = one() - &success;
    for (x, a, z, c) in outer_indices() {
        let u = port_box(&pr, &pr, x, a, z, c);
        system.push(block(&u, 0), &success * pr.get(x, z, a, c));
        system.push(block(&u, 1), &fail * pf.get(x, z, a, c));
    }

    // Single genuine vertex: P(b'=0) = (2/3)·CH.
    for v in &vertices {
        system.push(block(&v.to_vec(), 0), ch_scale() * ch_value(v));
    }

    // Bob cannot signal: summing out b' leaves the product marginal.
    for ab in &vertices {
        for bc in &vertices {
            for (x, a, z, c) in outer_indices() {
                let u = port_box(ab, bc, x, a, z, c);
                let mut row = block(&u, 0);
                row[16..].clone_from_slice(&u);
                let marginal = ab.alice_marginal(x, a) * bc.bob_marginal(z, c);
                system.push(row, marginal);
            }
        }
    }

    let equations = system_equations(&vertices);
    let solution = system
        .solve()
        .ok_or_else(|| CouplerError::Infeasible("equality constraints are inconsistent".into()))?;
    let observable_dim = observable_dimension(&solution.null_basis, &vertices);
    if observable_dim > 0 {
        return Err(CouplerError::Infeasible(format!(
            "equality constraints leave {observable_dim} observable degrees of freedom"
        )));
    }
    let tensor = CouplerTensor::from_slice(&min_norm_solution(&solution));

    if let Some(w) = positivity_witness(&tensor, &vertices) {
        return Err(CouplerError::Infeasible(format!("positivity fails: {w}")));
    }
    if let Some(w) = closure_witness(&tensor, &vertices) {
        return Err(CouplerError::Infeasible(format!("closure fails: {w}")));
    }

    Ok(CouplerSynthesis {
        tensor,
        equations,
        rank: solution.rank,
        solution_space_dim: solution.dimension(),
        observable_dim,
        canonical_rule: CANONICAL_RULE,
    })
}

fn system_equations(vertices: &[BipartiteBox]) -> usize {
    32 + vertices.len() + vertices.len() * vertices.len() * 16
}

/// Rank of the null-space directions evaluated on all vertex-pair port boxes.
fn observable_dimension(null_basis: &[Vec<Rational>], vertices: &[BipartiteBox]) -> usize {
    let mut ports: Vec<Vec<Rational>> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for ab in vertices {
        for bc in vertices {
            for (x, a, z, c) in outer_indices() {
                let u = port_box(ab, bc, x, a, z, c);
                if seen.insert(u.clone()) {
                    ports.push(u);
                }
            }
        }
    }
    let mut images = RowEchelon::new(2 * ports.len());
    for n in null_basis {
        let image: Vec<Rational> = (0..2)
            .flat_map(|bo| ports.iter().map(move |u| dot(&n[bo * 16..bo * 16 + 16], u)))
            .collect();
        images.push(image, zero());
    }
    images.rank()
}

fn positivity_witness(t: &CouplerTensor, vertices: &[BipartiteBox]) -> Option<String> {
    for (i, ab) in vertices.iter().enumerate() {
        for (j, bc) in vertices.iter().enumerate() {
            let tri = pair_output(t, ab, bc);
            if let Some((x, z, a, bo, c)) = tri.first_negative() {
                return Some(format!(
                    "pair ({}, {}) gives {} at x={x} z={z} a={a} b'={bo} c={c}",
                    VertexId::genuine()[i],
                    VertexId::genuine()[j],
                    format_rational(tri.get(x, z, a, bo, c))
                ));
            }
        }
    }
    for (i, v) in vertices.iter().enumerate() {
        let out = single_output(t, v);
        if let Some(bad) = out.iter().find(|p| !is_probability(p)) {
            return Some(format!(
                "single box {} gives probability {}",
                VertexId::genuine()[i],
                format_rational(bad)
            ));
        }
    }
    None
}

fn closure_witness(t: &CouplerTensor, vertices: &[BipartiteBox]) -> Option<String> {
    let mut memo: HashMap<BipartiteBox, bool> = HashMap::new();
    let ids = VertexId::genuine();
    for (i, ab) in vertices.iter().enumerate() {
        for (j, bc) in vertices.iter().enumerate() {
            let tri = pair_output(t, ab, bc);
            for bo in 0..2 {
                let Some(cond) = tri.conditioned(bo) else { continue };
                let ok = *memo.entry(cond.clone()).or_insert_with(|| {
                    validate(&cond).is_valid() && genuine_membership(&cond).is_member()
                });
                if !ok {
                    return Some(format!("pair ({}, {}) branch b'={bo} is not genuine", ids[i], ids[j]));
                }
            }
        }
    }
    None
}

/// One line of a [`VerificationReport`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Witness of the first failure, or a short summary on success.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &'static str, failure: Option<String>, summary: impl Into<String>) {
        let passed = failure.is_none();
        self.checks.push(CheckResult { name, passed, detail: failure.unwrap_or_else(|| summary.into()) });
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

pub const CHECK_NORMALIZATION: &str = "normalization";
pub const CHECK_PR_PAIR: &str = "pr-pair";
pub const CHECK_SINGLE_BOX: &str = "single-box";
pub const CHECK_MARGINAL: &str = "no-signalling-marginal";
pub const CHECK_BOB_INDEPENDENCE: &str = "branch-independence";
pub const CHECK_POSITIVITY: &str = "positivity";
pub const CHECK_CLOSURE: &str = "closure";
pub const CHECK_CH_LAW: &str = "ch-proportionality";

/// Number of random mixtures used by [`verify_coupler`].
pub const VERIFY_MIXTURES: usize = 1000;

/// Re-checks every defining property of a coupler, collecting witnesses.
pub fn verify_coupler(t: &CouplerTensor) -> VerificationReport {
    let ids = VertexId::genuine();
    let vertices = genuine_boxes();
    let mut report = VerificationReport::default();

    let failure = ids.iter().zip(&vertices).find_map(|(id, v)| {
        let [p0, p1] = single_output(t, v);
        let s = &p0 + &p1;
        (s != one()).then(|| format!("{id}: P(b'=0) + P(b'=1) = {}", format_rational(&s)))
    });
    report.push(CHECK_NORMALIZATION, failure, "P(b') sums to 1 on all 17 vertices");

    let pr = crate::boxes::make_pr_box();
    let failure = match condition_on_outcome(&pair_output(t, &pr, &pr)) {
        Ok(out) if out.q == pr_swap_probability()
            && out.success_box == pr
            && out.failure_box.as_ref() == Some(&failure_box()) => None,
        Ok(out) => Some(format!("q = {} with mismatched branch boxes", format_rational(&out.q))),
        Err(e) => Some(e.to_string()),
    };
    report.push(CHECK_PR_PAIR, failure, "PR ⊗ PR gives q = 1/3, PR on success, Pᶠ on failure");

    let failure = ids.iter().zip(&vertices).find_map(|(id, v)| {
        let [p0, _] = single_output(t, v);
        let expected = ch_scale() * ch_value(v);
        (p0 != expected || !is_probability(&p0)).then(|| {
            format!("{id}: P(b'=0) = {}, expected {}", format_rational(&p0), format_rational(&expected))
        })
    });
    report.push(CHECK_SINGLE_BOX, failure, "P(b'=0) = (2/3)·CH on all 17 vertices");

    let mut marginal_failure = None;
    let mut independence_failure = None;
    let mut positivity_failure = None;
    for (i, ab) in vertices.iter().enumerate() {
        for (j, bc) in vertices.iter().enumerate() {
            let tri = pair_output(t, ab, bc);
            if marginal_failure.is_none() {
                marginal_failure = marginal_witness(&tri, ab, bc).map(|w| format!("({}, {}): {w}", ids[i], ids[j]));
            }
            if independence_failure.is_none() {
                if let Err(e @ CouplerError::SignallingToBob { .. }) = condition_on_outcome(&tri) {
                    independence_failure = Some(format!("({}, {}): {e}", ids[i], ids[j]));
                }
            }
            if positivity_failure.is_none() {
                if let Some((x, z, a, bo, c)) = tri.first_negative() {
                    positivity_failure = Some(format!(
                        "({}, {}): {} at x={x} z={z} a={a} b'={bo} c={c}",
                        ids[i],
                        ids[j],
                        format_rational(tri.get(x, z, a, bo, c))
                    ));
                }
            }
        }
    }
    report.push(CHECK_MARGINAL, marginal_failure, "sum over b' equals the product marginal for all 289 vertex pairs");
    report.push(CHECK_BOB_INDEPENDENCE, independence_failure, "P(b'=0) independent of (x, z) for all 289 vertex pairs");
    let positivity_failure = positivity_failure.or_else(|| positivity_witness(t, &vertices));
    report.push(CHECK_POSITIVITY, positivity_failure, "all vertex-pair and single-vertex outputs are probabilities");

    report.push(CHECK_CLOSURE, closure_witness(t, &vertices), "every conditioned vertex-pair output is genuine");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let failure = (0..VERIFY_MIXTURES).find_map(|k| {
        let bx = random_genuine_box(&mut rng);
        let [p0, _] = single_output(t, &bx);
        let expected = ch_scale() * ch_value(&bx);
        (p0 != expected).then(|| {
            format!("mixture #{k}: P(b'=0) = {}, expected {}", format_rational(&p0), format_rational(&expected))
        })
    });
    report.push(
        CHECK_CH_LAW,
        failure,
        format!("P(b'=0) = (2/3)·CH on {VERIFY_MIXTURES} random genuine mixtures"),
    );

    report
}

/// Compares `sum_{b'} P(a b' c|xz)` with the product marginal at every `(y1, y2)`.
fn marginal_witness(tri: &TripartiteBox, ab: &BipartiteBox, bc: &BipartiteBox) -> Option<String> {
    let outer = tri.outer_marginal();
    for (x, a, z, c) in outer_indices() {
        for y1 in 0..2 {
            for y2 in 0..2 {
                let mut product = zero();
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        product += ab.get(x, y1, a, b1) * bc.get(y2, z, b2, c);
                    }
                }
                if &product != outer.get(x, z, a, c) {
                    return Some(format!(
                        "x={x} a={a} z={z} c={c} (y1={y1}, y2={y2}): {} vs {}",
                        format_rational(outer.get(x, z, a, c)),
                        format_rational(&product)
                    ));
                }
            }
        }
    }
    None
}
