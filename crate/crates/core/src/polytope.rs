//! Exact convex-hull membership for the local and genuine polytopes, and the
//! TLM test for quantum realisability.
//!
//! Membership is a linear feasibility problem: find `w >= 0` with
//! `sum_v w_v = 1` and `sum_v w_v V_v = P` entrywise. It is solved by the
//! exact phase-1 simplex in [`crate::lp`], so a `Member` verdict always comes
//! with weights that reproduce the box exactly.

use crate::boxes::{ch_value, correlator, validate, BipartiteBox, NoisyBoxParams, VertexId};
use crate::lp::find_nonnegative_solution;
use crate::rational::{half, one, to_f64, Rational};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;

/// Default tolerance for the floating-point TLM comparison.
pub const DEFAULT_TLM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Member,
    NonMember,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipCertificate {
    pub verdict: Verdict,
    /// Nonzero convex weights, present exactly when the verdict is `Member`.
    pub weights: Option<BTreeMap<VertexId, Rational>>,
}

impl MembershipCertificate {
    pub fn is_member(&self) -> bool {
        self.verdict == Verdict::Member
    }

    /// Re-mixes the certificate weights and compares with `bx` entry for entry.
    pub fn verify(&self, bx: &BipartiteBox) -> bool {
        match (&self.verdict, &self.weights) {
            (Verdict::Member, Some(w)) => {
                let total: Rational = w.values().sum();
                if total != one() || w.values().any(|v| v < &Rational::zero()) {
                    return false;
                }
                let mut acc = BipartiteBox::from_fn(|_, _, _, _| Rational::zero());
                for (v, weight) in w {
                    acc = acc.plus(&v.to_box().scale(weight));
                }
                &acc == bx
            }
            (Verdict::NonMember, None) => true,
            _ => false,
        }
    }
}

/// Decides whether `bx` lies in the convex hull of `vertices`.
pub fn member_of_hull(bx: &BipartiteBox, vertices: &[VertexId]) -> MembershipCertificate {
    let boxes: Vec<Vec<Rational>> = vertices.iter().map(|v| v.to_box().to_vec()).collect();
    let target = bx.to_vec();
    // 16 entry rows plus the normalization row, one column per vertex.
    let mut a: Vec<Vec<Rational>> = (0..16)
        .map(|k| boxes.iter().map(|vb| vb[k].clone()).collect())
        .collect();
    a.push(vec![one(); vertices.len()]);
    let mut b = target;
    b.push(one());

    match find_nonnegative_solution(&a, &b) {
        Some(x) => {
            let weights = vertices
                .iter()
                .zip(x)
                .filter(|(_, w)| !w.is_zero())
                .map(|(v, w)| (*v, w))
                .collect();
            MembershipCertificate { verdict: Verdict::Member, weights: Some(weights) }
        }
        None => MembershipCertificate { verdict: Verdict::NonMember, weights: None },
    }
}

pub fn local_membership(bx: &BipartiteBox) -> MembershipCertificate {
    member_of_hull(bx, &VertexId::locals())
}

pub fn genuine_membership(bx: &BipartiteBox) -> MembershipCertificate {
    member_of_hull(bx, &VertexId::genuine())
}

pub fn is_genuine(bx: &BipartiteBox) -> bool {
    validate(bx).is_valid() && genuine_membership(bx).is_member()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Local,
    GenuineNonlocal,
    NonSignallingNonGenuine,
    Invalid,
}

impl Tier {
    pub fn as_str(self) -> &'static str {
        match self {
            Tier::Local => "Local",
            Tier::GenuineNonlocal => "GenuineNonlocal",
            Tier::NonSignallingNonGenuine => "NonSignallingNonGenuine",
            Tier::Invalid => "Invalid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TlmStatus {
    Satisfied,
    Violated,
    Boundary,
}

impl TlmStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TlmStatus::Satisfied => "Satisfied",
            TlmStatus::Violated => "Violated",
            TlmStatus::Boundary => "Boundary",
        }
    }
}

impl fmt::Display for TlmStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub tier: Tier,
    pub tlm: TlmStatus,
    pub ch: Rational,
}

/// Places `bx` in the hierarchy local ⊂ genuine ⊂ non-signalling and reports
/// its TLM status.
///
/// Local boxes are always reported as TLM-satisfied: deterministic vertices
/// sit where both sides of the TLM inequality vanish, which the floating-point
/// test would otherwise call `Boundary`. Invalid boxes are reported as
/// violating, since they are not realisable at all.
pub fn classify(bx: &BipartiteBox, tol: f64) -> Classification {
    let ch = ch_value(bx);
    if !validate(bx).is_valid() {
        return Classification { tier: Tier::Invalid, tlm: TlmStatus::Violated, ch };
    }
    if local_membership(bx).is_member() {
        return Classification { tier: Tier::Local, tlm: TlmStatus::Satisfied, ch };
    }
    let tier = if genuine_membership(bx).is_member() {
        Tier::GenuineNonlocal
    } else {
        Tier::NonSignallingNonGenuine
    };
    Classification { tier, tlm: tlm_satisfied(bx, tol), ch }
}

/// Correlators `[[E00, E01], [E10, E11]]` in double precision.
pub fn correlators_f64(bx: &BipartiteBox) -> [[f64; 2]; 2] {
    std::array::from_fn(|x| std::array::from_fn(|y| to_f64(&correlator(bx, x as u8, y as u8))))
}

/// Evaluates the TLM inequality in Landau's form on a box.
pub fn tlm_satisfied(bx: &BipartiteBox, tol: f64) -> TlmStatus {
    tlm_from_correlators(correlators_f64(bx), tol)
}

/// `|E00 E01 - E10 E11| <= sqrt((1-E00²)(1-E01²)) + sqrt((1-E10²)(1-E11²))`,
/// with `Boundary` when the two sides differ by at most `tol`.
pub fn tlm_from_correlators(e: [[f64; 2]; 2], tol: f64) -> TlmStatus {
    let [[e00, e01], [e10, e11]] = e;
    let lhs = (e00 * e01 - e10 * e11).abs();
    let root = |u: f64, v: f64| ((1.0 - u * u) * (1.0 - v * v)).max(0.0).sqrt();
    let rhs = root(e00, e01) + root(e10, e11);
    if (lhs - rhs).abs() <= tol {
        TlmStatus::Boundary
    } else if lhs < rhs {
        TlmStatus::Satisfied
    } else {
        TlmStatus::Violated
    }
}

/// Correlators of the isotropic box `xi PR + (1 - xi) identity` for a real `xi`.
pub fn isotropic_correlators(xi: f64) -> [[f64; 2]; 2] {
    [[xi, xi], [xi, -xi]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapUsefulness {
    /// Two copies swap to a box with CH value at most 1.
    Useless,
    Useful,
}

/// Exact test `xi² + gamma² <= 1/2` on the noisy slice.
pub fn slice_boundary_check(params: &NoisyBoxParams) -> SwapUsefulness {
    let s = params.xi() * params.xi() + params.gamma() * params.gamma();
    if s <= half() {
        SwapUsefulness::Useless
    } else {
        SwapUsefulness::Useful
    }
}
