//! End-to-end protocols built on the coupler: non-locality swapping, the
//! noisy-family sweep, teleportation, and two consistency demonstrations.

use crate::boxes::{
    ch_value, make_identity_box, make_noisy_box, make_pr_box, mix, validate, BipartiteBox,
    NoisyBoxParams, SingleBox, VertexId, BITS,
};
use crate::coupler::{
    apply_to_pair, condition_on_outcome, single_output, CouplerError, CouplerTensor, SwapOutcome,
};
use crate::polytope::{is_genuine, tlm_satisfied, TlmStatus};
use crate::rational::{format_rational, half, is_probability, one, ratio, zero, Rational};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use std::io;

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("{side} box is not genuine")]
    NotGenuine { side: &'static str },
    #[error(transparent)]
    Coupler(#[from] CouplerError),
    #[error("sweep step must satisfy 0 < step <= 1/4, got {0}")]
    InvalidStep(String),
    #[error("swap law fails at xi = {xi}, gamma = {gamma}: CH = {got}, expected {expected}")]
    SwapLawMismatch { xi: String, gamma: String, got: String, expected: String },
    #[error("failed to build worker pool: {0}")]
    ThreadPool(String),
    #[error("teleportation channel or input is invalid: {0}")]
    InvalidInput(String),
}

/// Swaps with the canonical coupler, requiring both boxes to be genuine.
pub fn swap(ab: &BipartiteBox, bc: &BipartiteBox) -> Result<SwapOutcome, ProtocolError> {
    swap_with(CouplerTensor::canonical(), ab, bc, true)
}

/// Swaps with an arbitrary coupler. With `check_genuine = false` the
/// membership gate is skipped, which lets non-genuine inputs through.
pub fn swap_with(
    t: &CouplerTensor,
    ab: &BipartiteBox,
    bc: &BipartiteBox,
    check_genuine: bool,
) -> Result<SwapOutcome, ProtocolError> {
    if check_genuine {
        if !is_genuine(ab) {
            return Err(ProtocolError::NotGenuine { side: "Alice-Bob" });
        }
        if !is_genuine(bc) {
            return Err(ProtocolError::NotGenuine { side: "Bob-Charlie" });
        }
    }
    let tri = apply_to_pair(t, ab, bc)?;
    Ok(condition_on_outcome(&tri)?)
}

/// One grid point of the noisy-family sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRecord {
    pub xi: Rational,
    pub gamma: Rational,
    pub ch_in: Rational,
    pub q: Rational,
    pub ch_out_success: Rational,
    /// Whether the success box is non-local, i.e. its CH value exceeds 1.
    pub swappable: bool,
    pub tlm: TlmStatus,
}

pub fn default_step() -> Rational {
    ratio(1, 20)
}

/// Genuine grid points `(i·step, j·step)` with `xi + gamma <= 1`, ordered by `(xi, gamma)`.
pub fn noisy_grid(step: &Rational) -> Result<Vec<NoisyBoxParams>, ProtocolError> {
    if !step.is_positive() || *step > ratio(1, 4) {
        return Err(ProtocolError::InvalidStep(format_rational(step)));
    }
    let mut points = Vec::new();
    let mut xi = zero();
    while xi <= one() {
        let mut gamma = zero();
        while &xi + &gamma <= one() {
            points.push(NoisyBoxParams::new(xi.clone(), gamma.clone()).expect("grid point in range"));
            gamma += step;
        }
        xi += step;
    }
    Ok(points)
}

fn sweep_point(params: &NoisyBoxParams, tol: f64) -> Result<Option<SweepRecord>, ProtocolError> {
    let bx = make_noisy_box(params);
    if !is_genuine(&bx) {
        return Ok(None);
    }
    let out = swap(&bx, &bx)?;
    let ch_out = ch_value(&out.success_box);
    let expected = params.xi() * params.xi() + params.gamma() * params.gamma() + half();
    if ch_out != expected {
        return Err(ProtocolError::SwapLawMismatch {
            xi: format_rational(params.xi()),
            gamma: format_rational(params.gamma()),
            got: format_rational(&ch_out),
            expected: format_rational(&expected),
        });
    }
    Ok(Some(SweepRecord {
        xi: params.xi().clone(),
        gamma: params.gamma().clone(),
        ch_in: ch_value(&bx),
        q: out.q,
        swappable: ch_out > one(),
        ch_out_success: ch_out,
        tlm: tlm_satisfied(&bx, tol),
    }))
}

/// Swaps two identical noisy boxes at every genuine grid point.
///
/// Fails with [`ProtocolError::SwapLawMismatch`] if any success box has a CH
/// value other than `xi² + gamma² + 1/2`.
pub fn sweep_noisy_family(step: &Rational, tol: f64) -> Result<Vec<SweepRecord>, ProtocolError> {
    noisy_grid(step)?
        .iter()
        .filter_map(|p| sweep_point(p, tol).transpose())
        .collect()
}

/// Same as [`sweep_noisy_family`] on `jobs` worker threads. Output order does
/// not depend on `jobs`.
pub fn sweep_noisy_family_parallel(
    step: &Rational,
    tol: f64,
    jobs: usize,
) -> Result<Vec<SweepRecord>, ProtocolError> {
    let grid = noisy_grid(step)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| ProtocolError::ThreadPool(e.to_string()))?;
    let records: Vec<Result<Option<SweepRecord>, ProtocolError>> =
        pool.install(|| grid.par_iter().map(|p| sweep_point(p, tol)).collect());
    records.into_iter().filter_map(Result::transpose).collect()
}

pub const SWEEP_CSV_HEADER: [&str; 7] = ["xi", "gamma", "ch_in", "q", "ch_out_success", "swappable", "tlm"];

pub fn write_sweep_csv<W: io::Write>(records: &[SweepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for r in records {
        w.write_record([
            format_rational(&r.xi),
            format_rational(&r.gamma),
            format_rational(&r.ch_in),
            format_rational(&r.q),
            format_rational(&r.ch_out_success),
            r.swappable.to_string(),
            r.tlm.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Swap of two different noisy boxes. No closed form is asserted for these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedSweepRecord {
    pub left: NoisyBoxParams,
    pub right: NoisyBoxParams,
    pub q: Rational,
    pub ch_out_success: Rational,
    pub swappable: bool,
}

/// All ordered pairs of genuine grid boxes, ordered by `(left, right)`.
pub fn sweep_mixed_pairs(step: &Rational) -> Result<Vec<MixedSweepRecord>, ProtocolError> {
    let boxes: Vec<(NoisyBoxParams, BipartiteBox)> = noisy_grid(step)?
        .into_iter()
        .map(|p| {
            let bx = make_noisy_box(&p);
            (p, bx)
        })
        .filter(|(_, bx)| is_genuine(bx))
        .collect();
    let t = CouplerTensor::canonical();
    let pairs: Vec<(usize, usize)> =
        (0..boxes.len()).flat_map(|i| (0..boxes.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let out = swap_with(t, &boxes[i].1, &boxes[j].1, false)?;
            let ch = ch_value(&out.success_box);
            Ok(MixedSweepRecord {
                left: boxes[i].0.clone(),
                right: boxes[j].0.clone(),
                q: out.q,
                swappable: ch > one(),
                ch_out_success: ch,
            })
        })
        .collect()
}

pub const MIXED_CSV_HEADER: [&str; 7] = ["xi1", "gamma1", "xi2", "gamma2", "q", "ch_out_success", "swappable"];

pub fn write_mixed_csv<W: io::Write>(records: &[MixedSweepRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MIXED_CSV_HEADER)?;
    for r in records {
        w.write_record([
            format_rational(r.left.xi()),
            format_rational(r.left.gamma()),
            format_rational(r.right.xi()),
            format_rational(r.right.gamma()),
            format_rational(&r.q),
            format_rational(&r.ch_out_success),
            r.swappable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeleportResult {
    /// Probability that the coupler answers `b' = 0`.
    pub q: Rational,
    pub alice_box: SingleBox,
}

/// Teleports Bob's single-party box to Alice through `channel`, conditioned on `b' = 0`.
pub fn teleport(
    t: &CouplerTensor,
    bob_box: &SingleBox,
    channel: &BipartiteBox,
) -> Result<TeleportResult, ProtocolError> {
    if let Some(v) = validate(channel).first_violation() {
        return Err(ProtocolError::InvalidInput(format!("channel: {v}")));
    }
    if let Some(v) = bob_box.violation() {
        return Err(ProtocolError::InvalidInput(format!("single box: {v}")));
    }
    let unnormalized = SingleBox::from_fn(|x, a| {
        let mut s = zero();
        for y1 in 0..2 {
            for y2 in 0..2 {
                for b1 in 0..2 {
                    for b2 in 0..2 {
                        s += t.get(0, y1, y2, b1, b2) * channel.get(x, y1, a, b1) * bob_box.get(y2, b2);
                    }
                }
            }
        }
        s
    });
    let q_of = |x: usize| unnormalized.get(x, 0) + unnormalized.get(x, 1);
    let q = q_of(0);
    if q_of(1) != q {
        return Err(CouplerError::SignallingToBob {
            at_00: format_rational(&q),
            other: format_rational(&q_of(1)),
            x: 1,
            z: 0,
        }
        .into());
    }
    if q.is_zero() {
        return Err(CouplerError::DegenerateBranch { branch: 0 }.into());
    }
    let alice_box = SingleBox::from_fn(|x, a| unnormalized.get(x, a) / &q);
    Ok(TeleportResult { q, alice_box })
}

/// One flagged value from [`demonstrate_inconsistencies`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InconsistencyItem {
    pub description: &'static str,
    pub value: Rational,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InconsistencyReport {
    /// A coupler whose `P(b'=0)` equals the CH value itself, applied to PR.
    pub unit_scale_coupler_on_pr: InconsistencyItem,
    /// The canonical coupler applied to both ends of the anti-PR box.
    pub coupler_on_anti_pr: InconsistencyItem,
}

pub fn demonstrate_inconsistencies() -> InconsistencyReport {
    let t = CouplerTensor::canonical();
    let unit = t.scale(&ratio(3, 2));
    let on_pr = single_output(&unit, &make_pr_box())[0].clone();
    let on_anti = single_output(t, &crate::boxes::make_anti_pr_box())[0].clone();
    InconsistencyReport {
        unit_scale_coupler_on_pr: InconsistencyItem {
            description: "coupler with P(b'=0) = CH, applied to the PR box",
            valid: is_probability(&on_pr),
            value: on_pr,
        },
        coupler_on_anti_pr: InconsistencyItem {
            description: "canonical coupler applied to the anti-PR box",
            valid: is_probability(&on_anti),
            value: on_anti,
        },
    }
}

/// Outcome of comparing the two decompositions of the CH = 1 facet centre.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetCentreCheck {
    /// Whether the weighted facet vertices equal `(PR + identity) / 2` entrywise.
    pub decompositions_equal: bool,
    /// `P(b'=0 | PR)` implied by equating the coupler on both decompositions,
    /// using only its values on deterministic boxes.
    pub derived_pr_probability: Rational,
}

/// The 8 deterministic vertices on the CH = 1 facet, `L_{αβγ(αγ⊕β)}`.
pub fn upper_facet_vertices() -> Vec<VertexId> {
    let mut out = Vec::with_capacity(8);
    for alpha in BITS {
        for beta in BITS {
            for gamma in BITS {
                out.push(VertexId::local(alpha, beta, gamma, (alpha & gamma) ^ beta));
            }
        }
    }
    out
}

/// Checks the facet-centre identity for the given weights on [`upper_facet_vertices`].
pub fn check_facet_centre(weights: &[Rational; 8]) -> FacetCentreCheck {
    let t = CouplerTensor::canonical();
    let facet = upper_facet_vertices();
    let mut lhs = BipartiteBox::from_fn(|_, _, _, _| zero());
    for (v, w) in facet.iter().zip(weights) {
        lhs = lhs.plus(&v.to_box().scale(w));
    }
    let centre = mix(&[(half(), make_pr_box()), (half(), make_identity_box())]).expect("convex");

    // identity = (1/16) sum of all 16 deterministic boxes
    let on_identity: Rational = VertexId::locals()
        .into_iter()
        .map(|v| single_output(t, &v.to_box())[0].clone() * ratio(1, 16))
        .sum();
    let on_facet: Rational = facet
        .iter()
        .zip(weights)
        .map(|(v, w)| w * &single_output(t, &v.to_box())[0])
        .sum();
    // sum_i w_i P(L_i) = (P(PR) + P(identity)) / 2
    let derived = on_facet * ratio(2, 1) - on_identity;
    FacetCentreCheck { decompositions_equal: lhs == centre, derived_pr_probability: derived }
}

/// Equal weights 1/8: both decompositions agree and `P(b'=0 | PR) = 1` follows.
pub fn verify_d1_identity() -> bool {
    let check = check_facet_centre(&std::array::from_fn(|_| ratio(1, 8)));
    let direct = single_output(CouplerTensor::canonical(), &make_pr_box())[0].clone();
    check.decompositions_equal && check.derived_pr_probability == one() && direct == one()
}
