//! Seeded random rational boxes for property checks.

use crate::boxes::{mix, BipartiteBox, SingleBox, VertexId};
use crate::rational::{ratio, Rational};
use rand::Rng;

/// Random convex weights with denominators bounded by `max_weight * len`.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, len: usize, max_weight: i64) -> Vec<Rational> {
    loop {
        let raw: Vec<i64> = (0..len).map(|_| rng.gen_range(0..=max_weight)).collect();
        let total: i64 = raw.iter().sum();
        if total > 0 {
            return raw.into_iter().map(|w| ratio(w, total)).collect();
        }
    }
}

/// A random convex mixture of boxes drawn from `pool`.
pub fn random_mixture<R: Rng + ?Sized>(rng: &mut R, pool: &[BipartiteBox], max_weight: i64) -> BipartiteBox {
    let weights = random_weights(rng, pool.len(), max_weight);
    let terms: Vec<(Rational, BipartiteBox)> = weights.into_iter().zip(pool.iter().cloned()).collect();
    mix(&terms).expect("weights are convex by construction")
}

/// A random point of the genuine polytope.
pub fn random_genuine_box<R: Rng + ?Sized>(rng: &mut R) -> BipartiteBox {
    let pool: Vec<BipartiteBox> = VertexId::genuine().into_iter().map(VertexId::to_box).collect();
    random_mixture(rng, &pool, 12)
}

/// A random single-party box together with its weights over the four deterministic boxes
/// `L00, L01, L10, L11`.
pub fn random_single_box<R: Rng + ?Sized>(rng: &mut R) -> ([Rational; 4], SingleBox) {
    let w = random_weights(rng, 4, 12);
    let terms: Vec<(Rational, SingleBox)> = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .iter()
        .zip(&w)
        .map(|(&(alpha, beta), w)| (w.clone(), SingleBox::local(alpha, beta)))
        .collect();
    let sb = SingleBox::mix(&terms).expect("weights are convex by construction");
    let weights = [w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone()];
    (weights, sb)
}
