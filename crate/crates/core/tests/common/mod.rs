#![allow(dead_code)]

use mot_core::lp::random_matrix;
use mot_core::{DiscreteMeasure, Scalar};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_cost<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, rng: &mut ChaCha8Rng) -> Vec<Vec<T>> {
    random_matrix(mu.len(), nu.len(), rng)
}

/// Largest entrywise difference of two matrices given as `(x, y, w)` lists
/// over the same grid.
pub fn max_entry_gap(a: &[(f64, f64, f64)], b: &[(f64, f64, f64)]) -> f64 {
    let mut gap = 0.0f64;
    let lookup = |list: &[(f64, f64, f64)], x: f64, y: f64| {
        list.iter().find(|e| e.0 == x && e.1 == y).map_or(0.0, |e| e.2)
    };
    for &(x, y, _) in a.iter().chain(b) {
        gap = gap.max((lookup(a, x, y) - lookup(b, x, y)).abs());
    }
    gap
}
