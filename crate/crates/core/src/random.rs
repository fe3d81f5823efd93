//! Random instances on a grid of half-integers, for property tests and
//! benchmarks. All masses are ratios of small integers, so the same draw is
//! exact in rational mode.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::measures::DiscreteMeasure;
use crate::scalar::Scalar;

/// Probability measure with `n` distinct atoms in `{-6, -5.5, ..., 6}` and
/// integer weights 1..=9, normalised.
pub fn random_measure<T: Scalar>(n: usize, rng: &mut impl Rng) -> DiscreteMeasure<T> {
    let mut slots: Vec<i64> = (-12..=12).collect();
    slots.shuffle(rng);
    let weights: Vec<i64> = (0..n).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = weights.iter().sum();
    DiscreteMeasure::new(
        slots
            .into_iter()
            .take(n.min(25))
            .zip(weights)
            .map(|(k, w)| (T::from_ratio(k, 2), T::from_ratio(w, total))),
    )
    .expect("positive weights")
}

/// Pushes each atom of `mu` through a two-point martingale kernel with
/// half-integer jumps; atoms stay put with probability `stay`.
pub fn martingale_spread<T: Scalar>(mu: &DiscreteMeasure<T>, stay: f64, rng: &mut impl Rng) -> DiscreteMeasure<T> {
    let mut pairs = Vec::with_capacity(2 * mu.len());
    for a in mu.atoms() {
        if rng.random_bool(stay) {
            pairs.push((a.x.clone(), a.w.clone()));
            continue;
        }
        let down: i64 = rng.random_range(1..=6);
        let up: i64 = rng.random_range(1..=6);
        let lo = a.x.clone() - T::from_ratio(down, 2);
        let hi = a.x.clone() + T::from_ratio(up, 2);
        pairs.push((lo, a.w.clone() * T::from_ratio(up, up + down)));
        pairs.push((hi, a.w.clone() * T::from_ratio(down, up + down)));
    }
    DiscreteMeasure::new(pairs).expect("positive weights")
}

/// `(μ, ν)` with `μ ≤_c ν`, `|supp μ| = n` and `|supp ν| ≤ max_m`.
pub fn random_convex_pair<T: Scalar>(
    n: usize,
    max_m: usize,
    rng: &mut impl Rng,
) -> (DiscreteMeasure<T>, DiscreteMeasure<T>) {
    let mu = random_measure(n, rng);
    loop {
        let nu = martingale_spread(&mu, 0.2, rng);
        if nu.len() <= max_m.max(n) {
            return (mu, nu);
        }
    }
}

/// `(γ, ν)` with `γ ≤_E ν`: a random part of the source of a convex pair.
pub fn random_extended_pair<T: Scalar>(
    n: usize,
    max_m: usize,
    rng: &mut impl Rng,
) -> (DiscreteMeasure<T>, DiscreteMeasure<T>) {
    let (mu, nu): (DiscreteMeasure<T>, DiscreteMeasure<T>) = random_convex_pair(n, max_m, rng);
    let mut parts: Vec<(T, T)> = mu
        .atoms()
        .iter()
        .map(|a| (a.x.clone(), a.w.clone() * T::from_ratio(rng.random_range(0..=4i64), 4)))
        .collect();
    if parts.iter().all(|(_, w)| w.is_zero()) {
        let a = &mu.atoms()[0];
        parts[0] = (a.x.clone(), a.w.clone());
    }
    (DiscreteMeasure::new(parts).expect("nonnegative weights"), nu)
}

/// Splits `mu` into two measures summing to it, cutting each atom at a
/// random quarter.
pub fn random_split<T: Scalar>(mu: &DiscreteMeasure<T>, rng: &mut impl Rng) -> (DiscreteMeasure<T>, DiscreteMeasure<T>) {
    let mut a = Vec::with_capacity(mu.len());
    let mut b = Vec::with_capacity(mu.len());
    for at in mu.atoms() {
        let part = at.w.clone() * T::from_ratio(rng.random_range(0..=4i64), 4);
        b.push((at.x.clone(), at.w.clone() - &part));
        a.push((at.x.clone(), part));
    }
    (
        DiscreteMeasure::new(a).expect("nonnegative weights"),
        DiscreteMeasure::new(b).expect("nonnegative weights"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{convex_order, extended_order};
    use crate::scalar::Rational;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generators_respect_their_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let (mu, nu) = random_convex_pair::<Rational>(n, 12, &mut rng);
            assert_eq!(mu.len(), n);
            assert!(nu.len() <= 12);
            assert!(convex_order(&mu, &nu));
            let (g, nu) = random_extended_pair::<Rational>(n, 12, &mut rng);
            assert!(!g.is_empty());
            assert!(extended_order(&g, &nu));
            let (a, b) = random_split(&mu, &mut rng);
            assert_eq!(a.add(&b), mu);
        }
    }
}
