mod common;

use common::rng;
use mot_core::costs::CostSpec;
use mot_core::lp::{embedding_feasible, martingale_feasible, solve_classical};
use mot_core::measures::{convex_order, extended_order, wasserstein1, Wasserstein};
use mot_core::random::{martingale_spread, random_convex_pair, random_extended_pair, random_measure};
use mot_core::{DiscreteMeasure, Rational, Scalar};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A pair that is in extended order, close to it, or unrelated.
fn mixed_pair(r: &mut ChaCha8Rng) -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
    let n = r.random_range(1..=5);
    match r.random_range(0..3) {
        0 => random_extended_pair(n, 10, r),
        1 => {
            let (mu, nu) = random_extended_pair::<Rational>(n, 10, r);
            let k = r.random_range(0..nu.len());
            let shift = Rational::from_ratio(if r.random_bool(0.5) { 1 } else { -1 }, 2);
            let nudged = DiscreteMeasure::new(nu.atoms().iter().enumerate().map(|(i, a)| {
                (if i == k { a.x.clone() + &shift } else { a.x.clone() }, a.w.clone())
            }))
            .unwrap();
            (mu, nudged)
        }
        _ => {
            let mu = random_measure::<Rational>(n, r).scale(&Rational::from_ratio(r.random_range(1..=4), 4));
            let nu = martingale_spread(&random_measure::<Rational>(r.random_range(1..=5), r), 0.3, r);
            (mu, nu)
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hinge_test_matches_embedding_lp(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (mu, nu) = mixed_pair(&mut r);
        prop_assert_eq!(extended_order(&mu, &nu), embedding_feasible(&mu, &nu).unwrap());
    }

    #[test]
    fn convex_order_matches_martingale_lp(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (mu, nu) = if r.random_bool(0.5) {
            random_convex_pair::<Rational>(r.random_range(1..=5), 10, &mut r)
        } else {
            let (mu, nu) = mixed_pair(&mut r);
            (mu.scale(&(nu.total_mass().clone() / mu.total_mass())), nu)
        };
        prop_assert_eq!(convex_order(&mu, &nu), martingale_feasible(&mu, &nu).unwrap());
    }

    #[test]
    fn wasserstein_matches_transport_lp(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let mut r = rng(seed);
        let mu = random_measure::<Rational>(n, &mut r);
        let nu = random_measure::<Rational>(m, &mut r);
        let lp = solve_classical(&mu, &nu, &CostSpec::AbsDiff).unwrap();
        prop_assert_eq!(wasserstein1(&mu, &nu), Wasserstein::Finite(lp.value));
    }

    #[test]
    fn potential_is_the_mean_distance(seed in any::<u64>(), n in 1usize..=8) {
        let mut r = rng(seed);
        let mu = random_measure::<Rational>(n, &mut r);
        let u = mu.potential();
        for k in -16..=16 {
            let x = Rational::from_ratio(k, 2) + Rational::from_ratio(1, 7);
            let direct = mu.atoms().iter().fold(Rational::zero(), |acc, a| acc + a.w.clone() * (a.x.clone() - &x).abs());
            prop_assert_eq!(u.eval(&x), direct);
        }
    }
}

#[test]
fn unequal_masses_have_infinite_distance() {
    let a = DiscreteMeasure::dirac(0.0, 1.0);
    let b = DiscreteMeasure::dirac(0.0, 2.0);
    assert_eq!(wasserstein1(&a, &b), Wasserstein::Infinite);
}
