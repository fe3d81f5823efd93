mod common;

use common::{max_entry_gap, random_cost, rng};
use mot_core::costs::{CostSpec, SeparableTables};
use mot_core::curtain::{check_convex_minimality, is_left_monotone, left_curtain, right_curtain, Coupling};
use mot_core::lp::{
    hoeffding_frechet, martingale_vertices, solve_classical, solve_martingale, solve_martingale_matrix,
    uniqueness_probe,
};
use mot_core::random::{random_convex_pair, random_measure};
use mot_core::{Rational, Scalar, Tolerances};
use proptest::prelude::*;
use rand::Rng;

fn plan_cost(c: &[Vec<f64>], pi: &Coupling<f64>) -> f64 {
    let xs = pi.source().positions();
    let ys = pi.target().positions();
    pi.entries()
        .iter()
        .map(|(x, y, w)| {
            let i = xs.iter().position(|v| v == x).unwrap();
            let j = ys.iter().position(|v| v == y).unwrap();
            c[i][j] * w
        })
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exp_optimum_is_the_unique_left_curtain(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let (mu, nu) = random_convex_pair::<f64>(n, 12, &mut r);
        let lc = left_curtain(&mu, &nu).unwrap();
        let sol = solve_martingale(&mu, &nu, &CostSpec::ExpDiff).unwrap();
        let c = CostSpec::ExpDiff.matrix(&mu, &nu).unwrap();
        prop_assert!((plan_cost(&c, &lc) - sol.value).abs() <= 1e-9 * sol.value.abs().max(1.0));
        prop_assert!(max_entry_gap(&lc.entries(), &sol.plan.entries()) <= 1e-9);
        let probe = uniqueness_probe(&mu, &nu, &c, &sol.dual, 3, seed, &Tolerances::default()).unwrap();
        prop_assert!(probe.unique, "spread {}", probe.spread);
    }

    #[test]
    fn separable_optimum_is_the_left_curtain(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let (mu, nu) = random_convex_pair::<Rational>(n, 12, &mut r);
        // φ positive decreasing; ψ(y) = a + b·y + y² strictly convex and positive on the atoms.
        let mut phi: Vec<Rational> = (0..mu.len()).map(|_| Rational::from_i64(r.random_range(1..=5))).collect();
        phi.sort_by(|a, b| b.cmp(a));
        let b = Rational::from_i64(r.random_range(-3..=3));
        let psi: Vec<Rational> = nu
            .positions()
            .iter()
            .map(|y| Rational::from_i64(40) + b.clone() * y + y.clone() * y)
            .collect();
        let cost = CostSpec::Separable(SeparableTables::new(phi, psi));
        let lc = left_curtain(&mu, &nu).unwrap();
        let sol = solve_martingale(&mu, &nu, &cost).unwrap();
        prop_assert_eq!(cost.plan_cost(&lc).unwrap(), sol.value);
    }

    #[test]
    fn curtains_are_monotone(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let (mu, nu) = random_convex_pair::<Rational>(n, 12, &mut r);
        let lc = left_curtain(&mu, &nu).unwrap();
        prop_assert!(is_left_monotone(&lc, &Rational::zero()).is_none());
        lc.validate(&Tolerances::default()).unwrap();
        let rc = right_curtain(&mu, &nu).unwrap();
        prop_assert_eq!(rc.reflect(), left_curtain(&mu.reflect(), &nu.reflect()).unwrap());
    }

    #[test]
    fn curtain_prefixes_are_convex_minimal(seed in any::<u64>(), n in 1usize..=6) {
        let mut r = rng(seed);
        let (mu, nu) = random_convex_pair::<Rational>(n, 12, &mut r);
        for _ in 0..3 {
            let c = random_cost(&mu, &nu, &mut r);
            let rival = solve_martingale_matrix(&mu, &nu, &c, &Tolerances::default()).unwrap().plan;
            prop_assert!(check_convex_minimality(&mu, &nu, &rival).unwrap());
        }
    }

    #[test]
    fn pythagorean_and_shift(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let (mu, nu) = random_convex_pair::<Rational>(n, 10, &mut r);
        let m2 = nu.second_moment() - mu.second_moment();
        let c = random_cost(&mu, &nu, &mut r);
        let base = solve_martingale_matrix(&mu, &nu, &c, &Tolerances::default()).unwrap();
        prop_assert_eq!(CostSpec::PowerDiff(2).plan_cost(&base.plan).unwrap(), m2.clone());
        // c + p(y - x)² + q(y - x) shifts the value by p·(m₂(ν) - m₂(μ)).
        let (p, q) = (Rational::from_ratio(r.random_range(-5..=5), 2), Rational::from_ratio(r.random_range(-5..=5), 3));
        let xs = mu.positions();
        let ys = nu.positions();
        let shifted: Vec<Vec<Rational>> = c
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let d = ys[j].clone() - &xs[i];
                        v.clone() + p.clone() * &d * &d + q.clone() * &d
                    })
                    .collect()
            })
            .collect();
        let moved = solve_martingale_matrix(&mu, &nu, &shifted, &Tolerances::default()).unwrap();
        prop_assert_eq!(moved.value, base.value + p * m2);
    }

    #[test]
    fn quantile_coupling_solves_quadratic_transport(seed in any::<u64>(), n in 1usize..=8, m in 1usize..=8) {
        let mut r = rng(seed);
        let mu = random_measure::<f64>(n, &mut r);
        let nu = random_measure::<f64>(m, &mut r);
        let hf = hoeffding_frechet(&mu, &nu).unwrap();
        let cost = CostSpec::PowerDiff(2);
        let lp = solve_classical(&mu, &nu, &cost).unwrap();
        prop_assert!((cost.plan_cost(&hf).unwrap() - lp.value).abs() <= 1e-9);
        // Co-monotone support: no crossing pairs.
        let e = hf.entries();
        for a in &e {
            for b in &e {
                prop_assert!(!(a.0 < b.0 && a.1 > b.1));
            }
        }
    }
}

#[test]
fn only_the_curtain_vertex_is_left_monotone() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 25 {
        let n = r.random_range(1..=4);
        let (mu, nu) = random_convex_pair::<Rational>(n, 4, &mut r);
        let vertices = martingale_vertices(&mu, &nu).unwrap();
        let lc = left_curtain(&mu, &nu).unwrap();
        let monotone: Vec<&Coupling<Rational>> =
            vertices.iter().filter(|v| is_left_monotone(v, &Rational::zero()).is_none()).collect();
        assert_eq!(monotone.len(), 1, "μ = {mu:?}, ν = {nu:?}");
        assert_eq!(*monotone[0], lc);
        checked += 1;
    }
}
