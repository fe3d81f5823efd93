//! Acceptance run: one line per criterion, non-zero exit if any fails.
//! Seeds and tolerances are fixed here so every run checks the same instances.

use std::sync::OnceLock;
use std::time::Instant;

use mot_cli::config::Config;
use mot_cli::experiments::{coarse_target_instance, run_abs_structure, run_hn_structure, run_quartic_flat, run_three_point};
use mot_cli::report::{Report, Status};
use mot_core::costs::{CostSpec, SeparableTables};
use mot_core::curtain::{check_convex_minimality, is_left_monotone, left_curtain, right_curtain, Coupling};
use mot_core::lp::{
    embedding_feasible, embedding_vertex, hoeffding_frechet, martingale_vertices, random_matrix, solve_classical,
    solve_martingale, solve_martingale_matrix, uniqueness_probe,
};
use mot_core::measures::{convex_order, extended_order};
use mot_core::random::{martingale_spread, random_convex_pair, random_extended_pair, random_measure, random_split};
use mot_core::shadow::{shadow, shadow_in_order};
use mot_core::variation::{three_point_variation, verify_variational, VariationalOptions};
use mot_core::{DiscreteMeasure, Rational, Result, Scalar, Tolerances};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict { passed, detail: detail.into() })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn dominated<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>) -> bool {
    a.atoms().iter().all(|at| at.w <= b.mass_at(&at.x))
}

fn failed_assertions(report: &Report) -> String {
    let bad: Vec<&str> = report
        .assertions
        .iter()
        .filter(|a| a.status != Status::Pass)
        .map(|a| a.id.as_str())
        .collect();
    if bad.is_empty() {
        "all assertions pass".into()
    } else {
        format!("failing: {}", bad.join(", "))
    }
}

fn value_str(report: &Report, key: &str) -> String {
    report.values.get(key).map_or("?".into(), |v| v.as_str().map_or(v.to_string(), str::to_string))
}

/// Entry of `entries` at `(x, y)`, zero when absent.
fn entry(entries: &[(f64, f64, f64)], x: f64, y: f64) -> f64 {
    entries.iter().find(|e| e.0 == x && e.1 == y).map_or(0.0, |e| e.2)
}

fn max_entry_gap(a: &Coupling<f64>, b: &Coupling<f64>) -> f64 {
    let (ea, eb) = (a.entries(), b.entries());
    ea.iter()
        .chain(&eb)
        .map(|&(x, y, _)| (entry(&ea, x, y) - entry(&eb, x, y)).abs())
        .fold(0.0, f64::max)
}

fn three_point_report() -> &'static Result<(Report, f64)> {
    static CELL: OnceLock<Result<(Report, f64)>> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let report = run_three_point(&Config::default())?;
        Ok((report, t.elapsed().as_secs_f64()))
    })
}

fn quartic_flatness() -> Result<Verdict> {
    let t = Instant::now();
    let report = run_quartic_flat(&Config::default())?;
    let secs = t.elapsed().as_secs_f64();
    let (min, max, oracle) = (value_str(&report, "lp_min"), value_str(&report, "lp_max"), value_str(&report, "oracle_value"));
    let printed = value_str(&report, "printed_value");
    let ok = report.passed() && min == "23/3" && max == "23/3" && oracle == "23/3" && printed == "143/3" && secs < 1.0;
    verdict(
        ok,
        format!("min {min}, max {max}, oracle {oracle}, printed {printed}; {}; {secs:.3} s < 1 s", failed_assertions(&report)),
    )
}

fn exp_optimum_is_curtain() -> Result<Verdict> {
    let t = Instant::now();
    let mut r = rng(101);
    let (mut worst_value, mut worst_entry, mut not_unique) = (0.0f64, 0.0f64, 0);
    let instances = 100;
    for k in 0..instances {
        let (mu, nu) = random_convex_pair::<f64>(r.random_range(1..=6), 12, &mut r);
        let lc = left_curtain(&mu, &nu)?;
        let sol = solve_martingale(&mu, &nu, &CostSpec::ExpDiff)?;
        let c = CostSpec::ExpDiff.matrix(&mu, &nu)?;
        let lc_cost = lc.total_cost_indexed(|i, j| c[i][j])?;
        worst_value = worst_value.max((lc_cost - sol.value).abs() / sol.value.abs().max(1.0));
        worst_entry = worst_entry.max(max_entry_gap(&lc, &sol.plan));
        if !uniqueness_probe(&mu, &nu, &c, &sol.dual, 3, k, &Tolerances::default())?.unique {
            not_unique += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    verdict(
        worst_value <= TOL && worst_entry <= TOL && not_unique == 0 && secs < 60.0,
        format!(
            "{instances} instances: relative cost gap {worst_value:.1e} ≤ 1e-9, entry gap {worst_entry:.1e} ≤ 1e-9, \
             {not_unique} non-unique; {secs:.1} s < 60 s"
        ),
    )
}

fn separable_optimum_is_curtain() -> Result<Verdict> {
    let mut r = rng(102);
    let instances = 100;
    let mut mismatches = 0;
    for _ in 0..instances {
        let (mu, nu) = random_convex_pair::<Rational>(r.random_range(1..=6), 12, &mut r);
        let mut phi: Vec<Rational> = (0..mu.len()).map(|_| Rational::from_i64(r.random_range(1..=5))).collect();
        phi.sort_by(|a, b| b.cmp(a));
        let b = Rational::from_i64(r.random_range(-3..=3));
        let psi = nu.positions().iter().map(|y| Rational::from_i64(40) + b.clone() * y + y.clone() * y).collect();
        let cost = CostSpec::Separable(SeparableTables::new(phi, psi));
        let lc = left_curtain(&mu, &nu)?;
        if cost.plan_cost(&lc)? != solve_martingale(&mu, &nu, &cost)?.value {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("{instances} exact instances, {mismatches} with curtain cost ≠ LP value"))
}

fn shadow_laws() -> Result<Verdict> {
    let mut r = rng(103);
    let instances = 200;
    let (mut assoc, mut order, mut minimal, mut etas) = (0, 0, 0, 0);
    for _ in 0..instances {
        let (mu, nu) = random_extended_pair::<Rational>(r.random_range(1..=6), 12, &mut r);
        let s = shadow(&mu, &nu)?;
        let (g1, g2) = random_split(&mu, &mut r);
        let first = shadow(&g1, &nu)?;
        if s.shadow != first.shadow.add(&shadow(&g2, &first.remainder)?.shadow) {
            assoc += 1;
        }
        let mut perm: Vec<usize> = (0..mu.len()).collect();
        perm.shuffle(&mut r);
        if s.shadow != shadow_in_order(&mu, &nu, &perm, &Tolerances::default())?.shadow {
            order += 1;
        }
        for _ in 0..10 {
            let c = random_matrix(mu.len(), nu.len(), &mut r);
            let eta = embedding_vertex(&mu, &nu, &c)?;
            etas += 1;
            if !(convex_order(&mu, &eta) && dominated(&eta, &nu) && convex_order(&s.shadow, &eta)) {
                minimal += 1;
            }
        }
    }
    verdict(
        assoc + order + minimal == 0,
        format!(
            "{instances} exact instances: {assoc} associativity and {order} order failures; \
             {minimal} of {etas} LP embeddings not above the shadow"
        ),
    )
}

fn curtains_are_left_monotone() -> Result<Verdict> {
    let mut r = rng(104);
    let instances = 200;
    let mut witnesses = 0;
    for _ in 0..instances {
        let (mu, nu) = random_convex_pair::<Rational>(r.random_range(1..=6), 12, &mut r);
        let lc = left_curtain(&mu, &nu)?;
        lc.validate(&Tolerances::default())?;
        if is_left_monotone(&lc, &Rational::zero()).is_some() {
            witnesses += 1;
        }
    }
    let small = 50;
    let (mut vertices, mut wrong) = (0, 0);
    for _ in 0..small {
        let (mu, nu) = random_convex_pair::<Rational>(r.random_range(1..=4), 4, &mut r);
        let all = martingale_vertices(&mu, &nu)?;
        vertices += all.len();
        let lc = left_curtain(&mu, &nu)?;
        let monotone: Vec<&Coupling<Rational>> =
            all.iter().filter(|v| is_left_monotone(v, &Rational::zero()).is_none()).collect();
        if monotone.len() != 1 || *monotone[0] != lc {
            wrong += 1;
        }
    }
    verdict(
        witnesses == 0 && wrong == 0,
        format!(
            "{instances} curtains, {witnesses} with a witness; {small} instances with n, m ≤ 4 ({vertices} vertices), \
             {wrong} where the curtain is not the only left-monotone vertex"
        ),
    )
}

fn convex_minimality() -> Result<Verdict> {
    let mut r = rng(105);
    let instances = 50;
    let mut failures = 0;
    for _ in 0..instances {
        let (mu, nu) = random_convex_pair::<Rational>(r.random_range(1..=6), 12, &mut r);
        for _ in 0..10 {
            let c = random_matrix(mu.len(), nu.len(), &mut r);
            let rival = solve_martingale_matrix(&mu, &nu, &c, &Tolerances::default())?.plan;
            if !check_convex_minimality(&mu, &nu, &rival)? {
                failures += 1;
            }
        }
    }
    verdict(failures == 0, format!("{instances} exact instances × 10 LP rivals, {failures} failures"))
}

fn variational_optimality() -> Result<Verdict> {
    let mut r = rng(106);
    let instances = 50;
    let (mut failed, mut worst) = (0, f64::INFINITY);
    for k in 0..instances {
        let (mu, nu) = random_convex_pair::<f64>(r.random_range(1..=6), 12, &mut r);
        let sol = solve_martingale(&mu, &nu, &CostSpec::ExpDiff)?;
        let opts = VariationalOptions { max_points: 4, trials: 200, seed: k, tol: TOL, ..Default::default() };
        let rep = verify_variational(&sol.plan, &CostSpec::ExpDiff, &opts)?;
        worst = worst.min(rep.worst_margin);
        if !rep.passed() {
            failed += 1;
        }
    }
    // A plan that is not optimal must be caught through its witness.
    let (mut perturbed, mut caught) = (0, 0);
    while perturbed < 10 {
        let (mu, nu) = random_convex_pair::<f64>(r.random_range(2..=5), 10, &mut r);
        let pi = right_curtain(&mu, &nu)?;
        let Some(w) = is_left_monotone(&pi, &1e-12) else { continue };
        let (alpha, _) = three_point_variation(&w.x, &w.y_minus, &w.y_plus, &w.x_prime, &w.y_prime)?;
        let opts = VariationalOptions { trials: 0, tol: TOL, witnesses: vec![alpha], ..Default::default() };
        if !verify_variational(&pi, &CostSpec::ExpDiff, &opts)?.passed() {
            caught += 1;
        }
        perturbed += 1;
    }
    verdict(
        failed == 0 && caught == perturbed,
        format!(
            "{instances} exp optima × 200 trials (≤ 4 points, tol 1e-9): {failed} flagged, worst margin {worst:.1e}; \
             {caught}/{perturbed} non-optimal plans caught"
        ),
    )
}

fn pythagorean_and_shift() -> Result<Verdict> {
    let mut r = rng(107);
    let instances = 100;
    let (mut pyth, mut shift) = (0.0f64, 0.0f64);
    for _ in 0..instances {
        let (mu, nu) = random_convex_pair::<f64>(r.random_range(1..=5), 10, &mut r);
        let m2 = nu.second_moment() - mu.second_moment();
        let c: Vec<Vec<f64>> = random_matrix(mu.len(), nu.len(), &mut r);
        let base = solve_martingale_matrix(&mu, &nu, &c, &Tolerances::default())?;
        pyth = pyth.max((CostSpec::PowerDiff(2).plan_cost(&base.plan)? - m2).abs());
        let (p, q) = (r.random_range(-5..=5) as f64 / 2.0, r.random_range(-5..=5) as f64 / 3.0);
        let xs = mu.positions();
        let ys = nu.positions();
        let moved: Vec<Vec<f64>> = c
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().enumerate().map(|(j, v)| v + p * (ys[j] - xs[i]).powi(2) + q * (ys[j] - xs[i])).collect())
            .collect();
        let shifted = solve_martingale_matrix(&mu, &nu, &moved, &Tolerances::default())?;
        shift = shift.max((shifted.value - base.value - p * m2).abs());
    }
    let q = |v: i64| Rational::from_i64(v);
    let mu = DiscreteMeasure::uniform(&[q(-1), q(1)], Rational::from_ratio(1, 2))?;
    let nu = DiscreteMeasure::uniform(&[q(-2), q(0), q(2)], Rational::from_ratio(1, 3))?;
    let quartic = CostSpec::PowerDiff(2).plan_cost(&left_curtain(&mu, &nu)?)?;
    let five_thirds = quartic == Rational::from_ratio(5, 3);
    verdict(
        pyth <= TOL && shift <= TOL && five_thirds,
        format!(
            "{instances} LP vertices: Pythagorean error {pyth:.1e} ≤ 1e-9, shift error {shift:.1e} ≤ 1e-9; \
             quartic instance ∫(y-x)² = {}",
            mot_core::scalar::format_rational(&quartic)
        ),
    )
}

fn quantile_coupling() -> Result<Verdict> {
    let mut r = rng(108);
    let instances = 100;
    let (mut worst, mut crossings) = (0.0f64, 0);
    for _ in 0..instances {
        let mu = random_measure::<f64>(r.random_range(1..=8), &mut r);
        let nu = random_measure::<f64>(r.random_range(1..=8), &mut r);
        let hf = hoeffding_frechet(&mu, &nu)?;
        let cost = CostSpec::PowerDiff(2);
        worst = worst.max((cost.plan_cost(&hf)? - solve_classical(&mu, &nu, &cost)?.value).abs());
        let e = hf.entries();
        if e.iter().any(|a| e.iter().any(|b| a.0 < b.0 && a.1 > b.1)) {
            crossings += 1;
        }
    }
    verdict(
        worst <= TOL && crossings == 0,
        format!("{instances} pairs: |HF - LP| ≤ {worst:.1e} (tol 1e-9), {crossings} with crossing support"),
    )
}

fn quartic_support_sizes() -> Result<Verdict> {
    let g = Config::default().gauss_curtain;
    let (mu, nu) = coarse_target_instance(200, g.nu_atoms, g.mean, g.sd_mu, g.sd_nu)?;
    let tols = Tolerances::default();
    let sol = solve_martingale(&mu, &nu, &CostSpec::PowerDiff(4))?;
    let fraction = sol.plan.support_profile(&tols.support).mass_fraction_at_most(3);
    let sharp = match three_point_report() {
        Ok((report, _)) => report.assertion("three-atom-rows").is_some_and(|a| a.status == Status::Pass),
        Err(_) => false,
    };
    verdict(
        fraction >= 0.95 && sharp,
        format!(
            "n = 200, |supp ν| = {}: {fraction:.3} of μ-mass in rows with ≤ 3 atoms (≥ 0.95, atom threshold {:.0e}); \
             three-point instance has exactly-3-atom rows: {sharp}",
            nu.len(),
            tols.support
        ),
    )
}

fn hn_structure() -> Result<Verdict> {
    let config = Config::default();
    let report = run_hn_structure(&config, jobs())?;
    let fractions: Vec<String> = config
        .hn_structure
        .sizes
        .iter()
        .map(|n| format!("n = {n}: {}", value_str(&report, &format!("two_atom_fraction_n{n}"))))
        .collect();
    verdict(report.passed(), format!("two-atom fractions {} (≥ 0.95); {}", fractions.join(", "), failed_assertions(&report)))
}

fn abs_structure() -> Result<Verdict> {
    let config = Config::default();
    let report = run_abs_structure(&config, jobs())?;
    let gaps: Vec<String> = config
        .abs_structure
        .sizes
        .iter()
        .map(|n| format!("n = {n}: {}", value_str(&report, &format!("gap_n{n}"))))
        .collect();
    verdict(
        report.passed(),
        format!("gaps {} (tol {:e}); {}", gaps.join(", "), config.abs_structure.gap_tol, failed_assertions(&report)),
    )
}

fn three_point_dual() -> Result<Verdict> {
    let cfg = Config::default().three_point;
    let (report, secs) = match three_point_report() {
        Ok(v) => v,
        Err(e) => return verdict(false, format!("error: {e}")),
    };
    verdict(
        report.passed() && *secs < 120.0,
        format!(
            "dual min {} (≥ -{:e}), plan {} vs LP {} (tol {:e}); {}; {secs:.1} s < 120 s",
            value_str(report, "dual_min"),
            cfg.dual_tol,
            value_str(report, "plan_cost"),
            value_str(report, "lp_value"),
            cfg.value_tol,
            failed_assertions(report)
        ),
    )
}

/// A pair in extended order, one atom away from it, or unrelated.
fn mixed_pair(r: &mut ChaCha8Rng) -> (DiscreteMeasure<Rational>, DiscreteMeasure<Rational>) {
    let n = r.random_range(1..=5);
    match r.random_range(0..3) {
        0 => random_extended_pair(n, 10, r),
        1 => {
            let (mu, nu) = random_extended_pair::<Rational>(n, 10, r);
            let k = r.random_range(0..nu.len());
            let shift = Rational::from_ratio(if r.random_bool(0.5) { 1 } else { -1 }, 2);
            let nudged = DiscreteMeasure::new(
                nu.atoms()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (if i == k { a.x.clone() + &shift } else { a.x.clone() }, a.w.clone())),
            )
            .expect("positive weights");
            (mu, nudged)
        }
        _ => {
            let mu = random_measure::<Rational>(n, r).scale(&Rational::from_ratio(r.random_range(1..=4), 4));
            let nu = martingale_spread(&random_measure::<Rational>(r.random_range(1..=5), r), 0.3, r);
            (mu, nu)
        }
    }
}

fn hinge_test() -> Result<Verdict> {
    let mut r = rng(114);
    let pairs = 1000;
    let (mut disagree, mut ordered) = (0, 0);
    for _ in 0..pairs {
        let (mu, nu) = mixed_pair(&mut r);
        let hinge = extended_order(&mu, &nu);
        ordered += usize::from(hinge);
        if hinge != embedding_feasible(&mu, &nu)? {
            disagree += 1;
        }
    }
    verdict(disagree == 0, format!("{pairs} exact pairs ({ordered} ordered), {disagree} disagreements with the embedding LP"))
}

fn main() {
    let criteria: [(&str, fn() -> Result<Verdict>); 14] = [
        ("quartic cost is flat on all martingale plans", quartic_flatness),
        ("exp optimum is the unique left curtain", exp_optimum_is_curtain),
        ("separable optimum is the left curtain", separable_optimum_is_curtain),
        ("shadow associativity, order independence and minimality", shadow_laws),
        ("curtains are left-monotone, and the only monotone vertex", curtains_are_left_monotone),
        ("curtain prefixes are convex-minimal", convex_minimality),
        ("LP optima are variationally optimal", variational_optimality),
        ("Pythagorean identity and quadratic shift", pythagorean_and_shift),
        ("quantile coupling solves quadratic transport", quantile_coupling),
        ("quartic martingale optimum has at most three atoms per row", quartic_support_sizes),
        ("HN cost structure", hn_structure),
        ("distance cost structure", abs_structure),
        ("three-point dual certificate", three_point_dual),
        ("hinge test matches the embedding LP", hinge_test),
    ];
    let mut passed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = check().unwrap_or_else(|e| Verdict { passed: false, detail: format!("error: {e}") });
        passed += usize::from(v.passed);
        println!(
            "criterion {:>2} {} {name}: {} [{:.2} s]",
            k + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
