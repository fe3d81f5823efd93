//! Support structure of optimisers for `-|y - x|` and `|y - x|` on
//! quantized Gaussian marginals.

use mot_core::costs::CostSpec;
use mot_core::lp::{cost_scale, solve_martingale_matrix, solve_transport, TransportLp};
use mot_core::measures::{gaussian_quantize, grid_projection, min_measure, uniform_grid, DiscreteMeasure};
use mot_core::variation::find_bad_configuration;
use mot_core::Result;

use crate::config::Config;
use crate::experiments::coarse_target_instance;
use crate::parallel::par_map;
use crate::report::{num, Report};

#[derive(Clone, Debug)]
struct HnStats {
    n: usize,
    value: f64,
    two_atom_fraction: f64,
    t1_drop: f64,
    t2_drop: f64,
    bad: Option<String>,
    residual: f64,
}

fn hn_instance(n: usize, config: &Config) -> Result<HnStats> {
    let h = &config.hn_structure;
    let (mu, nu) = coarse_target_instance(n, h.nu_atoms, 0.0, h.sd_mu, h.sd_nu)?;
    let c = CostSpec::NegAbsDiff.matrix(&mu, &nu)?;
    let sol = solve_martingale_matrix(&mu, &nu, &c, &config.tolerances)?;
    let threshold = config.tolerances.support;
    let profile = sol.plan.support_profile(&threshold);
    // Row maps over rows with at most two atoms.
    let maps: Vec<(f64, f64)> = sol
        .plan
        .row_maps(&threshold)
        .into_iter()
        .filter(|m| m.count >= 1 && m.count <= 2)
        .map(|m| (m.t1.expect("live row"), *m.upper().expect("live row")))
        .collect();
    let drop = |k: usize| {
        maps.windows(2)
            .map(|w| if k == 0 { w[0].0 - w[1].0 } else { w[0].1 - w[1].1 })
            .fold(0.0f64, f64::max)
    };
    let bad = find_bad_configuration(&sol.plan, &threshold).map(|b| {
        format!(
            "x = {}, y⁻ = {}, y⁺ = {}, x′ = {}, y′ = {}",
            b.x, b.y_minus, b.y_plus, b.x_prime, b.y_prime
        )
    });
    let r = sol.plan.residuals();
    Ok(HnStats {
        n,
        value: sol.value,
        two_atom_fraction: profile.mass_fraction_at_most(2),
        t1_drop: drop(0),
        t2_drop: drop(1),
        bad,
        residual: r.row.max(r.column).max(r.martingale),
    })
}

pub fn run_hn_structure(config: &Config, jobs: usize) -> Result<Report> {
    let h = &config.hn_structure;
    let mut report = Report::new("hn-structure", config);
    report.input("sizes", h.sizes.clone());
    report.input("nu_atoms", h.nu_atoms);
    report.input("sd_mu", num(h.sd_mu));
    report.input("sd_nu", num(h.sd_nu));
    report.input("cost", "neg-abs");
    let stats: Vec<Result<HnStats>> = par_map(jobs, &h.sizes, |&n| hn_instance(n, config));
    let stats: Vec<HnStats> = stats.into_iter().collect::<Result<_>>()?;
    let slack = config.tolerances.feas;
    for s in &stats {
        let n = s.n;
        report.value(&format!("value_n{n}"), num(s.value));
        report.value(&format!("two_atom_fraction_n{n}"), num(s.two_atom_fraction));
        report.value(&format!("feasibility_residual_n{n}"), num(s.residual));
        report.check(
            &format!("two-atom-fraction-n{n}"),
            s.two_atom_fraction >= h.two_atom_fraction,
            format!("{:.6} of μ-mass in rows with ≤ 2 atoms (need {})", s.two_atom_fraction, h.two_atom_fraction),
        );
        report.check(
            &format!("maps-nondecreasing-n{n}"),
            s.t1_drop <= slack && s.t2_drop <= slack,
            format!("largest drop of T₁ {:e}, of T₂ {:e}", s.t1_drop, s.t2_drop),
        );
        report.check(
            &format!("no-bad-configuration-n{n}"),
            s.bad.is_none(),
            s.bad.clone().unwrap_or_else(|| "none found".into()),
        );
    }
    let excess: Vec<f64> = stats.iter().map(|s| 1.0 - s.two_atom_fraction).collect();
    report.check(
        "margin-trend",
        excess.windows(2).all(|w| w[1] <= w[0] + slack),
        format!(
            "mass in rows with > 2 atoms: {}",
            stats
                .iter()
                .zip(&excess)
                .map(|(s, e)| format!("n={}: {e:.6}", s.n))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    report.note("the target is a fine quantization projected onto a coarse grid; a vertex of the LP has at most 2n + m - 2 nonzero entries, so only rows crossing a target atom carry a third atom");
    Ok(report)
}

/// Both Gaussians quantized with `oversampling·n` atoms and projected onto
/// one grid of `n` points spanning both supports. Projection keeps the
/// convex order, and the shared grid makes `μ ∧ ν` non-trivial.
pub fn common_grid_instance(
    n: usize,
    oversampling: usize,
    sd_mu: f64,
    sd_nu: f64,
) -> Result<(DiscreteMeasure<f64>, DiscreteMeasure<f64>)> {
    let fine_mu: DiscreteMeasure<f64> = gaussian_quantize(0.0, sd_mu, oversampling.max(1) * n)?;
    let fine_nu: DiscreteMeasure<f64> = gaussian_quantize(0.0, sd_nu, oversampling.max(1) * n)?;
    let lo = fine_mu.min_position().expect("atoms").min(*fine_nu.min_position().expect("atoms"));
    let hi = fine_mu.max_position().expect("atoms").max(*fine_nu.max_position().expect("atoms"));
    let grid = uniform_grid(&lo, &hi, n);
    Ok((grid_projection(&fine_mu, &grid)?, grid_projection(&fine_nu, &grid)?))
}

#[derive(Clone, Debug)]
struct AbsStats {
    n: usize,
    free: f64,
    forced: f64,
    scale: f64,
    stay_mass: f64,
    common_mass: f64,
    three_atom_fraction: f64,
}

fn abs_instance(n: usize, config: &Config) -> Result<AbsStats> {
    let a = &config.abs_structure;
    let (mu, nu) = common_grid_instance(n, a.oversampling, a.sd_mu, a.sd_nu)?;
    let c = CostSpec::AbsDiff.matrix(&mu, &nu)?;
    let tols = &config.tolerances;
    let free = solve_martingale_matrix(&mu, &nu, &c, tols)?;
    let common = min_measure(&mu, &nu);
    let mut tlp = TransportLp::martingale(&mu, &nu, &c);
    for at in common.atoms() {
        let i = mu.index_of(&at.x).expect("common atom of μ");
        let j = nu.index_of(&at.x).expect("common atom of ν");
        tlp.fix_entry(i, j, at.w);
    }
    let warm = tlp.warm_columns(&free.plan);
    let forced = solve_transport(&tlp, Some(&warm), tols)?;
    let stay_mass: f64 = free
        .plan
        .entries()
        .into_iter()
        .filter(|(x, y, _)| x == y)
        .map(|(_, _, w)| w)
        .sum();
    Ok(AbsStats {
        n,
        free: free.value,
        forced: forced.value,
        scale: cost_scale(&free.value, &c),
        stay_mass,
        common_mass: *common.total_mass(),
        three_atom_fraction: free.plan.support_profile(&tols.support).mass_fraction_at_most(3),
    })
}

pub fn run_abs_structure(config: &Config, jobs: usize) -> Result<Report> {
    let a = &config.abs_structure;
    let mut report = Report::new("abs-structure", config);
    report.input("sizes", a.sizes.clone());
    report.input("oversampling", a.oversampling);
    report.input("sd_mu", num(a.sd_mu));
    report.input("sd_nu", num(a.sd_nu));
    report.input("cost", "abs");
    let stats: Vec<Result<AbsStats>> = par_map(jobs, &a.sizes, |&n| abs_instance(n, config));
    let stats: Vec<AbsStats> = stats.into_iter().collect::<Result<_>>()?;
    let mut gaps = Vec::with_capacity(stats.len());
    for s in &stats {
        let n = s.n;
        let gap = s.forced - s.free;
        gaps.push((n, gap, s.scale));
        report.value(&format!("free_value_n{n}"), num(s.free));
        report.value(&format!("forced_value_n{n}"), num(s.forced));
        report.value(&format!("gap_n{n}"), num(gap));
        report.value(&format!("stay_mass_n{n}"), num(s.stay_mass));
        report.value(&format!("common_mass_n{n}"), num(s.common_mass));
        report.value(&format!("three_atom_fraction_n{n}"), num(s.three_atom_fraction));
    }
    let slack = config.tolerances.feas;
    report.check(
        "gap-nonincreasing",
        gaps.windows(2).all(|w| w[1].1 <= w[0].1 + slack * w[0].2.max(w[1].2)),
        format!(
            "forced - free: {}",
            gaps.iter().map(|(n, g, _)| format!("n={n}: {g:e}")).collect::<Vec<_>>().join(", ")
        ),
    );
    if let Some(&(n, gap, scale)) = gaps.last() {
        report.check(
            "gap-small",
            gap <= a.gap_tol * scale,
            format!("gap {gap:e} at n={n}, bound {:e}", a.gap_tol * scale),
        );
    }
    Ok(report)
}
