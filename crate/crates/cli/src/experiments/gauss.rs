//! Left curtain between two quantized Gaussians with the same mean.

use mot_core::curtain::{left_curtain_with, Coupling};
use mot_core::io::maps_to_csv;
use mot_core::measures::{gaussian_quantize, grid_projection, uniform_grid, DiscreteMeasure};
use mot_core::{MotError, Result, Tolerances};

use crate::config::Config;
use crate::parallel::par_map;
use crate::report::{num, Report};

#[derive(Clone, Debug)]
pub struct GaussOutcome {
    pub report: Report,
    pub csv: String,
}

/// `μ` quantized with `n` atoms; `ν` quantized with `n` atoms and then,
/// when `nu_atoms > 0`, projected onto `nu_atoms` equally spaced points
/// spanning its support. The projection only increases `ν` in convex order,
/// so `μ ≤_c ν` is kept.
pub fn coarse_target_instance(
    n: usize,
    nu_atoms: usize,
    mean: f64,
    sd_mu: f64,
    sd_nu: f64,
) -> Result<(DiscreteMeasure<f64>, DiscreteMeasure<f64>)> {
    let mu = gaussian_quantize(mean, sd_mu, n)?;
    let fine: DiscreteMeasure<f64> = gaussian_quantize(mean, sd_nu, n)?;
    if nu_atoms == 0 || nu_atoms >= fine.len() {
        return Ok((mu, fine));
    }
    if nu_atoms < 2 {
        return Err(MotError::Domain("a projected target needs at least two atoms".into()));
    }
    let lo = *fine.min_position().expect("non-empty");
    let hi = *fine.max_position().expect("non-empty");
    let nu = grid_projection(&fine, &uniform_grid(&lo, &hi, nu_atoms))?;
    Ok((mu, nu))
}

/// Shape statistics of a left curtain.
#[derive(Clone, Debug, PartialEq)]
struct Shape {
    two_atom_fraction: f64,
    max_atoms: usize,
    /// Largest `T₁(x) - x` or `x - T₂(x)` (positive when violated).
    bracket_violation: f64,
    /// Largest drop of `T₂` between consecutive rows.
    t2_drop: f64,
    /// Largest rise of `T₁` between consecutive rows after the identity
    /// region.
    t1_rise: f64,
    identity_rows: usize,
    /// How far past the first non-identity row an identity row still occurs.
    identity_overlap: f64,
    last_identity: Option<f64>,
    first_moving: Option<f64>,
    delta_q: f64,
}

/// Rows that stay: supported between the target atoms that bracket `x`
/// (exactly `{x}` when `x` is a target atom).
fn stays(x: f64, t1: f64, t2: f64, nu: &[f64]) -> bool {
    let below = nu.iter().rev().find(|&&y| y <= x).copied().unwrap_or(f64::NEG_INFINITY);
    let above = nu.iter().find(|&&y| y >= x).copied().unwrap_or(f64::INFINITY);
    t1 >= below && t2 <= above
}

fn shape(pi: &Coupling<f64>, nu: &DiscreteMeasure<f64>, threshold: f64) -> Shape {
    let ys = nu.positions();
    let xs = pi.source().positions();
    let maps = pi.row_maps(&threshold);
    let profile = pi.support_profile(&threshold);
    let gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    let delta_q = 4.0 * gap;
    let mut s = Shape {
        two_atom_fraction: profile.mass_fraction_at_most(2),
        max_atoms: profile.max_count(),
        bracket_violation: f64::NEG_INFINITY,
        t2_drop: 0.0,
        t1_rise: 0.0,
        identity_rows: 0,
        identity_overlap: 0.0,
        last_identity: None,
        first_moving: None,
        delta_q,
    };
    let live: Vec<(f64, f64, f64)> = maps
        .iter()
        .filter_map(|m| Some((m.x, m.t1?, *m.upper()?)))
        .collect();
    for (x, t1, t2) in &live {
        s.bracket_violation = s.bracket_violation.max(t1 - x).max(x - t2);
    }
    for w in live.windows(2) {
        s.t2_drop = s.t2_drop.max(w[0].2 - w[1].2);
    }
    let flags: Vec<bool> = live.iter().map(|(x, t1, t2)| stays(*x, *t1, *t2, &ys)).collect();
    s.identity_rows = flags.iter().filter(|&&f| f).count();
    let first = flags.iter().position(|&f| !f);
    if let Some(k) = first {
        let x0 = live[k].0;
        s.first_moving = Some(x0);
        s.last_identity = flags[..k].iter().rposition(|&f| f).map(|i| live[i].0);
        for (i, f) in flags.iter().enumerate().skip(k) {
            if *f {
                s.identity_overlap = s.identity_overlap.max(live[i].0 - x0);
            }
        }
        for w in live[k..].windows(2) {
            s.t1_rise = s.t1_rise.max(w[1].1 - w[0].1);
        }
    } else {
        s.last_identity = live.last().map(|r| r.0);
    }
    if live.is_empty() {
        s.bracket_violation = 0.0;
    }
    s
}

fn curtain(n: usize, config: &Config) -> Result<(DiscreteMeasure<f64>, DiscreteMeasure<f64>, Coupling<f64>)> {
    let g = &config.gauss_curtain;
    let (mu, nu) = coarse_target_instance(n, g.nu_atoms, g.mean, g.sd_mu, g.sd_nu)?;
    let pi = left_curtain_with(&mu, &nu, &config.tolerances)?;
    Ok((mu, nu, pi))
}

pub fn run_gauss_curtain(config: &Config, jobs: usize) -> Result<GaussOutcome> {
    let g = &config.gauss_curtain;
    let mut report = Report::new("gauss-curtain", config);
    if !(g.sd_mu > 0.0 && g.sd_nu > 0.0) {
        return Err(MotError::Domain(format!("standard deviations must be positive, got {} and {}", g.sd_mu, g.sd_nu)));
    }
    report.input("n", g.n);
    report.input("nu_atoms", g.nu_atoms);
    report.input("mean", num(g.mean));
    report.input("sd_mu", num(g.sd_mu));
    report.input("sd_nu", num(g.sd_nu));
    if g.sd_mu > g.sd_nu {
        report.note("sd_mu exceeds sd_nu: the marginals are not in convex order");
    }
    let tols: &Tolerances = &config.tolerances;
    let threshold = tols.support;
    let (_, nu, pi) = curtain(g.n, config)?;
    let s = shape(&pi, &nu, threshold);
    let slack = tols.feas * (1.0 + pi.scale());
    report.value("two_atom_fraction", num(s.two_atom_fraction));
    report.value("max_atoms_per_row", s.max_atoms);
    report.value("identity_rows", s.identity_rows);
    report.value("x0_empirical", s.last_identity.map_or(serde_json::Value::Null, num));
    report.value("first_moving_row", s.first_moving.map_or(serde_json::Value::Null, num));
    report.value("delta_q", num(s.delta_q));
    report.value("t2_largest_drop", num(s.t2_drop));
    report.value("t1_largest_rise", num(s.t1_rise));
    report.check(
        "two-atom-fraction",
        s.two_atom_fraction >= g.two_atom_fraction,
        format!("{:.6} of μ-mass in rows with ≤ 2 atoms (need {})", s.two_atom_fraction, g.two_atom_fraction),
    );
    report.check(
        "t1-below-x-below-t2",
        s.bracket_violation <= slack,
        format!("largest violation {:e}", s.bracket_violation.max(0.0)),
    );
    report.check(
        "t2-nondecreasing",
        s.t2_drop <= s.delta_q,
        format!("largest drop {:e}, tolerance δ_q = {:e}", s.t2_drop, s.delta_q),
    );
    report.check(
        "identity-prefix",
        s.identity_overlap <= s.delta_q,
        format!(
            "{} staying rows, overlap past the first moving row {:e}, tolerance {:e}",
            s.identity_rows, s.identity_overlap, s.delta_q
        ),
    );
    report.check(
        "t1-nonincreasing-after-identity",
        s.t1_rise <= s.delta_q,
        format!("largest rise {:e}, tolerance {:e}", s.t1_rise, s.delta_q),
    );

    let trend: Vec<Result<f64>> = par_map(jobs, &g.trend_sizes, |&m| {
        let (_, nu, pi) = curtain(m, config)?;
        Ok(1.0 - shape(&pi, &nu, threshold).two_atom_fraction)
    });
    let mut excess = Vec::with_capacity(trend.len());
    for (m, e) in g.trend_sizes.iter().zip(trend) {
        let e = e?;
        excess.push((m, e));
        report.value(&format!("excess_mass_n{m}"), num(e));
    }
    let improving = excess.windows(2).all(|w| w[1].1 <= w[0].1 + slack);
    report.check(
        "margin-trend",
        improving,
        format!(
            "mass in rows with > 2 atoms: {}",
            excess.iter().map(|(m, e)| format!("n={m}: {e:.6}")).collect::<Vec<_>>().join(", ")
        ),
    );
    report.note("rows count as staying when they are supported between the target atoms that bracket x; δ_q is four times the largest gap between consecutive source quantiles");
    Ok(GaussOutcome {
        csv: maps_to_csv(&pi, &threshold),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mot_core::measures::convex_order;

    #[test]
    fn projected_instance_is_in_convex_order() {
        for (n, m) in [(50, 5), (100, 7), (200, 5)] {
            let (mu, nu) = coarse_target_instance(n, m, 0.0, 1.0, 2.0).unwrap();
            assert_eq!(nu.len(), m);
            assert!(convex_order(&mu, &nu));
        }
    }

    #[test]
    fn single_atom_is_one_row() {
        let cfg = Config::default();
        let (mu, nu) = coarse_target_instance(1, 0, 0.5, 1.0, 2.0).unwrap();
        let pi = left_curtain_with(&mu, &nu, &cfg.tolerances).unwrap();
        let maps = pi.row_maps(&1e-10);
        assert_eq!(maps.len(), 1);
        assert_eq!((maps[0].t1, maps[0].t2), (Some(0.5), None));
    }

    #[test]
    fn equal_spreads_give_identity() {
        let (mu, nu) = coarse_target_instance(20, 0, 0.0, 1.0, 1.0).unwrap();
        let pi = left_curtain_with(&mu, &nu, &Tolerances::default()).unwrap();
        assert!(pi.approx_eq(&Coupling::identity(&mu), &1e-12));
    }

    #[test]
    fn default_run_passes() {
        let out = run_gauss_curtain(&Config::default(), 2).unwrap();
        assert!(out.report.passed(), "{}", out.report.to_text());
        assert!(out.csv.starts_with("x,T1,T2\n"));
        assert_eq!(out.csv.lines().count(), 201);
    }

    #[test]
    fn negative_spread_is_rejected() {
        let mut cfg = Config::default();
        cfg.gauss_curtain.sd_mu = 0.0;
        assert!(run_gauss_curtain(&cfg, 1).is_err());
    }
}
