//! Named reproduction experiments. Each returns a [`Report`]; identical
//! configuration gives byte-identical JSON.

mod gauss;
mod quartic;
mod structure;
mod three_point;

pub use gauss::{coarse_target_instance, run_gauss_curtain, GaussOutcome};
pub use quartic::run_quartic_flat;
pub use structure::{common_grid_instance, run_abs_structure, run_hn_structure};
pub use three_point::{dfdx, f_poly, run_three_point, ThreePoint};

use mot_core::{MotError, Result};

use crate::config::Config;
use crate::parallel::par_map;
use crate::report::Report;

pub const IDS: [&str; 5] = ["quartic-flat", "gauss-curtain", "three-point", "hn-structure", "abs-structure"];

/// Output of one experiment: its report and, for the curtain experiment,
/// the `x,T1,T2` table.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
}

pub fn run(id: &str, config: &Config, jobs: usize) -> Result<Outcome> {
    let report = match id {
        "quartic-flat" => run_quartic_flat(config)?,
        "gauss-curtain" => {
            let out = run_gauss_curtain(config, jobs)?;
            return Ok(Outcome {
                report: out.report,
                csv: Some(out.csv),
            });
        }
        "three-point" => run_three_point(config)?,
        "hn-structure" => run_hn_structure(config, jobs)?,
        "abs-structure" => run_abs_structure(config, jobs)?,
        other => {
            return Err(MotError::Domain(format!(
                "unknown experiment \"{other}\" (expected one of {} or all)",
                IDS.join(", ")
            )))
        }
    };
    Ok(Outcome { report, csv: None })
}

/// Runs several experiments, `jobs` at a time, in the given order.
pub fn run_many(ids: &[&str], config: &Config, jobs: usize) -> Vec<Result<Outcome>> {
    par_map(jobs, ids, |id| run(id, config, 1))
}
