//! Experiment settings, read from a TOML file and `--set key=value`
//! overrides.
//!
//! ```toml
//! disabled = ["hn-structure/no-bad-configuration"]
//!
//! [tolerances]
//! feas = 1e-9
//!
//! [hn-structure]
//! sizes = [100, 200]
//! nu-atoms = 5
//! ```

use std::path::Path;

use mot_core::{MotError, Result, Tolerances};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct Config {
    pub tolerances: Tolerances,
    /// Assertions reported as disabled, written `experiment/assertion`.
    pub disabled: Vec<String>,
    pub quartic_flat: QuarticConfig,
    pub gauss_curtain: GaussConfig,
    pub three_point: ThreePointConfig,
    pub hn_structure: HnConfig,
    pub abs_structure: AbsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct QuarticConfig {
    pub probe_trials: usize,
    pub seed: u64,
}

impl Default for QuarticConfig {
    fn default() -> Self {
        Self { probe_trials: 5, seed: 7 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct GaussConfig {
    pub n: usize,
    /// Atoms of the target after projection onto an equally spaced grid;
    /// zero keeps the full quantization.
    pub nu_atoms: usize,
    pub mean: f64,
    pub sd_mu: f64,
    pub sd_nu: f64,
    /// Required share of source mass in rows with at most two atoms.
    pub two_atom_fraction: f64,
    /// Sizes compared for the margin trend, besides `n`.
    pub trend_sizes: Vec<usize>,
}

impl Default for GaussConfig {
    fn default() -> Self {
        Self {
            n: 200,
            nu_atoms: 5,
            mean: 0.0,
            sd_mu: 1.0,
            sd_nu: 2.0,
            two_atom_fraction: 0.95,
            trend_sizes: vec![100, 200],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ThreePointConfig {
    /// Source atoms placed in `]0, 1/5[`.
    pub atoms: usize,
    /// Points per unit length of the `y` verification grid.
    pub grid_density: usize,
    pub x_grid: usize,
    pub dual_tol: f64,
    pub value_tol: f64,
}

impl Default for ThreePointConfig {
    fn default() -> Self {
        Self {
            atoms: 30,
            grid_density: 400,
            x_grid: 101,
            dual_tol: 1e-8,
            value_tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct HnConfig {
    pub sizes: Vec<usize>,
    pub nu_atoms: usize,
    pub sd_mu: f64,
    pub sd_nu: f64,
    pub two_atom_fraction: f64,
}

impl Default for HnConfig {
    fn default() -> Self {
        Self {
            sizes: vec![100, 200],
            nu_atoms: 5,
            sd_mu: 1.0,
            sd_nu: 2.0,
            two_atom_fraction: 0.95,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct AbsConfig {
    /// Points of the common grid.
    pub sizes: Vec<usize>,
    /// Atoms of the fine quantizations, per grid point.
    pub oversampling: usize,
    pub sd_mu: f64,
    pub sd_nu: f64,
    /// Largest admissible gap at the finest size, relative to the cost scale.
    pub gap_tol: f64,
}

impl Default for AbsConfig {
    fn default() -> Self {
        Self {
            sizes: vec![100, 200, 400],
            oversampling: 4,
            sd_mu: 1.0,
            sd_nu: 2.0,
            gap_tol: 1e-3,
        }
    }
}

fn parse_error(message: impl Into<String>) -> MotError {
    MotError::Parse {
        position: 0,
        message: message.into(),
    }
}

/// Reads `key=value`; the value is TOML, or a bare string when it does not
/// parse as TOML.
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| parse_error(format!("override \"{assignment}\" is not key=value")))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    let (last, path) = parts.split_last().expect("split yields one part");
    let mut cur = table;
    for p in path {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| parse_error(format!("\"{p}\" in \"{key}\" is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

impl Config {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| MotError::Parse {
            position: e.span().map_or(0, |s| s.start),
            message: e.message().to_string(),
        })?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        table.try_into().map_err(|e: toml::de::Error| parse_error(e.message().to_string()))
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    pub fn is_enabled(&self, experiment: &str, assertion: &str) -> bool {
        let id = format!("{experiment}/{assertion}");
        !self.disabled.iter().any(|d| *d == id || d == experiment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::from_toml("", &[]).unwrap(), Config::default());
    }

    #[test]
    fn file_and_overrides() {
        let text = "disabled = [\"hn-structure/bad\"]\n[hn-structure]\nnu-atoms = 7\n";
        let cfg = Config::from_toml(text, &["tolerances.feas=1e-8".into(), "abs-structure.sizes=[10, 20]".into()]).unwrap();
        assert_eq!(cfg.hn_structure.nu_atoms, 7);
        assert_eq!(cfg.tolerances.feas, 1e-8);
        assert_eq!(cfg.abs_structure.sizes, vec![10, 20]);
        assert!(!cfg.is_enabled("hn-structure", "bad"));
        assert!(cfg.is_enabled("hn-structure", "fraction"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Config::from_toml("[hn-structure]\nnu_atom = 3\n", &[]).is_err());
        assert!(Config::from_toml("", &["nonsense".into()]).is_err());
    }
}
