use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Float-mode tolerances. All of them are ignored in exact mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Slack for convex/extended order comparisons of potentials.
    pub order: f64,
    /// Primal/dual feasibility slack for couplings and LP solutions.
    pub feas: f64,
    /// Masses at or below this are dropped from remainders.
    pub prune: f64,
    /// Atoms of a plan at or below this do not count as support.
    pub support: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            order: 1e-9,
            feas: 1e-9,
            prune: 1e-14,
            support: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn order<T: Scalar>(&self) -> T {
        T::tol(self.order)
    }

    pub fn feas<T: Scalar>(&self) -> T {
        T::tol(self.feas)
    }

    pub fn prune<T: Scalar>(&self) -> T {
        T::tol(self.prune)
    }

    pub fn support<T: Scalar>(&self) -> T {
        T::tol(self.support)
    }
}
