//! Left- and right-curtain couplings.
//!
//! The left curtain sends every left tail `μ|_{(-∞,x]}` onto its shadow in
//! `ν`. On finitely many atoms it is built by shadowing the atoms in
//! ascending order, each one in what remains of `ν`.

mod coupling;

pub use coupling::{
    is_left_monotone, is_right_monotone, row_measure, Coupling, MonotonicityWitness, Residuals, RowMap,
    SupportProfile,
};

use crate::error::{MotError, Result};
use crate::measures::{convex_order_with, DiscreteMeasure};
use crate::shadow::shadow_with;
use crate::tolerance::Tolerances;
use crate::Scalar;

pub fn left_curtain<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<Coupling<T>> {
    left_curtain_with(mu, nu, &Tolerances::default())
}

pub fn left_curtain_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<Coupling<T>> {
    if !convex_order_with(mu, nu, tols) {
        return Err(MotError::NotInConvexOrder);
    }
    let res = shadow_with(mu, nu, tols).map_err(|e| match e {
        MotError::NotInExtendedOrder => MotError::NotInConvexOrder,
        other => other,
    })?;
    let rows = res
        .trace
        .into_iter()
        .map(|t| t.window.atoms().iter().map(|a| (a.x.clone(), a.w.clone())).collect())
        .collect();
    Coupling::from_rows(mu.clone(), nu.clone(), rows)
}

pub fn right_curtain<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<Coupling<T>> {
    right_curtain_with(mu, nu, &Tolerances::default())
}

/// Mirror image of the left curtain of the reflected marginals.
pub fn right_curtain_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<Coupling<T>> {
    Ok(left_curtain_with(&mu.reflect(), &nu.reflect(), tols)?.reflect())
}

pub fn prefix_target<T: Scalar>(pi: &Coupling<T>, t: &T) -> DiscreteMeasure<T> {
    pi.prefix_target(t)
}

pub fn check_convex_minimality<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    rival: &Coupling<T>,
) -> Result<bool> {
    check_convex_minimality_with(mu, nu, rival, &Tolerances::default())
}

/// True when, for every `t` in the support of `μ`, the left curtain's prefix
/// target is below the rival's in convex order.
pub fn check_convex_minimality_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    rival: &Coupling<T>,
    tols: &Tolerances,
) -> Result<bool> {
    rival.validate(tols).map_err(|e| MotError::InvalidRival(e.to_string()))?;
    let feas: T = tols.feas();
    if !rival.source().approx_eq(mu, &feas) || !rival.target().approx_eq(nu, &feas) {
        return Err(MotError::InvalidRival("marginals differ from (μ, ν)".into()));
    }
    let lc = left_curtain_with(mu, nu, tols)?;
    Ok(mu.atoms().iter().all(|a| {
        convex_order_with(&lc.prefix_target(&a.x), &rival.prefix_target(&a.x), tols)
    }))
}
