//! Shadow projections.
//!
//! The shadow of `μ` in `ν` is the convex-order minimal measure `η` with
//! `μ ≤_c η ≤ ν`. For one atom `αδ_x` it is the restriction of `ν` to a
//! quantile window `[s, s+α]` whose barycenter is `x`; for a general `μ` the
//! atoms are shadowed one after another in what is left of `ν`.

use std::cmp::Ordering;

use crate::error::{MotError, Result};
use crate::measures::{extended_order_with, Atom, DiscreteMeasure};
use crate::scalar::{scaled_tol, Scalar};
use crate::tolerance::Tolerances;

/// Quantile window used for one atom of the source.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowTrace<T> {
    pub x: T,
    pub mass: T,
    /// Window `[start, end]` in the quantile scale of the running remainder.
    pub start: T,
    pub end: T,
    /// Part of the target assigned to this atom.
    pub window: DiscreteMeasure<T>,
}

#[derive(Clone, Debug)]
pub struct ShadowResult<T> {
    pub shadow: DiscreteMeasure<T>,
    pub remainder: DiscreteMeasure<T>,
    pub trace: Vec<WindowTrace<T>>,
}

/// Integrated quantile function `I(s) = ∫₀ˢ G_ν`, piecewise linear in `s`.
struct QuantileIntegral<'a, T> {
    nu: &'a DiscreteMeasure<T>,
    cumulative: Vec<T>,
    integral_at: Vec<T>,
}

impl<'a, T: Scalar> QuantileIntegral<'a, T> {
    fn new(nu: &'a DiscreteMeasure<T>) -> Self {
        let cumulative = nu.cumulative();
        let mut integral_at = Vec::with_capacity(nu.len());
        let mut acc = T::zero();
        for a in nu.atoms() {
            acc += a.w.clone() * &a.x;
            integral_at.push(acc.clone());
        }
        Self {
            nu,
            cumulative,
            integral_at,
        }
    }

    fn mass(&self) -> T {
        self.cumulative.last().cloned().unwrap_or_else(T::zero)
    }

    fn eval(&self, s: &T) -> T {
        let atoms = self.nu.atoms();
        if atoms.is_empty() {
            return T::zero();
        }
        // first atom whose cumulative mass reaches s
        let j = self.cumulative.partition_point(|c| c < s).min(atoms.len() - 1);
        let (prev_c, prev_i) = if j == 0 {
            (T::zero(), T::zero())
        } else {
            (self.cumulative[j - 1].clone(), self.integral_at[j - 1].clone())
        };
        prev_i + (s.clone() - prev_c) * &atoms[j].x
    }

    /// Barycenter of the quantile window `[s, s+α]`.
    fn barycenter(&self, alpha: &T, s: &T) -> T {
        (self.eval(&(s.clone() + alpha)) - self.eval(s)) / alpha
    }

    /// Points where `s ↦ I(s + shift)` or `I(s)` has a kink, clipped to `[lo, hi]`.
    fn kinks(&self, shift: &T, lo: &T, hi: &T) -> Vec<T> {
        let mut pts = vec![lo.clone(), hi.clone()];
        for c in &self.cumulative {
            for p in [c.clone(), c.clone() - shift] {
                if p > *lo && p < *hi {
                    pts.push(p);
                }
            }
        }
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        pts.dedup();
        pts
    }

    /// Restriction of `ν` to the quantile window `[s, e]`.
    fn window(&self, s: &T, e: &T, prune: &T) -> DiscreteMeasure<T> {
        let mut out = Vec::new();
        let mut prev = T::zero();
        for (a, c) in self.nu.atoms().iter().zip(&self.cumulative) {
            let lo = T::max_of(prev.clone(), s.clone());
            let hi = T::min_of(c.clone(), e.clone());
            if hi > lo {
                let w = hi - lo;
                if w > *prune {
                    out.push(Atom { x: a.x.clone(), w });
                }
            }
            prev = c.clone();
            if prev >= *e {
                break;
            }
        }
        DiscreteMeasure::from_sorted(out)
    }
}

/// Barycenter `B(s, ν) = (1/α) ∫_s^{s+α} G_ν` of the quantile window.
pub fn barycenter_window<T: Scalar>(nu: &DiscreteMeasure<T>, alpha: &T, s: &T) -> Result<T> {
    if !alpha.is_positive() {
        return Err(MotError::Domain(format!("window mass must be positive, got {alpha}")));
    }
    if s.is_negative() || s.clone() + alpha > *nu.total_mass() {
        return Err(MotError::Domain(format!(
            "window [{s}, {s} + {alpha}] exceeds mass {}",
            nu.total_mass()
        )));
    }
    Ok(QuantileIntegral::new(nu).barycenter(alpha, s))
}

/// Leftmost `s ∈ [0, mass - α]` with `B(s, ν) = x`, and the window measure.
fn solve_atom_window<T: Scalar>(
    x: &T,
    alpha: &T,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<(T, DiscreteMeasure<T>)> {
    let qi = QuantileIntegral::new(nu);
    let total = qi.mass();
    let mass_tol = scaled_tol(&tols.order::<T>(), &[&total]);
    if *alpha > total.clone() + &mass_tol {
        return Err(MotError::NotInExtendedOrder);
    }
    let prune: T = tols.prune();
    if *alpha >= total {
        // the only candidate is ν itself
        let mean = nu.mean().ok_or(MotError::NotInExtendedOrder)?;
        let tol = scaled_tol(&tols.order::<T>(), &[&mean, x]);
        if (mean - x).abs() > tol {
            return Err(MotError::NotInExtendedOrder);
        }
        return Ok((T::zero(), nu.clone()));
    }
    let last = total.clone() - alpha;
    let pts = qi.kinks(alpha, &T::zero(), &last);
    let values: Vec<T> = pts.iter().map(|s| qi.barycenter(alpha, s)).collect();
    let tol = scaled_tol(&tols.order::<T>(), &[x, &values[0], &values[values.len() - 1]]);
    if *x < values[0].clone() - &tol || *x > values[values.len() - 1].clone() + &tol {
        return Err(MotError::NotInExtendedOrder);
    }
    let mut s = last.clone();
    if *x <= values[0] {
        s = T::zero();
    } else {
        for k in 1..pts.len() {
            if values[k] >= *x {
                let (b0, b1) = (&values[k - 1], &values[k]);
                s = if *b1 == *b0 {
                    pts[k - 1].clone()
                } else {
                    pts[k - 1].clone()
                        + (x.clone() - b0) * (pts[k].clone() - &pts[k - 1]) / (b1.clone() - b0)
                };
                break;
            }
        }
    }
    let end = s.clone() + alpha;
    let window = qi.window(&s, &end, &prune);
    Ok((s, window))
}

/// Shadow of the atom `αδ_x` in `ν`: the quantile window of mass `α` with
/// barycenter `x`.
pub fn shadow_atom<T: Scalar>(x: &T, alpha: &T, nu: &DiscreteMeasure<T>) -> Result<DiscreteMeasure<T>> {
    shadow_atom_with(x, alpha, nu, &Tolerances::default())
}

pub fn shadow_atom_with<T: Scalar>(
    x: &T,
    alpha: &T,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<DiscreteMeasure<T>> {
    if !alpha.is_positive() {
        return Ok(DiscreteMeasure::zero());
    }
    solve_atom_window(x, alpha, nu, tols).map(|(_, w)| w)
}

pub fn shadow<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<ShadowResult<T>> {
    shadow_with(mu, nu, &Tolerances::default())
}

/// Shadow of `μ` in `ν`, shadowing the atoms of `μ` in ascending position.
pub fn shadow_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<ShadowResult<T>> {
    let order: Vec<usize> = (0..mu.len()).collect();
    shadow_in_order(mu, nu, &order, tols)
}

/// Shadow of `μ` in `ν` folding the atoms of `μ` in the given order.
/// The result does not depend on the order.
pub fn shadow_in_order<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    order: &[usize],
    tols: &Tolerances,
) -> Result<ShadowResult<T>> {
    if !extended_order_with(mu, nu, tols) {
        return Err(MotError::NotInExtendedOrder);
    }
    let prune: T = tols.prune();
    let mut remainder = nu.clone();
    let mut shadow = DiscreteMeasure::zero();
    let mut trace = Vec::with_capacity(order.len());
    for &i in order {
        let atom = &mu.atoms()[i];
        if atom.w.is_zero() {
            continue;
        }
        let (start, window) = solve_atom_window(&atom.x, &atom.w, &remainder, tols)?;
        remainder = remainder.sub(&window, &prune)?;
        shadow = shadow.add(&window);
        trace.push(WindowTrace {
            x: atom.x.clone(),
            mass: atom.w.clone(),
            end: start.clone() + &atom.w,
            start,
            window,
        });
    }
    Ok(ShadowResult {
        shadow,
        remainder,
        trace,
    })
}

pub fn maximal_embedding<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<DiscreteMeasure<T>> {
    maximal_embedding_with(mu, nu, &Tolerances::default())
}

/// Convex-order maximal `θ` with `μ ≤_c θ ≤ ν`: `ν` with the quantile band
/// `]ζ, ζ + mass(ν) - mass(μ)[` removed, `ζ` matching the first moment of `μ`.
pub fn maximal_embedding_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<DiscreteMeasure<T>> {
    if !extended_order_with(mu, nu, tols) {
        return Err(MotError::NotInExtendedOrder);
    }
    if mu.is_empty() {
        return Ok(DiscreteMeasure::zero());
    }
    let qi = QuantileIntegral::new(nu);
    let total = qi.mass();
    let keep = T::min_of(mu.total_mass().clone(), total.clone());
    let band = total.clone() - &keep;
    if !band.is_positive() {
        return Ok(nu.clone());
    }
    let full = qi.eval(&total);
    // moment kept when the band starts at ζ; non-increasing in ζ
    let kept = |z: &T| qi.eval(z) + &full - qi.eval(&(z.clone() + &band));
    let target = mu.first_moment().clone();
    let pts = qi.kinks(&band, &T::zero(), &keep);
    let values: Vec<T> = pts.iter().map(kept).collect();
    let mut zeta = keep.clone();
    if target >= values[0] {
        zeta = T::zero();
    } else {
        for k in 1..pts.len() {
            if values[k] <= target {
                let (h0, h1) = (&values[k - 1], &values[k]);
                zeta = if *h0 == *h1 {
                    pts[k - 1].clone()
                } else {
                    pts[k - 1].clone()
                        + (h0.clone() - &target) * (pts[k].clone() - &pts[k - 1]) / (h0.clone() - h1)
                };
                break;
            }
        }
    }
    let prune: T = tols.prune();
    let low = qi.window(&T::zero(), &zeta, &prune);
    let high = qi.window(&(zeta + &band), &total, &prune);
    Ok(low.add(&high))
}
