//! Finitely supported positive measures on the real line.
//!
//! A [`DiscreteMeasure`] keeps its atoms sorted by strictly increasing
//! position with strictly positive masses, plus cached mass and first moment.
//! Convex order and the extended (non-negative convex) order are decided
//! through potential functions `u(x) = ∫|y - x| dμ(y)`, which are piecewise
//! linear with kinks at the atoms.

mod potential;
mod quantize;

use std::cmp::Ordering;

pub use potential::PotentialFunction;
pub use quantize::{
    gaussian_potential, gaussian_quantize, grid_projection, normal_cdf, normal_pdf,
    normal_quantile, uniform_grid,
};

use crate::error::{MotError, Result};
use crate::scalar::{scaled_tol, Scalar};
use crate::tolerance::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<T> {
    pub x: T,
    pub w: T,
}

#[derive(Clone, Debug)]
pub struct DiscreteMeasure<T> {
    atoms: Vec<Atom<T>>,
    total_mass: T,
    first_moment: T,
}

/// Atomwise equality (positions and masses).
impl<T: PartialEq> PartialEq for DiscreteMeasure<T> {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms
    }
}

/// Builds a measure from `(position, weight)` pairs: sorts, merges
/// duplicate positions and drops zero weights.
pub fn make_measure<T: Scalar>(pairs: impl IntoIterator<Item = (T, T)>) -> Result<DiscreteMeasure<T>> {
    DiscreteMeasure::new(pairs)
}

impl<T: Scalar> DiscreteMeasure<T> {
    pub fn new(pairs: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let mut atoms: Vec<Atom<T>> = Vec::new();
        for (x, w) in pairs {
            if w.is_negative() {
                return Err(MotError::InvalidMeasure(format!("negative weight {w} at {x}")));
            }
            atoms.push(Atom { x, w });
        }
        atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal));
        let mut merged: Vec<Atom<T>> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.x == atom.x => last.w += atom.w,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| !a.w.is_zero());
        Ok(Self::from_sorted(merged))
    }

    /// Caller guarantees strictly increasing positions and positive masses.
    pub(crate) fn from_sorted(atoms: Vec<Atom<T>>) -> Self {
        let mut total_mass = T::zero();
        let mut first_moment = T::zero();
        for a in &atoms {
            total_mass += a.w.clone();
            first_moment += a.w.clone() * &a.x;
        }
        Self {
            atoms,
            total_mass,
            first_moment,
        }
    }

    pub fn zero() -> Self {
        Self::from_sorted(Vec::new())
    }

    pub fn dirac(x: T, w: T) -> Self {
        if w.is_zero() {
            Self::zero()
        } else {
            Self::from_sorted(vec![Atom { x, w }])
        }
    }

    /// Equal masses `w` on each of the given positions.
    pub fn uniform(positions: &[T], w: T) -> Result<Self> {
        Self::new(positions.iter().map(|x| (x.clone(), w.clone())))
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> &T {
        &self.total_mass
    }

    pub fn first_moment(&self) -> &T {
        &self.first_moment
    }

    /// Barycenter, `None` for the zero measure.
    pub fn mean(&self) -> Option<T> {
        if self.total_mass.is_zero() {
            None
        } else {
            Some(self.first_moment.clone() / &self.total_mass)
        }
    }

    pub fn second_moment(&self) -> T {
        self.atoms
            .iter()
            .fold(T::zero(), |acc, a| acc + a.w.clone() * &a.x * &a.x)
    }

    pub fn positions(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.x.clone()).collect()
    }

    pub fn weights(&self) -> Vec<T> {
        self.atoms.iter().map(|a| a.w.clone()).collect()
    }

    pub fn min_position(&self) -> Option<&T> {
        self.atoms.first().map(|a| &a.x)
    }

    pub fn max_position(&self) -> Option<&T> {
        self.atoms.last().map(|a| &a.x)
    }

    pub fn index_of(&self, x: &T) -> Option<usize> {
        self.atoms
            .binary_search_by(|a| a.x.partial_cmp(x).unwrap_or(Ordering::Equal))
            .ok()
    }

    pub fn mass_at(&self, x: &T) -> T {
        self.index_of(x)
            .map(|i| self.atoms[i].w.clone())
            .unwrap_or_else(T::zero)
    }

    /// Cumulative masses `C_k = Σ_{j ≤ k} w_j`.
    pub fn cumulative(&self) -> Vec<T> {
        let mut acc = T::zero();
        self.atoms
            .iter()
            .map(|a| {
                acc += a.w.clone();
                acc.clone()
            })
            .collect()
    }

    /// Right-continuous distribution function `F(t) = μ(]-∞, t])`.
    pub fn cdf(&self, t: &T) -> T {
        self.atoms
            .iter()
            .take_while(|a| a.x <= *t)
            .fold(T::zero(), |acc, a| acc + &a.w)
    }

    /// Generalized inverse `G(s) = inf{t : s ≤ F(t)}` for `0 < s ≤ mass`.
    pub fn quantile(&self, s: &T) -> Result<T> {
        if !s.is_positive() || *s > self.total_mass {
            return Err(MotError::Domain(format!(
                "quantile level {s} outside (0, {}]",
                self.total_mass
            )));
        }
        let mut acc = T::zero();
        for a in &self.atoms {
            acc += a.w.clone();
            if *s <= acc {
                return Ok(a.x.clone());
            }
        }
        // Only reachable through float round-off in the cumulative sum.
        Ok(self.atoms.last().expect("positive mass").x.clone())
    }

    pub fn potential(&self) -> PotentialFunction<T> {
        PotentialFunction::from_measure(self)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.atoms.len() || j < other.atoms.len() {
            let take = match (self.atoms.get(i), other.atoms.get(j)) {
                (Some(a), Some(b)) => a.x.partial_cmp(&b.x).unwrap_or(Ordering::Equal),
                (Some(_), None) => Ordering::Less,
                (None, _) => Ordering::Greater,
            };
            match take {
                Ordering::Less => {
                    out.push(self.atoms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.atoms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(Atom {
                        x: self.atoms[i].x.clone(),
                        w: self.atoms[i].w.clone() + &other.atoms[j].w,
                    });
                    i += 1;
                    j += 1;
                }
            }
        }
        Self::from_sorted(out)
    }

    /// Atomwise difference `self - other`. Masses that end up within
    /// `prune` of zero are dropped; anything more negative is an error.
    pub fn sub(&self, other: &Self, prune: &T) -> Result<Self> {
        let mut out = Vec::with_capacity(self.len());
        let mut j = 0;
        for a in &self.atoms {
            let mut w = a.w.clone();
            while j < other.atoms.len() && other.atoms[j].x < a.x {
                if other.atoms[j].w > *prune {
                    return Err(MotError::InvalidMeasure(format!(
                        "subtracted measure has an atom at {} outside the support",
                        other.atoms[j].x
                    )));
                }
                j += 1;
            }
            if j < other.atoms.len() && other.atoms[j].x == a.x {
                w -= other.atoms[j].w.clone();
                j += 1;
            }
            if w > *prune {
                out.push(Atom { x: a.x.clone(), w });
            } else if w < -prune.clone() {
                return Err(MotError::InvalidMeasure(format!(
                    "difference is negative at {}",
                    a.x
                )));
            }
        }
        if other.atoms[j..].iter().any(|b| b.w > *prune) {
            return Err(MotError::InvalidMeasure(
                "subtracted measure has an atom outside the support".into(),
            ));
        }
        Ok(Self::from_sorted(out))
    }

    pub fn scale(&self, k: &T) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self::from_sorted(
            self.atoms
                .iter()
                .map(|a| Atom {
                    x: a.x.clone(),
                    w: a.w.clone() * k,
                })
                .collect(),
        )
    }

    /// Image under `x ↦ -x`.
    pub fn reflect(&self) -> Self {
        Self::from_sorted(
            self.atoms
                .iter()
                .rev()
                .map(|a| Atom {
                    x: -a.x.clone(),
                    w: a.w.clone(),
                })
                .collect(),
        )
    }

    /// Restriction to `]-∞, t]`.
    pub fn restrict_le(&self, t: &T) -> Self {
        Self::from_sorted(self.atoms.iter().take_while(|a| a.x <= *t).cloned().collect())
    }

    /// Drops atoms with mass `<= threshold`.
    pub fn prune(&self, threshold: &T) -> Self {
        Self::from_sorted(self.atoms.iter().filter(|a| a.w > *threshold).cloned().collect())
    }

    /// Same positions and masses within `tol` after pruning atoms below `tol`.
    pub fn approx_eq(&self, other: &Self, tol: &T) -> bool {
        if T::EXACT {
            return self == other;
        }
        let a = self.prune(tol);
        let b = other.prune(tol);
        a.len() == b.len()
            && a.atoms.iter().zip(&b.atoms).all(|(p, q)| {
                (p.x.clone() - &q.x).abs() <= scaled_tol(tol, &[&p.x, &q.x])
                    && (p.w.clone() - &q.w).abs() <= *tol
            })
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DiscreteMeasure<U> {
        DiscreteMeasure::new(self.atoms.iter().map(|a| (f(&a.x), f(&a.w))))
            .expect("mapped weights stay non-negative")
    }

    pub fn to_f64(&self) -> DiscreteMeasure<f64> {
        self.map_scalar(|v| v.to_f64())
    }
}

/// Sorted union of the atom positions of two measures.
pub fn merged_positions<T: Scalar>(a: &DiscreteMeasure<T>, b: &DiscreteMeasure<T>) -> Vec<T> {
    let mut out: Vec<T> = a.positions();
    out.extend(b.positions());
    out.sort_by(|p, q| p.partial_cmp(q).unwrap_or(Ordering::Equal));
    out.dedup();
    out
}

pub fn convex_order<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> bool {
    convex_order_with(mu, nu, &Tolerances::default())
}

/// `μ ≤_c ν`: equal masses, equal first moments and `u_μ ≤ u_ν` at every
/// atom of either measure. Beyond the extreme atoms both potentials agree
/// with `k|x - m|` exactly, so the breakpoints decide.
pub fn convex_order_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> bool {
    let tol: T = tols.order();
    let mass_tol = scaled_tol(&tol, &[mu.total_mass(), nu.total_mass()]);
    if (mu.total_mass().clone() - nu.total_mass()).abs() > mass_tol {
        return false;
    }
    let moment_tol = scaled_tol(&tol, &[mu.first_moment(), nu.first_moment()]);
    if (mu.first_moment().clone() - nu.first_moment()).abs() > moment_tol {
        return false;
    }
    let (pu, pv) = (mu.potential(), nu.potential());
    merged_positions(mu, nu).iter().all(|x| {
        let (a, b) = (pu.eval(x), pv.eval(x));
        a.clone() <= b.clone() + scaled_tol(&tol, &[&a, &b])
    })
}

pub fn extended_order<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> bool {
    extended_order_with(mu, nu, &Tolerances::default())
}

/// `μ ≤_E ν`: `∫f dμ ≤ ∫f dν` for every non-negative convex `f`.
///
/// On the finite set `U = supp μ ∪ supp ν` every non-negative convex function
/// coincides with a non-negative combination of the constant `1` and of the
/// hinges `(x - k)₊`, `(k - x)₊` with `k ∈ U` (split the piecewise-linear
/// interpolant at its minimum). So the mass inequality and the hinge
/// inequalities at `U` are necessary and sufficient.
pub fn extended_order_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> bool {
    let tol: T = tols.order();
    let mass_tol = scaled_tol(&tol, &[mu.total_mass(), nu.total_mass()]);
    if *mu.total_mass() > nu.total_mass().clone() + mass_tol {
        return false;
    }
    let (hu, hv) = (HingeIntegrals::new(mu), HingeIntegrals::new(nu));
    merged_positions(mu, nu).iter().all(|k| {
        let (cu, pu) = hu.at(k);
        let (cv, pv) = hv.at(k);
        cu.clone() <= cv.clone() + scaled_tol(&tol, &[&cu, &cv])
            && pu.clone() <= pv.clone() + scaled_tol(&tol, &[&pu, &pv])
    })
}

/// Evaluates `(∫(x-k)₊ dμ, ∫(k-x)₊ dμ)` through the potential:
/// their sum is `u(k)` and their difference is `M₁ - k·M₀`.
pub(crate) struct HingeIntegrals<T> {
    potential: PotentialFunction<T>,
    mass: T,
    moment: T,
}

impl<T: Scalar> HingeIntegrals<T> {
    pub(crate) fn new(m: &DiscreteMeasure<T>) -> Self {
        Self {
            potential: m.potential(),
            mass: m.total_mass().clone(),
            moment: m.first_moment().clone(),
        }
    }

    pub(crate) fn at(&self, k: &T) -> (T, T) {
        let u = self.potential.eval(k);
        let linear = self.moment.clone() - self.mass.clone() * k;
        let two = T::from_i64(2);
        let call = (u.clone() + &linear) / &two;
        let put = (u - linear) / two;
        (call, put)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Wasserstein<T> {
    Finite(T),
    Infinite,
}

impl<T: Scalar> Wasserstein<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            Wasserstein::Finite(v) => Some(v),
            Wasserstein::Infinite => None,
        }
    }
}

/// Kantorovich distance `∫|F_μ - F_ν| dλ`; infinite when masses differ.
pub fn wasserstein1<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Wasserstein<T> {
    let tol = scaled_tol(&T::tol(Tolerances::default().order), &[mu.total_mass(), nu.total_mass()]);
    if (mu.total_mass().clone() - nu.total_mass()).abs() > tol {
        return Wasserstein::Infinite;
    }
    let grid = merged_positions(mu, nu);
    let (mut i, mut j) = (0, 0);
    let (mut fu, mut fv) = (T::zero(), T::zero());
    let mut total = T::zero();
    for (k, z) in grid.iter().enumerate() {
        while i < mu.len() && mu.atoms[i].x <= *z {
            fu += mu.atoms[i].w.clone();
            i += 1;
        }
        while j < nu.len() && nu.atoms[j].x <= *z {
            fv += nu.atoms[j].w.clone();
            j += 1;
        }
        if let Some(next) = grid.get(k + 1) {
            total += (fu.clone() - &fv).abs() * (next.clone() - z);
        }
    }
    Wasserstein::Finite(total)
}

/// Replaces the restriction of `γ` to every cell `]-∞,c₁], ]c₁,c₂], …, ]c_k,∞[`
/// by a single atom at its barycenter carrying its mass.
pub fn coarsen<T: Scalar>(gamma: &DiscreteMeasure<T>, cuts: &[T]) -> Result<DiscreteMeasure<T>> {
    if cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MotError::Domain("cuts must be strictly increasing".into()));
    }
    let mut pairs = Vec::new();
    let mut cell = 0;
    let (mut mass, mut moment) = (T::zero(), T::zero());
    for a in gamma.atoms() {
        while cell < cuts.len() && a.x > cuts[cell] {
            if !mass.is_zero() {
                pairs.push((moment.clone() / &mass, mass.clone()));
            }
            mass = T::zero();
            moment = T::zero();
            cell += 1;
        }
        mass += a.w.clone();
        moment += a.w.clone() * &a.x;
    }
    if !mass.is_zero() {
        pairs.push((moment / &mass, mass));
    }
    DiscreteMeasure::new(pairs)
}

/// Pointwise minimum `μ ∧ ν` of the atom masses.
pub fn min_measure<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> DiscreteMeasure<T> {
    let atoms = mu
        .atoms()
        .iter()
        .filter_map(|a| {
            let w = nu.mass_at(&a.x);
            if w.is_zero() {
                None
            } else {
                Some(Atom {
                    x: a.x.clone(),
                    w: T::min_of(a.w.clone(), w),
                })
            }
        })
        .collect();
    DiscreteMeasure::from_sorted(atoms)
}
