use std::cmp::Ordering;

use crate::error::{MotError, Result};
use crate::measures::{Atom, DiscreteMeasure};
use crate::scalar::{scaled_tol, Scalar};
use crate::tolerance::Tolerances;

/// Transport plan between two finitely supported measures, stored row by row.
///
/// Row `i` holds the conditional mass sent from the `i`-th source atom, as
/// `(y, mass)` pairs sorted by `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling<T> {
    source: DiscreteMeasure<T>,
    target: DiscreteMeasure<T>,
    rows: Vec<Vec<(T, T)>>,
}

fn cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

fn normalize_row<T: Scalar>(mut row: Vec<(T, T)>) -> Vec<(T, T)> {
    row.sort_by(|a, b| cmp(&a.0, &b.0));
    let mut out: Vec<(T, T)> = Vec::with_capacity(row.len());
    for (y, w) in row {
        if w.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.0 == y => last.1 += w,
            _ => out.push((y, w)),
        }
    }
    out
}

impl<T: Scalar> Coupling<T> {
    /// Builds a plan from one row per source atom. Entries are sorted, merged
    /// and zero masses dropped; marginal consistency is checked by
    /// [`Coupling::validate`], not here.
    pub fn from_rows(source: DiscreteMeasure<T>, target: DiscreteMeasure<T>, rows: Vec<Vec<(T, T)>>) -> Result<Self> {
        if rows.len() != source.len() {
            return Err(MotError::InvalidCoupling(format!(
                "{} rows for {} source atoms",
                rows.len(),
                source.len()
            )));
        }
        for row in &rows {
            for (y, w) in row {
                if w.is_negative() {
                    return Err(MotError::InvalidCoupling(format!("negative mass {w} at y = {y}")));
                }
            }
        }
        Ok(Self {
            source,
            target,
            rows: rows.into_iter().map(normalize_row).collect(),
        })
    }

    /// Builds a plan from `(x, y, w)` triples; the marginals are the projections.
    pub fn from_entries(entries: impl IntoIterator<Item = (T, T, T)>) -> Result<Self> {
        let mut entries: Vec<(T, T, T)> = entries.into_iter().collect();
        if entries.iter().any(|e| e.2.is_negative()) {
            return Err(MotError::InvalidCoupling("negative mass".into()));
        }
        entries.retain(|e| !e.2.is_zero());
        entries.sort_by(|a, b| cmp(&a.0, &b.0).then_with(|| cmp(&a.1, &b.1)));
        let source = DiscreteMeasure::new(entries.iter().map(|e| (e.0.clone(), e.2.clone())))?;
        let target = DiscreteMeasure::new(entries.iter().map(|e| (e.1.clone(), e.2.clone())))?;
        let mut rows = vec![Vec::new(); source.len()];
        let mut i = 0;
        for (x, y, w) in entries {
            while source.atoms()[i].x != x {
                i += 1;
            }
            rows[i].push((y, w));
        }
        Self::from_rows(source, target, rows)
    }

    /// Plan with every source atom kept in place.
    pub fn identity(m: &DiscreteMeasure<T>) -> Self {
        let rows = m.atoms().iter().map(|a| vec![(a.x.clone(), a.w.clone())]).collect();
        Self {
            source: m.clone(),
            target: m.clone(),
            rows,
        }
    }

    pub fn source(&self) -> &DiscreteMeasure<T> {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure<T> {
        &self.target
    }

    pub fn rows(&self) -> &[Vec<(T, T)>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[(T, T)] {
        &self.rows[i]
    }

    pub fn x(&self, i: usize) -> &T {
        &self.source.atoms()[i].x
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn entries(&self) -> Vec<(T, T, T)> {
        let mut out = Vec::new();
        for (a, row) in self.source.atoms().iter().zip(&self.rows) {
            for (y, w) in row {
                out.push((a.x.clone(), y.clone(), w.clone()));
            }
        }
        out
    }

    pub fn total_mass(&self) -> T {
        let mut s = T::zero();
        for row in &self.rows {
            for (_, w) in row {
                s += w.clone();
            }
        }
        s
    }

    /// `∫ c dπ` for a cost given on positions.
    pub fn total_cost(&self, c: impl Fn(&T, &T) -> T) -> T {
        let mut s = T::zero();
        for (a, row) in self.source.atoms().iter().zip(&self.rows) {
            for (y, w) in row {
                s += w.clone() * c(&a.x, y);
            }
        }
        s
    }

    /// `∫ c dπ` for a cost given on atom indices `(i, j)` of source and target.
    pub fn total_cost_indexed(&self, c: impl Fn(usize, usize) -> T) -> Result<T> {
        let mut s = T::zero();
        for (i, row) in self.rows.iter().enumerate() {
            for (y, w) in row {
                let j = self
                    .target
                    .index_of(y)
                    .ok_or_else(|| MotError::InvalidCoupling(format!("y = {y} is not a target atom")))?;
                s += w.clone() * c(i, j);
            }
        }
        Ok(s)
    }

    /// Mass of row `i`.
    pub fn row_mass(&self, i: usize) -> T {
        let mut s = T::zero();
        for (_, w) in &self.rows[i] {
            s += w.clone();
        }
        s
    }

    /// Barycenter of row `i`, if the row carries mass.
    pub fn row_mean(&self, i: usize) -> Option<T> {
        let m = self.row_mass(i);
        if m.is_zero() {
            return None;
        }
        let mut s = T::zero();
        for (y, w) in &self.rows[i] {
            s += w.clone() * y;
        }
        Some(s / m)
    }

    /// Projection of the plan on the second coordinate.
    pub fn target_marginal(&self) -> DiscreteMeasure<T> {
        self.projection(|_| true)
    }

    fn projection(&self, keep: impl Fn(&T) -> bool) -> DiscreteMeasure<T> {
        let mut pairs = Vec::new();
        for (a, row) in self.source.atoms().iter().zip(&self.rows) {
            if keep(&a.x) {
                pairs.extend(row.iter().cloned());
            }
        }
        DiscreteMeasure::new(pairs).expect("plan masses are nonnegative")
    }

    /// Target mass transported from source atoms `x ≤ t`.
    pub fn prefix_target(&self, t: &T) -> DiscreteMeasure<T> {
        self.projection(|x| x <= t)
    }

    /// Largest row-sum, column-sum and row martingale residuals.
    pub fn residuals(&self) -> Residuals<T> {
        let mut row = T::zero();
        let mut martingale = T::zero();
        for (i, a) in self.source.atoms().iter().enumerate() {
            let mut mass = T::zero();
            let mut moment = T::zero();
            for (y, w) in &self.rows[i] {
                mass += w.clone();
                moment += w.clone() * (y.clone() - &a.x);
            }
            row = T::max_of(row, (mass - &a.w).abs());
            martingale = T::max_of(martingale, moment.abs());
        }
        let proj = self.target_marginal();
        let mut column = T::zero();
        let (p, t) = (proj.atoms(), self.target.atoms());
        let (mut i, mut j) = (0, 0);
        while i < p.len() || j < t.len() {
            let d = if j == t.len() || (i < p.len() && p[i].x < t[j].x) {
                i += 1;
                p[i - 1].w.clone()
            } else if i == p.len() || t[j].x < p[i].x {
                j += 1;
                t[j - 1].w.clone()
            } else {
                i += 1;
                j += 1;
                p[i - 1].w.clone() - &t[j - 1].w
            };
            column = T::max_of(column, d.abs());
        }
        Residuals { row, column, martingale }
    }

    /// Scale used for relative tolerances: largest position or mass magnitude.
    pub fn scale(&self) -> T {
        let mut s = T::one();
        for m in [&self.source, &self.target] {
            for a in m.atoms() {
                s = T::max_of(s, a.x.abs());
            }
            s = T::max_of(s, m.total_mass().clone());
        }
        s
    }

    /// Checks the plan marginals against its source and target.
    pub fn validate_transport(&self, tols: &Tolerances) -> Result<()> {
        let r = self.residuals();
        let tol = scaled_tol(&tols.feas::<T>(), &[&self.scale()]);
        if r.row > tol {
            return Err(MotError::InvalidCoupling(format!("row sums off by {}", r.row)));
        }
        if r.column > tol {
            return Err(MotError::InvalidCoupling(format!("column sums off by {}", r.column)));
        }
        Ok(())
    }

    /// Checks marginals and the martingale constraint of every row.
    pub fn validate(&self, tols: &Tolerances) -> Result<()> {
        self.validate_transport(tols)?;
        let r = self.residuals();
        let s = self.scale();
        let tol = scaled_tol(&tols.feas::<T>(), &[&(s.clone() * &s)]);
        if r.martingale > tol {
            return Err(MotError::InvalidCoupling(format!("martingale residual {}", r.martingale)));
        }
        Ok(())
    }

    /// Drops entries with mass at or below `threshold`.
    pub fn prune(&self, threshold: &T) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().filter(|(_, w)| w > threshold).cloned().collect())
            .collect();
        Self {
            source: self.source.clone(),
            target: self.target.clone(),
            rows,
        }
    }

    /// Same source positions and entrywise masses within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: &T) -> bool {
        if self.source.len() != other.source.len() {
            return false;
        }
        for i in 0..self.len() {
            if self.x(i) != other.x(i) {
                return false;
            }
            let (a, b) = (&self.rows[i], &other.rows[i]);
            let (mut p, mut q) = (0, 0);
            while p < a.len() || q < b.len() {
                let d = if q == b.len() || (p < a.len() && a[p].0 < b[q].0) {
                    p += 1;
                    a[p - 1].1.clone()
                } else if p == a.len() || b[q].0 < a[p].0 {
                    q += 1;
                    b[q - 1].1.clone()
                } else {
                    p += 1;
                    q += 1;
                    a[p - 1].1.clone() - &b[q - 1].1
                };
                if d.abs() > *tol {
                    return false;
                }
            }
        }
        true
    }

    /// Mirror image under `x ↦ -x`, `y ↦ -y`.
    pub fn reflect(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .rev()
            .map(|r| r.iter().rev().map(|(y, w)| (-y.clone(), w.clone())).collect())
            .collect();
        Self {
            source: self.source.reflect(),
            target: self.target.reflect(),
            rows,
        }
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Coupling<U> {
        Coupling {
            source: self.source.map_scalar(&f),
            target: self.target.map_scalar(&f),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|(y, w)| (f(y), f(w))).collect())
                .collect(),
        }
    }

    pub fn to_f64(&self) -> Coupling<f64> {
        self.map_scalar(|v| v.to_f64())
    }

    /// Number of atoms above `threshold` in each row, and how many of those
    /// sit off the diagonal `y = x`.
    pub fn support_profile(&self, threshold: &T) -> SupportProfile<T> {
        let mut counts = Vec::with_capacity(self.len());
        let mut off_diagonal = Vec::with_capacity(self.len());
        for (a, row) in self.source.atoms().iter().zip(&self.rows) {
            let live = row.iter().filter(|(_, w)| w > threshold);
            let (mut c, mut off) = (0, 0);
            for (y, _) in live {
                c += 1;
                if *y != a.x {
                    off += 1;
                }
            }
            counts.push(c);
            off_diagonal.push(off);
        }
        SupportProfile {
            masses: self.source.weights(),
            counts,
            off_diagonal,
        }
    }

    /// Smallest and largest supported target of each row (`T₁`, `T₂`).
    pub fn row_maps(&self, threshold: &T) -> Vec<RowMap<T>> {
        self.source
            .atoms()
            .iter()
            .zip(&self.rows)
            .map(|(a, row)| {
                let live: Vec<&T> = row.iter().filter(|(_, w)| w > threshold).map(|(y, _)| y).collect();
                RowMap {
                    x: a.x.clone(),
                    mass: a.w.clone(),
                    count: live.len(),
                    t1: live.first().map(|y| (*y).clone()),
                    t2: if live.len() >= 2 {
                        live.last().map(|y| (*y).clone())
                    } else {
                        None
                    },
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Residuals<T> {
    pub row: T,
    pub column: T,
    pub martingale: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportProfile<T> {
    /// Source mass of each row.
    pub masses: Vec<T>,
    pub counts: Vec<usize>,
    pub off_diagonal: Vec<usize>,
}

impl<T: Scalar> SupportProfile<T> {
    /// Fraction of source mass in rows with at most `k` atoms.
    pub fn mass_fraction_at_most(&self, k: usize) -> f64 {
        let mut total = 0.0;
        let mut good = 0.0;
        for (m, c) in self.masses.iter().zip(&self.counts) {
            let m = m.to_f64();
            total += m;
            if *c <= k {
                good += m;
            }
        }
        if total > 0.0 {
            good / total
        } else {
            1.0
        }
    }

    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Extreme supported targets of one row; `t2` is `None` for one-atom rows.
#[derive(Clone, Debug, PartialEq)]
pub struct RowMap<T> {
    pub x: T,
    pub mass: T,
    pub count: usize,
    pub t1: Option<T>,
    pub t2: Option<T>,
}

impl<T: Scalar> RowMap<T> {
    pub fn upper(&self) -> Option<&T> {
        self.t2.as_ref().or(self.t1.as_ref())
    }
}

/// Two source atoms `x < x′` and targets `y⁻ < y′ < y⁺`, with `y±` reached
/// from `x` and `y′` from `x′`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityWitness<T> {
    pub x: T,
    pub x_prime: T,
    pub y_minus: T,
    pub y_plus: T,
    pub y_prime: T,
}

/// Searches for a configuration that left-monotone plans exclude.
pub fn is_left_monotone<T: Scalar>(pi: &Coupling<T>, mass_threshold: &T) -> Option<MonotonicityWitness<T>> {
    let live: Vec<Vec<&T>> = pi
        .rows()
        .iter()
        .map(|r| r.iter().filter(|(_, w)| w > mass_threshold).map(|(y, _)| y).collect())
        .collect();
    for i in 0..live.len() {
        let (lo, hi) = match (live[i].first(), live[i].last()) {
            (Some(lo), Some(hi)) if lo < hi => (*lo, *hi),
            _ => continue,
        };
        for (k, row) in live.iter().enumerate().skip(i + 1) {
            let p = row.partition_point(|y| *y <= lo);
            if p < row.len() && row[p] < hi {
                return Some(MonotonicityWitness {
                    x: pi.x(i).clone(),
                    x_prime: pi.x(k).clone(),
                    y_minus: lo.clone(),
                    y_plus: hi.clone(),
                    y_prime: row[p].clone(),
                });
            }
        }
    }
    None
}

/// Same search on the mirrored plan: the configuration `x > x′`.
pub fn is_right_monotone<T: Scalar>(pi: &Coupling<T>, mass_threshold: &T) -> Option<MonotonicityWitness<T>> {
    is_left_monotone(&pi.reflect(), mass_threshold).map(|w| MonotonicityWitness {
        x: -w.x,
        x_prime: -w.x_prime,
        y_minus: -w.y_plus,
        y_plus: -w.y_minus,
        y_prime: -w.y_prime,
    })
}

/// `Atom` list of a row as a measure.
pub fn row_measure<T: Scalar>(row: &[(T, T)]) -> DiscreteMeasure<T> {
    DiscreteMeasure::from_sorted(row.iter().map(|(y, w)| Atom { x: y.clone(), w: w.clone() }).collect())
}
