use std::cmp::Ordering;

use super::DiscreteMeasure;
use crate::scalar::Scalar;

/// Piecewise-linear convex function `u(x) = ∫|y - x| dμ(y)`.
///
/// Kinks sit at the atoms; the slope jumps by `2·μ({x})` there and equals
/// `∓mass` beyond the extreme atoms, where `u(x) = mass·|x - mean|`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialFunction<T> {
    breakpoints: Vec<T>,
    values: Vec<T>,
    mass: T,
    mean: T,
}

impl<T: Scalar> PotentialFunction<T> {
    pub fn from_measure(m: &DiscreteMeasure<T>) -> Self {
        let atoms = m.atoms();
        let total_mass = m.total_mass().clone();
        let total_moment = m.first_moment().clone();
        let mut left_mass = T::zero();
        let mut left_moment = T::zero();
        let mut values = Vec::with_capacity(atoms.len());
        for a in atoms {
            let right_mass = total_mass.clone() - &left_mass - &a.w;
            let right_moment = total_moment.clone() - &left_moment - a.w.clone() * &a.x;
            let u = a.x.clone() * &left_mass - &left_moment + right_moment - a.x.clone() * &right_mass;
            values.push(u);
            left_mass += a.w.clone();
            left_moment += a.w.clone() * &a.x;
        }
        Self {
            breakpoints: m.positions(),
            values,
            mean: m.mean().unwrap_or_else(T::zero),
            mass: total_mass,
        }
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn asymptotic_mass(&self) -> &T {
        &self.mass
    }

    pub fn asymptotic_mean(&self) -> &T {
        &self.mean
    }

    pub fn eval(&self, x: &T) -> T {
        let n = self.breakpoints.len();
        if n == 0 {
            return T::zero();
        }
        if *x <= self.breakpoints[0] {
            return self.values[0].clone() + self.mass.clone() * (self.breakpoints[0].clone() - x);
        }
        if *x >= self.breakpoints[n - 1] {
            return self.values[n - 1].clone() + self.mass.clone() * (x.clone() - &self.breakpoints[n - 1]);
        }
        let hi = match self
            .breakpoints
            .binary_search_by(|b| b.partial_cmp(x).unwrap_or(Ordering::Equal))
        {
            Ok(i) => return self.values[i].clone(),
            Err(i) => i,
        };
        let lo = hi - 1;
        let (x0, x1) = (&self.breakpoints[lo], &self.breakpoints[hi]);
        let (v0, v1) = (&self.values[lo], &self.values[hi]);
        v0.clone() + (v1.clone() - v0) * (x.clone() - x0) / (x1.clone() - x0)
    }

    /// Slopes of the linear pieces, including the two unbounded ones.
    pub fn slopes(&self) -> Vec<T> {
        let mut out = vec![-self.mass.clone()];
        for i in 1..self.breakpoints.len() {
            out.push(
                (self.values[i].clone() - &self.values[i - 1])
                    / (self.breakpoints[i].clone() - &self.breakpoints[i - 1]),
            );
        }
        out.push(self.mass.clone());
        out
    }
}
