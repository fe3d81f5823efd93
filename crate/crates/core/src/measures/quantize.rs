//! Discretizations of continuous laws: equal-mass Gaussian quantization and
//! the mean-preserving projection onto a grid.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::erfc;

use super::{Atom, DiscreteMeasure};
use crate::error::{MotError, Result};
use crate::scalar::Scalar;

// Acklam's rational approximation of the standard normal quantile
// (relative error below 1.15e-9), followed by one Halley step.
const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// Standard normal quantile `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// `E|X - x|` for `X ~ N(mean, sd²)`.
pub fn gaussian_potential(mean: f64, sd: f64, x: f64) -> f64 {
    let z = (x - mean) / sd;
    sd * (2.0 * normal_pdf(z) + z * (2.0 * normal_cdf(z) - 1.0))
}

/// `n` atoms of mass `1/n` at the conditional means of `N(mean, sd²)` on
/// the quantile cells `((i-1)/n, i/n]`.
///
/// The conditional mean of a standard normal on `(a, b)` is
/// `(φ(a) - φ(b)) / (Φ(b) - Φ(a))`; the cells are mirrored so that the
/// quantization is symmetric about `mean`.
pub fn gaussian_quantize<T: Scalar>(mean: f64, sd: f64, n: usize) -> Result<DiscreteMeasure<T>> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(MotError::Domain(format!("standard deviation must be positive, got {sd}")));
    }
    if n == 0 {
        return Err(MotError::Domain("atom count must be at least 1".into()));
    }
    // z[i] = Φ⁻¹(i/n) for i in 0..=n, with infinite end points.
    let mut z = vec![0.0; n + 1];
    z[0] = f64::NEG_INFINITY;
    z[n] = f64::INFINITY;
    for i in 1..n {
        if 2 * i < n {
            z[i] = normal_quantile(i as f64 / n as f64);
        } else if 2 * i == n {
            z[i] = 0.0;
        }
    }
    for i in 1..n {
        if 2 * i > n {
            z[i] = -z[n - i];
        }
    }
    let phi = |t: f64| if t.is_finite() { normal_pdf(t) } else { 0.0 };
    let mut offsets = vec![0.0; n];
    for i in 0..n {
        if 2 * i + 1 < n {
            offsets[i] = n as f64 * (phi(z[i]) - phi(z[i + 1]));
        } else if 2 * i + 1 == n {
            offsets[i] = 0.0;
        }
    }
    for i in 0..n {
        if 2 * i + 1 > n {
            offsets[i] = -offsets[n - 1 - i];
        }
    }
    let w = T::from_ratio(1, n as i64);
    DiscreteMeasure::new(
        offsets
            .into_iter()
            .map(|o| (T::from_f64(mean + sd * o), w.clone())),
    )
}

/// `n` equally spaced points from `lo` to `hi` (inclusive).
pub fn uniform_grid<T: Scalar>(lo: &T, hi: &T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo.clone()];
    }
    let step = (hi.clone() - lo) / T::from_i64(n as i64 - 1);
    let mut grid: Vec<T> = (0..n - 1)
        .map(|k| lo.clone() + step.clone() * T::from_i64(k as i64))
        .collect();
    // The last point is `hi` itself, not `lo + (n-1)·step` after round-off.
    grid.push(hi.clone());
    grid
}

/// Mean-preserving projection onto a grid: an atom between two consecutive
/// grid points is split between them in proportion to the distances.
///
/// The projection is a martingale kernel whose action on convex functions is
/// piecewise-linear interpolation, so it preserves the convex order of pairs
/// and yields a measure larger in convex order than the input.
pub fn grid_projection<T: Scalar>(gamma: &DiscreteMeasure<T>, grid: &[T]) -> Result<DiscreteMeasure<T>> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(MotError::Domain("grid must be non-empty and strictly increasing".into()));
    }
    let (lo, hi) = (&grid[0], &grid[grid.len() - 1]);
    let mut pairs = Vec::with_capacity(2 * gamma.len());
    let mut k = 0;
    for Atom { x, w } in gamma.atoms() {
        if x < lo || x > hi {
            return Err(MotError::Domain(format!("atom {x} outside the grid range")));
        }
        while k + 1 < grid.len() && grid[k + 1] < *x {
            k += 1;
        }
        if grid[k] == *x || k + 1 == grid.len() {
            pairs.push((grid[k].clone(), w.clone()));
            continue;
        }
        let (g0, g1) = (&grid[k], &grid[k + 1]);
        if *g1 == *x {
            pairs.push((g1.clone(), w.clone()));
            continue;
        }
        let right = w.clone() * (x.clone() - g0) / (g1.clone() - g0);
        pairs.push((g0.clone(), w.clone() - &right));
        pairs.push((g1.clone(), right));
    }
    DiscreteMeasure::new(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::convex_order;
    use statrs::distribution::{ContinuousCDF, Normal};

    #[test]
    fn quantile_matches_reference_inverse() {
        let n = Normal::new(0.0, 1.0).unwrap();
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((normal_quantile(p) - n.inverse_cdf(p)).abs() < 1e-9, "p = {p}");
        }
        for p in [1e-12, 1e-6, 0.01, 0.99, 1.0 - 1e-9] {
            assert!((normal_quantile(p) - n.inverse_cdf(p)).abs() < 1e-8 * (1.0 + n.inverse_cdf(p).abs()));
        }
    }

    #[test]
    fn quantize_small_cases() {
        let m: DiscreteMeasure<f64> = gaussian_quantize(1.5, 2.0, 1).unwrap();
        assert_eq!(m.atoms(), &[Atom { x: 1.5, w: 1.0 }]);
        let m: DiscreteMeasure<f64> = gaussian_quantize(0.0, 1.0, 2).unwrap();
        let h = (2.0 / PI).sqrt();
        assert!((m.atoms()[0].x + h).abs() < 1e-14);
        assert!((m.atoms()[1].x - h).abs() < 1e-14);
        assert!(gaussian_quantize::<f64>(0.0, 0.0, 3).is_err());
        assert!(gaussian_quantize::<f64>(0.0, -1.0, 3).is_err());
    }

    #[test]
    fn quantize_conserves_mass_and_mean() {
        for n in [3, 10, 57, 200] {
            let m: DiscreteMeasure<f64> = gaussian_quantize(0.7, 1.3, n).unwrap();
            assert_eq!(m.len(), n);
            assert!((m.total_mass() - 1.0).abs() < 1e-12);
            assert!((m.mean().unwrap() - 0.7).abs() < 1e-10);
        }
    }

    #[test]
    fn quantized_potential_below_gaussian() {
        for n in [2, 5, 40, 300] {
            let m: DiscreteMeasure<f64> = gaussian_quantize(-0.3, 0.8, n).unwrap();
            let p = m.potential();
            for a in m.atoms() {
                assert!(p.eval(&a.x) <= gaussian_potential(-0.3, 0.8, a.x) + 1e-12);
            }
        }
    }

    #[test]
    fn dilated_quantizations_are_in_convex_order() {
        let mu: DiscreteMeasure<f64> = gaussian_quantize(0.0, 1.0, 50).unwrap();
        let nu: DiscreteMeasure<f64> = gaussian_quantize(0.0, 2.0, 50).unwrap();
        assert!(convex_order(&mu, &nu));
        assert!(!convex_order(&nu, &mu));
    }

    #[test]
    fn grid_projection_preserves_mass_and_mean() {
        let m = DiscreteMeasure::new(vec![(-0.7, 0.25), (0.1, 0.5), (1.0, 0.25)]).unwrap();
        let grid = uniform_grid(&-1.0, &1.0, 5);
        let p = grid_projection(&m, &grid).unwrap();
        assert!((p.total_mass() - 1.0).abs() < 1e-15);
        assert!((p.first_moment() - m.first_moment()).abs() < 1e-15);
        assert!(convex_order(&m, &p));
        assert!(grid_projection(&m, &uniform_grid(&0.0, &1.0, 3)).is_err());
    }
}
