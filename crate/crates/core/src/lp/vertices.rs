//! Exhaustive vertex enumeration of small martingale transport polytopes.

use crate::curtain::Coupling;
use crate::error::{MotError, Result};
use crate::measures::DiscreteMeasure;
use crate::scalar::Scalar;

use super::transport::TransportLp;

/// Grid size `n·m` above which enumeration is refused.
pub const MAX_GRID: usize = 16;

/// Reduces `a` (rows × cols, row-major) in place; returns the pivot columns.
fn row_reduce<T: Scalar>(a: &mut [Vec<T>], cols: usize, tol: &T) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for c in 0..cols {
        if row == a.len() {
            break;
        }
        let Some(p) = (row..a.len())
            .filter(|&i| a[i][c].abs() > *tol)
            .max_by(|&i, &k| a[i][c].abs().partial_cmp(&a[k][c].abs()).unwrap_or(std::cmp::Ordering::Equal))
        else {
            continue;
        };
        a.swap(row, p);
        let piv = a[row][c].clone();
        for v in a[row].iter_mut() {
            *v = v.clone() / &piv;
        }
        for i in 0..a.len() {
            if i != row && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for k in 0..a[i].len() {
                    let d = f.clone() * &a[row][k];
                    a[i][k] -= d;
                }
            }
        }
        pivots.push(c);
        row += 1;
    }
    pivots
}

/// Rank of a dense matrix.
pub fn rank<T: Scalar>(a: &[Vec<T>]) -> usize {
    let cols = a.first().map_or(0, |r| r.len());
    let mut m = a.to_vec();
    row_reduce(&mut m, cols, &T::tol(1e-12)).len()
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All basic feasible solutions of the martingale transport polytope,
/// found by solving every square subsystem of full rank.
pub fn martingale_vertices<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<Vec<Coupling<T>>> {
    let (n, m) = (mu.len(), nu.len());
    if n * m > MAX_GRID {
        return Err(MotError::Domain(format!("grid {n}×{m} too large for enumeration")));
    }
    let zero = vec![vec![T::zero(); m]; n];
    let tlp = TransportLp::martingale(mu, nu, &zero);
    let lp = tlp.lp();
    let rows = lp.num_rows();
    let vars = n * m;
    let mut dense = vec![vec![T::zero(); vars]; rows];
    for j in 0..vars {
        for (i, v) in lp.column(j) {
            dense[*i][j] = v.clone();
        }
    }
    let r = rank(&dense);
    let tol = T::tol(1e-12);
    let mut found: Vec<Vec<T>> = Vec::new();
    if r == 0 {
        return Ok(Vec::new());
    }
    let mut comb: Vec<usize> = (0..r).collect();
    loop {
        let mut sys: Vec<Vec<T>> = (0..rows)
            .map(|i| {
                let mut row: Vec<T> = comb.iter().map(|&j| dense[i][j].clone()).collect();
                row.push(lp.rhs()[i].clone());
                row
            })
            .collect();
        let piv = row_reduce(&mut sys, r, &tol);
        if piv.len() == r {
            let mut x = vec![T::zero(); vars];
            let mut ok = true;
            for (k, &j) in comb.iter().enumerate() {
                let v = sys[k][r].clone();
                if v < -tol.clone() {
                    ok = false;
                    break;
                }
                x[j] = T::max_of(v, T::zero());
            }
            let consistent = sys[r..].iter().all(|row| row[r].abs() <= tol);
            if ok && consistent && !found.iter().any(|f| same(f, &x, &tol)) {
                found.push(x);
            }
        }
        if !next_combination(&mut comb, vars) {
            break;
        }
    }
    Ok(found.iter().map(|x| tlp.plan(x, &T::zero())).collect())
}

fn same<T: Scalar>(a: &[T], b: &[T], tol: &T) -> bool {
    a.iter().zip(b).all(|(u, v)| (u.clone() - v).abs() <= *tol)
}
