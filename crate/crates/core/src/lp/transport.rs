use crate::curtain::Coupling;
use crate::measures::DiscreteMeasure;
use crate::scalar::Scalar;

use super::simplex::{LinearProgram, LpSolution};

/// Transport LP on a grid `rows × columns` with optional barycenter rows.
///
/// Constraint rows are laid out as: row masses (`n`), column masses (`m`),
/// then one barycenter row per source row when present. Variable `i·m + j`
/// is the mass sent from row `i` to column `j`; column slacks (for `≤ ν`
/// embeddings) follow the plan variables.
#[derive(Clone, Debug)]
pub struct TransportLp<T> {
    lp: LinearProgram<T>,
    source: DiscreteMeasure<T>,
    target: DiscreteMeasure<T>,
    centers: Option<Vec<T>>,
    column_slack: bool,
}

impl<T: Scalar> TransportLp<T> {
    fn build(
        source: &DiscreteMeasure<T>,
        target: &DiscreteMeasure<T>,
        centers: Option<Vec<T>>,
        column_slack: bool,
        cost: &[Vec<T>],
    ) -> Self {
        let n = source.len();
        let m = target.len();
        assert_eq!(cost.len(), n, "cost matrix rows");
        let mut rhs: Vec<T> = source.weights();
        rhs.extend(target.weights());
        if centers.is_some() {
            rhs.extend((0..n).map(|_| T::zero()));
        }
        let mut lp = LinearProgram::new(rhs);
        let ys = target.positions();
        for i in 0..n {
            assert_eq!(cost[i].len(), m, "cost matrix columns");
            for j in 0..m {
                let mut e = vec![(i, T::one()), (n + j, T::one())];
                if let Some(c) = &centers {
                    e.push((n + m + i, ys[j].clone() - &c[i]));
                }
                lp.add_column(e, cost[i][j].clone());
            }
        }
        if column_slack {
            for j in 0..m {
                lp.add_column(vec![(n + j, T::one())], T::zero());
            }
        }
        Self {
            lp,
            source: source.clone(),
            target: target.clone(),
            centers,
            column_slack,
        }
    }

    /// Martingale transport: marginals `μ`, `ν` and `∫ y dπ_x = x`.
    pub fn martingale(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, cost: &[Vec<T>]) -> Self {
        Self::build(mu, nu, Some(mu.positions()), false, cost)
    }

    /// Classical transport with marginals `μ`, `ν`.
    pub fn classical(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, cost: &[Vec<T>]) -> Self {
        Self::build(mu, nu, None, false, cost)
    }

    /// Martingale plans from `μ` into measures `θ ≤ ν`.
    pub fn embedding(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, cost: &[Vec<T>]) -> Self {
        Self::build(mu, nu, Some(mu.positions()), true, cost)
    }

    /// Plans with the given marginals whose row `i` has barycenter `centers[i]`.
    pub fn with_centers(
        source: &DiscreteMeasure<T>,
        target: &DiscreteMeasure<T>,
        centers: Vec<T>,
        cost: &[Vec<T>],
    ) -> Self {
        assert_eq!(centers.len(), source.len());
        Self::build(source, target, Some(centers), false, cost)
    }

    pub fn lp(&self) -> &LinearProgram<T> {
        &self.lp
    }

    pub fn lp_mut(&mut self) -> &mut LinearProgram<T> {
        &mut self.lp
    }

    pub fn source(&self) -> &DiscreteMeasure<T> {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure<T> {
        &self.target
    }

    pub fn plan_vars(&self) -> usize {
        self.source.len() * self.target.len()
    }

    pub fn var(&self, i: usize, j: usize) -> usize {
        i * self.target.len() + j
    }

    /// Adds the constraint `π(xᵢ, yⱼ) = value`.
    pub fn fix_entry(&mut self, i: usize, j: usize, value: T) {
        let k = self.var(i, j);
        self.lp.add_row(&[(k, T::one())], value);
    }

    /// Plan variables with their costs, for adding a cost-level constraint.
    pub fn cost_row(&self) -> Vec<(usize, T)> {
        (0..self.plan_vars()).map(|k| (k, self.lp.cost()[k].clone())).collect()
    }

    /// Plan read off a solution vector; entries at or below `prune` are dropped.
    pub fn plan(&self, x: &[T], prune: &T) -> Coupling<T> {
        let m = self.target.len();
        let ys = self.target.positions();
        let rows = (0..self.source.len())
            .map(|i| {
                (0..m)
                    .filter(|&j| x[i * m + j] > *prune)
                    .map(|j| (ys[j].clone(), x[i * m + j].clone()))
                    .collect()
            })
            .collect();
        let target = if self.column_slack {
            self.used_target(x)
        } else {
            self.target.clone()
        };
        Coupling::from_rows(self.source.clone(), target, rows).expect("nonnegative plan")
    }

    /// Column sums of the plan part of `x`.
    pub fn used_target(&self, x: &[T]) -> DiscreteMeasure<T> {
        let (n, m) = (self.source.len(), self.target.len());
        let pairs = self.target.atoms().iter().enumerate().map(|(j, a)| {
            let mut s = T::zero();
            for i in 0..n {
                s += x[i * m + j].clone();
            }
            (a.x.clone(), T::max_of(s, T::zero()))
        });
        DiscreteMeasure::new(pairs).expect("nonnegative masses")
    }

    /// Plan variables carrying mass in `pi`, for a crash start.
    pub fn warm_columns(&self, pi: &Coupling<T>) -> Vec<usize> {
        let mut cols = Vec::new();
        for (k, row) in pi.rows().iter().enumerate() {
            let Some(i) = self.source.index_of(pi.x(k)) else { continue };
            for (y, w) in row {
                if let (Some(j), true) = (self.target.index_of(y), w.is_positive()) {
                    cols.push(self.var(i, j));
                }
            }
        }
        cols
    }

    pub fn dual_certificate(&self, sol: &LpSolution<T>) -> DualCertificate<T> {
        let (n, m) = (self.source.len(), self.target.len());
        let phi = sol.duals[..n].to_vec();
        let psi = sol.duals[n..n + m].to_vec();
        let delta = if self.centers.is_some() {
            sol.duals[n + m..2 * n + m].to_vec()
        } else {
            Vec::new()
        };
        let mut dual_value = T::zero();
        for (f, a) in phi.iter().zip(self.source.atoms()) {
            dual_value += f.clone() * &a.w;
        }
        for (g, a) in psi.iter().zip(self.target.atoms()) {
            dual_value += g.clone() * &a.w;
        }
        DualCertificate {
            gap: sol.value.clone() - &dual_value,
            dual_value,
            phi,
            psi,
            delta,
        }
    }
}

/// Dual solution `(φ, ψ, Δ)`: `c(x, y) ≥ φ(x) + ψ(y) + Δ(x)(y - x)` with
/// `∫φ dμ + ∫ψ dν` equal to the primal value at optimality. `Δ` is empty for
/// classical transport.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate<T> {
    pub phi: Vec<T>,
    pub psi: Vec<T>,
    pub delta: Vec<T>,
    pub dual_value: T,
    /// Primal value minus dual value.
    pub gap: T,
}

impl<T: Scalar> DualCertificate<T> {
    /// `c(x_i, y_j) - φ_i - ψ_j - Δ_i(y_j - x_i)` on the grid; nonnegative
    /// for a feasible dual.
    pub fn reduced_costs(&self, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, cost: &[Vec<T>]) -> Vec<Vec<T>> {
        mu.atoms()
            .iter()
            .enumerate()
            .map(|(i, a)| {
                nu.atoms()
                    .iter()
                    .enumerate()
                    .map(|(j, b)| {
                        let mut s = cost[i][j].clone() - &self.phi[i] - &self.psi[j];
                        if !self.delta.is_empty() {
                            s -= self.delta[i].clone() * (b.x.clone() - &a.x);
                        }
                        s
                    })
                    .collect()
            })
            .collect()
    }

    /// Smallest reduced cost over the grid.
    pub fn min_slack(&self, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>, cost: &[Vec<T>]) -> T {
        self.reduced_costs(mu, nu, cost)
            .into_iter()
            .flatten()
            .reduce(T::min_of)
            .unwrap_or_else(T::zero)
    }
}
