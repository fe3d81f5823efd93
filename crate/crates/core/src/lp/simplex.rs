//! Revised primal simplex on `min cᵀx, Ax = b, x ≥ 0` with an explicit dense
//! basis inverse and sparse columns.
//!
//! Every row gets an artificial variable. Phase 1 minimises their sum, phase 2
//! the true objective; artificials still basic after phase 1 sit at zero and
//! are pivoted out as soon as an entering column touches their row. A list of
//! columns can be crashed into the initial basis to skip phase 1 entirely.

use std::cmp::Ordering;

use crate::error::{MotError, Result};
use crate::scalar::Scalar;

/// Equality-form linear program with column-sparse constraint matrix.
#[derive(Clone, Debug)]
pub struct LinearProgram<T> {
    rhs: Vec<T>,
    columns: Vec<Vec<(usize, T)>>,
    cost: Vec<T>,
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(rhs: Vec<T>) -> Self {
        Self {
            rhs,
            columns: Vec::new(),
            cost: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn num_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn rhs(&self) -> &[T] {
        &self.rhs
    }

    pub fn column(&self, j: usize) -> &[(usize, T)] {
        &self.columns[j]
    }

    pub fn cost(&self) -> &[T] {
        &self.cost
    }

    /// Appends a column; zero coefficients are dropped. Returns its index.
    pub fn add_column(&mut self, entries: Vec<(usize, T)>, cost: T) -> usize {
        debug_assert!(entries.iter().all(|(i, _)| *i < self.rhs.len()));
        self.columns.push(entries.into_iter().filter(|(_, v)| !v.is_zero()).collect());
        self.cost.push(cost);
        self.columns.len() - 1
    }

    /// Appends a constraint row `Σ coef·x_col = rhs`. Returns its index.
    pub fn add_row(&mut self, coefficients: &[(usize, T)], rhs: T) -> usize {
        let row = self.rhs.len();
        self.rhs.push(rhs);
        for (j, v) in coefficients {
            if !v.is_zero() {
                self.columns[*j].push((row, v.clone()));
            }
        }
        row
    }

    pub fn set_cost(&mut self, cost: Vec<T>) {
        assert_eq!(cost.len(), self.columns.len());
        self.cost = cost;
    }

    pub fn objective(&self, x: &[T]) -> T {
        let mut s = T::zero();
        for (c, v) in self.cost.iter().zip(x) {
            if !v.is_zero() {
                s += c.clone() * v;
            }
        }
        s
    }

    /// Largest violation of `Ax = b`.
    pub fn residual(&self, x: &[T]) -> T {
        let mut r: Vec<T> = self.rhs.iter().map(|b| -b.clone()).collect();
        for (col, v) in self.columns.iter().zip(x) {
            if v.is_zero() {
                continue;
            }
            for (i, a) in col {
                r[*i] += a.clone() * v;
            }
        }
        r.into_iter().fold(T::zero(), |m, v| T::max_of(m, v.abs()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering and leaving variables; never cycles.
    Bland,
    /// Most negative reduced cost, with a switch to Bland after a run of
    /// degenerate pivots.
    Dantzig,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    pub rule: PivotRule,
    /// Primal feasibility tolerance (float mode).
    pub feas_tol: f64,
    /// Smallest pivot magnitude accepted (float mode).
    pub pivot_tol: f64,
    /// Reduced-cost tolerance relative to the largest cost (float mode).
    pub opt_tol: f64,
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before Dantzig falls back to Bland.
    pub degenerate_switch: usize,
    /// Iterations between recomputations of duals and basic values.
    pub refresh_every: usize,
}

impl SimplexOptions {
    /// Bland's rule for exact arithmetic, Dantzig with fallback for floats.
    pub fn for_scalar<T: Scalar>() -> Self {
        Self {
            rule: if T::EXACT { PivotRule::Bland } else { PivotRule::Dantzig },
            feas_tol: 1e-9,
            pivot_tol: 1e-9,
            opt_tol: 1e-12,
            max_iterations: 1_000_000,
            degenerate_switch: 50,
            refresh_every: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution<T> {
    pub x: Vec<T>,
    pub value: T,
    /// One dual value per constraint row, for the original row signs.
    pub duals: Vec<T>,
    /// Basic variable per row; indices `≥ num_cols` are artificials.
    pub basis: Vec<usize>,
    pub iterations: usize,
    /// True when the crash basis was feasible and phase 1 was skipped.
    pub warm_started: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

struct Solver<'a, T> {
    lp: &'a LinearProgram<T>,
    opts: &'a SimplexOptions,
    m: usize,
    n: usize,
    sign: Vec<bool>,
    binv: Vec<T>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    xb: Vec<T>,
    y: Vec<T>,
    phase: Phase,
    iterations: usize,
    feas: T,
    pivot: T,
    opt: T,
}

impl<'a, T: Scalar> Solver<'a, T> {
    fn new(lp: &'a LinearProgram<T>, opts: &'a SimplexOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_cols();
        let sign: Vec<bool> = lp.rhs.iter().map(|b| b.is_negative()).collect();
        let cost_scale = lp.cost.iter().fold(T::one(), |s, c| T::max_of(s, c.abs()));
        let rhs_scale = lp.rhs.iter().fold(T::one(), |s, b| T::max_of(s, b.abs()));
        let mut s = Self {
            lp,
            opts,
            m,
            n,
            sign,
            binv: Vec::new(),
            basis: Vec::new(),
            is_basic: Vec::new(),
            xb: Vec::new(),
            y: Vec::new(),
            phase: Phase::One,
            iterations: 0,
            feas: T::tol(opts.feas_tol) * rhs_scale,
            pivot: T::tol(opts.pivot_tol),
            opt: T::tol(opts.opt_tol) * cost_scale,
        };
        s.reset();
        s
    }

    /// All-artificial basis.
    fn reset(&mut self) {
        let m = self.m;
        self.binv = vec![T::zero(); m * m];
        for i in 0..m {
            self.binv[i * m + i] = T::one();
        }
        self.basis = (self.n..self.n + m).collect();
        self.is_basic = vec![false; self.n + m];
        for i in 0..m {
            self.is_basic[self.n + i] = true;
        }
        self.xb = (0..m).map(|i| self.signed_rhs(i)).collect();
        self.phase = Phase::One;
        self.refresh_duals();
    }

    fn signed_rhs(&self, i: usize) -> T {
        if self.sign[i] {
            -self.lp.rhs[i].clone()
        } else {
            self.lp.rhs[i].clone()
        }
    }

    fn entry(&self, i: usize, v: &T) -> T {
        if self.sign[i] {
            -v.clone()
        } else {
            v.clone()
        }
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n
    }

    fn phase_cost(&self, j: usize) -> T {
        match (self.phase, self.is_artificial(j)) {
            (Phase::One, true) => T::one(),
            (Phase::One, false) | (Phase::Two, true) => T::zero(),
            (Phase::Two, false) => self.lp.cost[j].clone(),
        }
    }

    /// `B⁻¹ a_j`.
    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m;
        if self.is_artificial(j) {
            let r = j - self.n;
            return (0..m).map(|i| self.binv[i * m + r].clone()).collect();
        }
        let col: Vec<(usize, T)> = self.lp.columns[j].iter().map(|(k, v)| (*k, self.entry(*k, v))).collect();
        (0..m)
            .map(|i| {
                let row = &self.binv[i * m..(i + 1) * m];
                let mut s = T::zero();
                for (k, v) in &col {
                    if !row[*k].is_zero() {
                        s += row[*k].clone() * v;
                    }
                }
                s
            })
            .collect()
    }

    fn reduced_cost(&self, j: usize) -> T {
        let mut d = self.phase_cost(j);
        for (k, v) in &self.lp.columns[j] {
            if !self.y[*k].is_zero() {
                d -= self.y[*k].clone() * self.entry(*k, v);
            }
        }
        d
    }

    /// `y = c_Bᵀ B⁻¹` from scratch.
    fn refresh_duals(&mut self) {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for i in 0..m {
            let c = self.phase_cost(self.basis[i]);
            if c.is_zero() {
                continue;
            }
            for (k, yk) in y.iter_mut().enumerate() {
                let b = &self.binv[i * m + k];
                if !b.is_zero() {
                    *yk += c.clone() * b;
                }
            }
        }
        self.y = y;
    }

    /// `x_B = B⁻¹ b` from scratch.
    fn refresh_values(&mut self) {
        let m = self.m;
        let b: Vec<T> = (0..m).map(|i| self.signed_rhs(i)).collect();
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut s = T::zero();
            for (bi, r) in b.iter().zip(row) {
                if !bi.is_zero() && !r.is_zero() {
                    s += r.clone() * bi;
                }
            }
            self.xb[i] = s;
        }
    }

    /// Replaces the basic variable of row `r` by `q`, given `alpha = B⁻¹ a_q`.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[T], reduced: Option<T>) {
        let m = self.m;
        let piv = alpha[r].clone();
        let theta = self.xb[r].clone() / &piv;
        for (i, a) in alpha.iter().enumerate() {
            if i != r && !a.is_zero() {
                let d = a.clone() * &theta;
                self.xb[i] -= d;
            }
        }
        self.xb[r] = theta;

        let (head, rest) = self.binv.split_at_mut(r * m);
        let (row_r, tail) = rest.split_at_mut(m);
        let mut nz = Vec::new();
        for (k, v) in row_r.iter_mut().enumerate() {
            if !v.is_zero() {
                *v = v.clone() / &piv;
                nz.push(k);
            }
        }
        for (i, a) in alpha.iter().enumerate() {
            if i == r || a.is_zero() {
                continue;
            }
            let row = if i < r {
                &mut head[i * m..(i + 1) * m]
            } else {
                let o = (i - r - 1) * m;
                &mut tail[o..o + m]
            };
            for &k in &nz {
                let d = a.clone() * &row_r[k];
                row[k] -= d;
            }
        }

        self.is_basic[self.basis[r]] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
        match reduced {
            Some(d) => {
                for &k in &nz {
                    let v = d.clone() * &self.binv[r * m + k];
                    self.y[k] += v;
                }
            }
            None => self.refresh_duals(),
        }
    }

    /// Pivots the given columns into rows still held by artificials.
    fn crash(&mut self, columns: &[usize]) {
        for &j in columns {
            if j >= self.n || self.is_basic[j] {
                continue;
            }
            let alpha = self.ftran(j);
            let mut best: Option<usize> = None;
            for (i, a) in alpha.iter().enumerate() {
                if !self.is_artificial(self.basis[i]) || a.abs() <= self.pivot {
                    continue;
                }
                if best.is_none_or(|b| a.abs() > alpha[b].abs()) {
                    best = Some(i);
                }
            }
            if let Some(r) = best {
                self.pivot(r, j, &alpha, Some(T::zero()));
            }
        }
        self.refresh_values();
        self.refresh_duals();
    }

    fn artificial_sum(&self) -> T {
        let mut s = T::zero();
        for (i, &j) in self.basis.iter().enumerate() {
            if self.is_artificial(j) {
                s += self.xb[i].abs();
            }
        }
        s
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for j in 0..self.n {
            if self.is_basic[j] {
                continue;
            }
            let d = self.reduced_cost(j);
            if d >= -self.opt.clone() {
                continue;
            }
            if bland {
                return Some((j, d));
            }
            if best.as_ref().is_none_or(|(_, b)| d < *b) {
                best = Some((j, d));
            }
        }
        best
    }

    fn choose_leaving(&self, alpha: &[T], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, T)> = None;
        for (i, a) in alpha.iter().enumerate() {
            let art_blocked = self.phase == Phase::Two && self.is_artificial(self.basis[i]);
            let ratio = if art_blocked && a.abs() > self.pivot {
                T::zero()
            } else if !art_blocked && *a > self.pivot {
                T::max_of(self.xb[i].clone(), T::zero()) / a
            } else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((b, br)) => match ratio.partial_cmp(br).unwrap_or(Ordering::Equal) {
                    Ordering::Less => true,
                    Ordering::Greater => false,
                    Ordering::Equal => {
                        if bland {
                            self.basis[i] < self.basis[*b]
                        } else {
                            a.abs() > alpha[*b].abs()
                        }
                    }
                },
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn run(&mut self) -> Result<()> {
        let mut degenerate_run = 0usize;
        let mut since_refresh = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(MotError::IterationLimit(self.iterations));
            }
            let bland = self.opts.rule == PivotRule::Bland || degenerate_run >= self.opts.degenerate_switch;
            let Some((q, d)) = self.choose_entering(bland) else {
                if !T::EXACT && since_refresh > 0 {
                    // confirm optimality with fresh duals
                    self.refresh_duals();
                    self.refresh_values();
                    since_refresh = 0;
                    if self.choose_entering(true).is_some() {
                        continue;
                    }
                }
                return Ok(());
            };
            let alpha = self.ftran(q);
            let Some(r) = self.choose_leaving(&alpha, bland) else {
                return Err(MotError::Unbounded);
            };
            let degenerate = T::max_of(self.xb[r].clone(), T::zero()) <= self.feas.clone() * T::tol(1e-3);
            degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
            if !T::EXACT && self.xb[r].is_negative() {
                self.xb[r] = T::zero();
            }
            self.pivot(r, q, &alpha, Some(d));
            self.iterations += 1;
            since_refresh += 1;
            if !T::EXACT && since_refresh >= self.opts.refresh_every {
                self.refresh_duals();
                self.refresh_values();
                since_refresh = 0;
            }
        }
    }

    /// Phase 1 from the current basis. Returns whether `Ax = b` is feasible.
    fn phase_one(&mut self) -> Result<bool> {
        self.phase = Phase::One;
        self.refresh_duals();
        self.run()?;
        self.refresh_values();
        if self.artificial_sum() > self.feas.clone() * T::from_i64(self.m.max(1) as i64) {
            return Ok(false);
        }
        if !T::EXACT {
            for i in 0..self.m {
                if self.is_artificial(self.basis[i]) {
                    self.xb[i] = T::zero();
                }
            }
        }
        Ok(true)
    }

    fn start(&mut self, warm: Option<&[usize]>) -> Result<bool> {
        if let Some(cols) = warm {
            self.crash(cols);
            let neg = self.xb.iter().any(|v| *v < -self.feas.clone());
            if !neg && self.artificial_sum() <= self.feas {
                if !T::EXACT {
                    for i in 0..self.m {
                        if self.is_artificial(self.basis[i]) || self.xb[i].is_negative() {
                            self.xb[i] = T::zero();
                        }
                    }
                }
                return Ok(true);
            }
            if neg {
                self.reset();
            }
        }
        if !self.phase_one()? {
            return Err(MotError::Infeasible);
        }
        Ok(false)
    }

    fn finish(mut self, warm_started: bool) -> LpSolution<T> {
        self.refresh_values();
        self.refresh_duals();
        let mut x = vec![T::zero(); self.n];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.n {
                let v = self.xb[i].clone();
                x[j] = if !T::EXACT && v.is_negative() { T::zero() } else { v };
            }
        }
        let duals = self
            .y
            .iter()
            .enumerate()
            .map(|(i, v)| if self.sign[i] { -v.clone() } else { v.clone() })
            .collect();
        LpSolution {
            value: self.lp.objective(&x),
            x,
            duals,
            basis: self.basis,
            iterations: self.iterations,
            warm_started,
        }
    }
}

/// Minimises `cᵀx` over `Ax = b, x ≥ 0`. `warm` lists columns to crash into
/// the starting basis (typically the support of a known feasible point).
pub fn solve_lp<T: Scalar>(lp: &LinearProgram<T>, opts: &SimplexOptions, warm: Option<&[usize]>) -> Result<LpSolution<T>> {
    let mut s = Solver::new(lp, opts);
    let warm_started = s.start(warm)?;
    s.phase = Phase::Two;
    s.refresh_duals();
    s.run()?;
    Ok(s.finish(warm_started))
}

/// Phase 1 only: whether `Ax = b, x ≥ 0` has a solution.
pub fn is_feasible<T: Scalar>(lp: &LinearProgram<T>, opts: &SimplexOptions) -> Result<bool> {
    let mut s = Solver::new(lp, opts);
    s.phase_one()
}
