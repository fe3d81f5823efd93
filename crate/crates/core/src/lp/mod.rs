//! Classical and martingale transport as linear programs.

mod simplex;
mod transport;
mod vertices;

pub use simplex::{is_feasible, solve_lp, LinearProgram, LpSolution, PivotRule, SimplexOptions};
pub use transport::{DualCertificate, TransportLp};
pub use vertices::{martingale_vertices, rank};

pub use crate::curtain::SupportProfile;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::CostSpec;
use crate::curtain::{left_curtain_with, Coupling};
use crate::error::{MotError, Result};
use crate::measures::{convex_order_with, DiscreteMeasure};
use crate::scalar::{scaled_tol, Scalar};
use crate::tolerance::Tolerances;

#[derive(Clone, Debug)]
pub struct TransportSolution<T> {
    pub plan: Coupling<T>,
    pub value: T,
    pub dual: DualCertificate<T>,
    pub iterations: usize,
    pub warm_started: bool,
}

/// `max(1, |value|, max |c|)`.
pub fn cost_scale<T: Scalar>(value: &T, cost: &[Vec<T>]) -> T {
    let mut s = T::max_of(T::one(), value.abs());
    for row in cost {
        for c in row {
            s = T::max_of(s, c.abs());
        }
    }
    s
}

pub fn solve_martingale<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &CostSpec,
) -> Result<TransportSolution<T>> {
    let c = cost.matrix(mu, nu)?;
    solve_martingale_matrix(mu, nu, &c, &Tolerances::default())
}

/// Optimal martingale plan for a cost matrix on `supp μ × supp ν`, started
/// from the left curtain.
pub fn solve_martingale_matrix<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &[Vec<T>],
    tols: &Tolerances,
) -> Result<TransportSolution<T>> {
    if !convex_order_with(mu, nu, tols) {
        return Err(MotError::NotInConvexOrder);
    }
    let tlp = TransportLp::martingale(mu, nu, cost);
    let warm = left_curtain_with(mu, nu, tols).ok().map(|lc| tlp.warm_columns(&lc));
    solve_transport(&tlp, warm.as_deref(), tols)
}

pub fn solve_transport<T: Scalar>(
    tlp: &TransportLp<T>,
    warm: Option<&[usize]>,
    tols: &Tolerances,
) -> Result<TransportSolution<T>> {
    let opts = SimplexOptions::for_scalar::<T>();
    let sol = solve_lp(tlp.lp(), &opts, warm)?;
    Ok(TransportSolution {
        plan: tlp.plan(&sol.x, &tols.prune()),
        dual: tlp.dual_certificate(&sol),
        value: sol.value,
        iterations: sol.iterations,
        warm_started: sol.warm_started,
    })
}

pub fn solve_classical<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &CostSpec,
) -> Result<TransportSolution<T>> {
    let c = cost.matrix(mu, nu)?;
    solve_classical_matrix(mu, nu, &c, &Tolerances::default())
}

/// Optimal transport plan without the martingale rows, started from the
/// quantile coupling.
pub fn solve_classical_matrix<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &[Vec<T>],
    tols: &Tolerances,
) -> Result<TransportSolution<T>> {
    let hf = hoeffding_frechet_with(mu, nu, tols)?;
    let tlp = TransportLp::classical(mu, nu, cost);
    let warm = tlp.warm_columns(&hf);
    solve_transport(&tlp, Some(&warm), tols)
}

pub fn hoeffding_frechet<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<Coupling<T>> {
    hoeffding_frechet_with(mu, nu, &Tolerances::default())
}

/// Quantile coupling: the north-west corner rule on the sorted atoms.
pub fn hoeffding_frechet_with<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    tols: &Tolerances,
) -> Result<Coupling<T>> {
    let tol = scaled_tol(&tols.feas::<T>(), &[mu.total_mass(), nu.total_mass()]);
    if (mu.total_mass().clone() - nu.total_mass()).abs() > tol {
        return Err(MotError::MassMismatch);
    }
    let (a, b) = (mu.atoms(), nu.atoms());
    let mut rows = vec![Vec::new(); a.len()];
    let (mut i, mut j) = (0, 0);
    let mut left_a = a.first().map(|x| x.w.clone()).unwrap_or_else(T::zero);
    let mut left_b = b.first().map(|x| x.w.clone()).unwrap_or_else(T::zero);
    let dust: T = tols.prune();
    while i < a.len() && j < b.len() {
        let t = T::min_of(left_a.clone(), left_b.clone());
        if t > dust {
            rows[i].push((b[j].x.clone(), t.clone()));
        }
        left_a -= t.clone();
        left_b -= t;
        if left_a <= dust {
            i += 1;
            if i < a.len() {
                left_a = a[i].w.clone();
            }
        }
        if left_b <= dust {
            j += 1;
            if j < b.len() {
                left_b = b[j].w.clone();
            }
        }
    }
    Coupling::from_rows(mu.clone(), nu.clone(), rows)
}

/// Whether a martingale plan between `μ` and `ν` exists (phase 1 only).
pub fn martingale_feasible<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<bool> {
    let zero = vec![vec![T::zero(); nu.len()]; mu.len()];
    let tlp = TransportLp::martingale(mu, nu, &zero);
    is_feasible(tlp.lp(), &SimplexOptions::for_scalar::<T>())
}

/// Whether some `θ ≤ ν` satisfies `μ ≤_c θ`, decided by phase 1.
pub fn embedding_feasible<T: Scalar>(mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<bool> {
    let zero = vec![vec![T::zero(); nu.len()]; mu.len()];
    let tlp = TransportLp::embedding(mu, nu, &zero);
    is_feasible(tlp.lp(), &SimplexOptions::for_scalar::<T>())
}

/// A vertex of `{θ ≤ ν : μ ≤_c θ}` selected by a cost matrix; returns `θ`.
pub fn embedding_vertex<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &[Vec<T>],
) -> Result<DiscreteMeasure<T>> {
    let tlp = TransportLp::embedding(mu, nu, cost);
    let sol = solve_lp(tlp.lp(), &SimplexOptions::for_scalar::<T>(), None)?;
    Ok(tlp.used_target(&sol.x))
}

/// Random matrix with entries uniform on the grid `{-1, -0.999, ..., 1}`.
pub fn random_matrix<T: Scalar>(rows: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<T>> {
    (0..rows)
        .map(|_| (0..cols).map(|_| T::from_ratio(rng.random_range(-1000..=1000), 1000)).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeResult {
    pub unique: bool,
    /// Largest `max - min` of a secondary objective over the optimal face.
    pub spread: f64,
    pub trials: usize,
}

/// Spread allowed between the extremes of a secondary objective before the
/// optimal face is declared non-trivial (float mode).
pub const PROBE_TOL: f64 = 1e-6;

/// Reduced costs below this multiple of the simplex optimality tolerance
/// count as zero when the optimal face is cut out (float mode).
const FACE_SLACK: f64 = 10.0;

/// Checks whether the optimal face of the martingale LP is a single point.
///
/// Every optimal plan is complementary to every optimal dual, so the face is
/// the set of martingale plans vanishing wherever the reduced cost of `dual`
/// is positive. Random linear functionals are extremised over that set.
pub fn uniqueness_probe<T: Scalar>(
    mu: &DiscreteMeasure<T>,
    nu: &DiscreteMeasure<T>,
    cost: &[Vec<T>],
    dual: &DualCertificate<T>,
    trials: usize,
    seed: u64,
    tols: &Tolerances,
) -> Result<ProbeResult> {
    let opts = SimplexOptions::for_scalar::<T>();
    let mut tlp = TransportLp::martingale(mu, nu, cost);
    let scale = cost_scale(&T::zero(), cost);
    let face_tol = T::tol(FACE_SLACK * opts.opt_tol) * &scale;
    for (i, row) in dual.reduced_costs(mu, nu, cost).iter().enumerate() {
        for (j, rc) in row.iter().enumerate() {
            if *rc > face_tol {
                tlp.fix_entry(i, j, T::zero());
            }
        }
    }
    let nvars = tlp.plan_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let warm = left_curtain_with(mu, nu, tols).ok().map(|lc| tlp.warm_columns(&lc));
    let mut spread = 0.0f64;
    let mut unique = true;
    for _ in 0..trials {
        let dir: Vec<T> = random_matrix(1, nvars, &mut rng).remove(0);
        let mut extremes = Vec::with_capacity(2);
        for sign in [1i64, -1] {
            let c: Vec<T> = dir.iter().map(|v| v.clone() * T::from_i64(sign)).collect();
            let mut probe = tlp.lp().clone();
            probe.set_cost(c);
            let sol = solve_lp(&probe, &opts, warm.as_deref())?;
            extremes.push(sol.value * T::from_i64(sign));
        }
        let width = extremes[1].clone() - &extremes[0];
        spread = spread.max(width.to_f64());
        let limit = if T::EXACT { T::zero() } else { T::from_f64(PROBE_TOL) };
        if width > limit {
            unique = false;
        }
    }
    Ok(ProbeResult { unique, spread, trials })
}

pub fn support_profile<T: Scalar>(pi: &Coupling<T>, threshold: &T) -> SupportProfile<T> {
    pi.support_profile(threshold)
}
