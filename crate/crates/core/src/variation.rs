//! Competitors, variations and the local optimality test.
//!
//! A competitor of a finite measure `α` on the plane has the same two
//! marginals and the same row means as `α`. Differences of competitors form
//! the variation space: signed measures with vanishing marginals and
//! vanishing row first moments.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::costs::CostSpec;
use crate::curtain::Coupling;
use crate::error::{MotError, Result};
use crate::lp::{solve_lp, SimplexOptions, TransportLp};
use crate::measures::DiscreteMeasure;
use crate::scalar::Scalar;

/// Sorts `(x, y, w)` triples by position and merges repeated positions.
fn merge<T: Scalar>(mut entries: Vec<(T, T, T)>) -> Vec<(T, T, T)> {
    entries.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal))
    });
    let mut out: Vec<(T, T, T)> = Vec::with_capacity(entries.len());
    for (x, y, w) in entries {
        match out.last_mut() {
            Some(last) if last.0 == x && last.1 == y => last.2 += w,
            _ => out.push((x, y, w)),
        }
    }
    out
}

fn marginal<T: Scalar>(entries: &[(T, T, T)], pick: impl Fn(&(T, T, T)) -> T) -> Result<DiscreteMeasure<T>> {
    DiscreteMeasure::new(entries.iter().map(|e| (pick(e), e.2.clone())))
}

/// Positive measure with finite support, usually carved out of a plan.
#[derive(Clone, Debug, PartialEq)]
pub struct SubMeasure<T> {
    entries: Vec<(T, T, T)>,
}

impl<T: Scalar> SubMeasure<T> {
    pub fn new(entries: impl IntoIterator<Item = (T, T, T)>) -> Result<Self> {
        let entries = merge(entries.into_iter().collect());
        if let Some(e) = entries.iter().find(|e| !e.2.is_positive()) {
            return Err(MotError::InvalidMeasure(format!("non-positive mass {} at ({}, {})", e.2, e.0, e.1)));
        }
        Ok(Self { entries })
    }

    /// Sub-measure of `pi` with the given masses; every atom must lie in the
    /// support of `pi`.
    pub fn within(pi: &Coupling<T>, entries: impl IntoIterator<Item = (T, T, T)>) -> Result<Self> {
        let alpha = Self::new(entries)?;
        for (x, y, _) in &alpha.entries {
            let inside = pi
                .source()
                .index_of(x)
                .is_some_and(|i| pi.row(i).iter().any(|(v, w)| v == y && w.is_positive()));
            if !inside {
                return Err(MotError::InvalidCoupling(format!("({x}, {y}) is not in the support of the plan")));
            }
        }
        Ok(alpha)
    }

    pub fn entries(&self) -> &[(T, T, T)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_marginal(&self) -> DiscreteMeasure<T> {
        marginal(&self.entries, |e| e.0.clone()).expect("positive masses")
    }

    pub fn target_marginal(&self) -> DiscreteMeasure<T> {
        marginal(&self.entries, |e| e.1.clone()).expect("positive masses")
    }

    /// `(x, Σ_y w·y / Σ_y w)` for every source position.
    pub fn row_means(&self) -> Vec<(T, T)> {
        let mut out: Vec<(T, T, T)> = Vec::new();
        for (x, y, w) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == *x => {
                    last.1 += w.clone();
                    last.2 += w.clone() * y;
                }
                _ => out.push((x.clone(), w.clone(), w.clone() * y)),
            }
        }
        out.into_iter().map(|(x, m, s)| (x, s / &m)).collect()
    }

    pub fn cost(&self, cost: &CostSpec) -> Result<T> {
        let mut total = T::zero();
        for (x, y, w) in &self.entries {
            total += cost.eval::<T>(x, y)? * w;
        }
        Ok(total)
    }

    /// Coupling between the two marginals with these entries.
    pub fn to_coupling(&self) -> Coupling<T> {
        Coupling::from_entries(self.entries.iter().cloned()).expect("positive masses")
    }

    /// Whether `other` has the same marginals and row means, up to `tol`.
    pub fn is_competitor(&self, other: &Self, tol: &T) -> bool {
        Variation::between(self, other).is_variation(tol)
    }
}

/// Signed measure with zero marginals and zero row first moments.
#[derive(Clone, Debug, PartialEq)]
pub struct Variation<T> {
    entries: Vec<(T, T, T)>,
}

/// Largest violations of the variation constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationResiduals<T> {
    pub total: T,
    pub source: T,
    pub target: T,
    pub moment: T,
}

impl<T: Scalar> Variation<T> {
    pub fn new(entries: impl IntoIterator<Item = (T, T, T)>) -> Self {
        let entries = merge(entries.into_iter().collect()).into_iter().filter(|e| !e.2.is_zero()).collect();
        Self { entries }
    }

    /// `α - β`.
    pub fn between(alpha: &SubMeasure<T>, beta: &SubMeasure<T>) -> Self {
        let neg = beta.entries.iter().map(|(x, y, w)| (x.clone(), y.clone(), -w.clone()));
        Self::new(alpha.entries.iter().cloned().chain(neg))
    }

    pub fn entries(&self) -> &[(T, T, T)] {
        &self.entries
    }

    pub fn positive(&self) -> Vec<(T, T, T)> {
        self.entries.iter().filter(|e| e.2.is_positive()).cloned().collect()
    }

    /// `σ⁻` as a positive measure.
    pub fn negative(&self) -> Vec<(T, T, T)> {
        self.entries
            .iter()
            .filter(|e| e.2.is_negative())
            .map(|(x, y, w)| (x.clone(), y.clone(), -w.clone()))
            .collect()
    }

    pub fn residuals(&self) -> VariationResiduals<T> {
        let mut total = T::zero();
        let mut by_x: Vec<(T, T, T)> = Vec::new();
        for (x, y, w) in &self.entries {
            total += w.clone();
            match by_x.last_mut() {
                Some(last) if last.0 == *x => {
                    last.1 += w.clone();
                    last.2 += w.clone() * y;
                }
                _ => by_x.push((x.clone(), w.clone(), w.clone() * y)),
            }
        }
        let mut by_y: Vec<(T, T)> = self.entries.iter().map(|(_, y, w)| (y.clone(), w.clone())).collect();
        by_y.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
        let mut target = T::zero();
        let mut k = 0;
        while k < by_y.len() {
            let mut s = T::zero();
            let y = by_y[k].0.clone();
            while k < by_y.len() && by_y[k].0 == y {
                s += by_y[k].1.clone();
                k += 1;
            }
            target = T::max_of(target, s.abs());
        }
        let mut source = T::zero();
        let mut moment = T::zero();
        for (_, m, s) in by_x {
            source = T::max_of(source, m.abs());
            moment = T::max_of(moment, s.abs());
        }
        VariationResiduals {
            total: total.abs(),
            source,
            target,
            moment,
        }
    }

    pub fn is_variation(&self, tol: &T) -> bool {
        let r = self.residuals();
        r.total <= *tol && r.source <= *tol && r.target <= *tol && r.moment <= *tol
    }
}

/// Cheapest competitor of a sub-measure.
#[derive(Clone, Debug)]
pub struct Competitor<T> {
    pub plan: SubMeasure<T>,
    pub value: T,
}

/// Minimises `∫c dα′` over competitors `α′` of `α`. The marginals of `α`
/// are fixed, so `α′` lives on `supp_x α × supp_y α`.
pub fn best_competitor<T: Scalar>(alpha: &SubMeasure<T>, cost: &CostSpec) -> Result<Competitor<T>> {
    if alpha.is_empty() {
        return Ok(Competitor {
            plan: alpha.clone(),
            value: T::zero(),
        });
    }
    let source = alpha.source_marginal();
    let target = alpha.target_marginal();
    let centers: Vec<T> = alpha.row_means().into_iter().map(|(_, m)| m).collect();
    let mut c = Vec::with_capacity(source.len());
    for a in source.atoms() {
        let mut row = Vec::with_capacity(target.len());
        for b in target.atoms() {
            row.push(cost.eval::<T>(&a.x, &b.x)?);
        }
        c.push(row);
    }
    let tlp = TransportLp::with_centers(&source, &target, centers, &c);
    let warm: Vec<usize> = alpha
        .entries
        .iter()
        .filter_map(|(x, y, _)| Some(tlp.var(source.index_of(x)?, target.index_of(y)?)))
        .collect();
    let sol = solve_lp(tlp.lp(), &SimplexOptions::for_scalar::<T>(), Some(&warm))?;
    let m = target.len();
    let mut entries = Vec::new();
    for (i, a) in source.atoms().iter().enumerate() {
        for (j, b) in target.atoms().iter().enumerate() {
            let w = sol.x[i * m + j].clone();
            if w.is_positive() {
                entries.push((a.x.clone(), b.x.clone(), w));
            }
        }
    }
    Ok(Competitor {
        plan: SubMeasure::new(entries)?,
        value: sol.value,
    })
}

/// The swap used against left-monotonicity violations: with
/// `λ = (y′ - y⁻)/(y⁺ - y⁻)`,
/// `α = λδ(x,y⁺) + (1-λ)δ(x,y⁻) + δ(x′,y′)` and
/// `α′ = λδ(x′,y⁺) + (1-λ)δ(x′,y⁻) + δ(x,y′)`.
pub fn three_point_variation<T: Scalar>(
    x: &T,
    y_minus: &T,
    y_plus: &T,
    x_prime: &T,
    y_prime: &T,
) -> Result<(SubMeasure<T>, SubMeasure<T>)> {
    if !(y_minus < y_prime && y_prime < y_plus) {
        return Err(MotError::Domain(format!("need y⁻ < y′ < y⁺, got {y_minus}, {y_prime}, {y_plus}")));
    }
    let lambda = (y_prime.clone() - y_minus) / (y_plus.clone() - y_minus);
    let rest = T::one() - &lambda;
    let alpha = SubMeasure::new([
        (x.clone(), y_plus.clone(), lambda.clone()),
        (x.clone(), y_minus.clone(), rest.clone()),
        (x_prime.clone(), y_prime.clone(), T::one()),
    ])?;
    let alpha_prime = SubMeasure::new([
        (x_prime.clone(), y_plus.clone(), lambda),
        (x_prime.clone(), y_minus.clone(), rest),
        (x.clone(), y_prime.clone(), T::one()),
    ])?;
    Ok((alpha, alpha_prime))
}

#[derive(Clone, Debug)]
pub struct VariationalOptions<T> {
    /// Largest support size of a sampled sub-measure.
    pub max_points: usize,
    pub trials: usize,
    pub seed: u64,
    /// Relative tolerance; the absolute slack is `tol · max(1, |∫c dα|)`.
    pub tol: f64,
    /// Sub-measures checked before the random ones.
    pub witnesses: Vec<SubMeasure<T>>,
    pub jobs: usize,
}

impl<T> Default for VariationalOptions<T> {
    fn default() -> Self {
        Self {
            max_points: 4,
            trials: 200,
            seed: 0,
            tol: 1e-9,
            witnesses: Vec::new(),
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Violation<T> {
    pub alpha: SubMeasure<T>,
    pub competitor: SubMeasure<T>,
    pub alpha_cost: T,
    pub competitor_value: T,
}

#[derive(Clone, Debug)]
pub struct VariationalReport<T> {
    pub checked: usize,
    /// Smallest `∫c dα′ - ∫c dα + slack` seen; negative iff a violation occurred.
    pub worst_margin: f64,
    pub violations: Vec<Violation<T>>,
}

impl<T> VariationalReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Random sub-measure of `pi`: rows in random order, whole rows while they
/// fit into the budget, otherwise a uniform subset of the row's atoms.
/// Masses are those of `pi`.
fn sample_submeasure<T: Scalar>(pi: &Coupling<T>, max_points: usize, rng: &mut impl Rng) -> Option<SubMeasure<T>> {
    let budget = rng.random_range(2..=max_points.max(2));
    let mut order: Vec<usize> = (0..pi.len()).filter(|&i| !pi.row(i).is_empty()).collect();
    order.shuffle(rng);
    let mut entries = Vec::new();
    for i in order {
        let left = budget - entries.len();
        if left == 0 {
            break;
        }
        let row = pi.row(i);
        let x = pi.x(i);
        if row.len() <= left {
            entries.extend(row.iter().map(|(y, w)| (x.clone(), y.clone(), w.clone())));
        } else {
            let mut idx: Vec<usize> = (0..row.len()).collect();
            idx.shuffle(rng);
            idx.truncate(left);
            idx.sort_unstable();
            entries.extend(idx.into_iter().map(|k| (x.clone(), row[k].0.clone(), row[k].1.clone())));
        }
    }
    SubMeasure::new(entries).ok().filter(|a| !a.is_empty())
}

fn check<T: Scalar>(alpha: SubMeasure<T>, cost: &CostSpec, tol: f64) -> Result<(f64, Option<Violation<T>>)> {
    let own = alpha.cost(cost)?;
    let best = best_competitor(&alpha, cost)?;
    let slack = if T::EXACT {
        T::zero()
    } else {
        T::from_f64(tol * own.to_f64().abs().max(1.0))
    };
    let margin = best.value.clone() - &own + &slack;
    let violation = margin.is_negative().then(|| Violation {
        alpha,
        competitor: best.plan,
        alpha_cost: own,
        competitor_value: best.value,
    });
    Ok((margin.to_f64(), violation))
}

/// Samples sub-measures of `supp π` and checks that none of them has a
/// strictly cheaper competitor. Trial `k` draws from its own random stream,
/// so the report does not depend on `jobs`.
pub fn verify_variational<T: Scalar>(
    pi: &Coupling<T>,
    cost: &CostSpec,
    opts: &VariationalOptions<T>,
) -> Result<VariationalReport<T>> {
    let mut report = VariationalReport {
        checked: 0,
        worst_margin: f64::INFINITY,
        violations: Vec::new(),
    };
    let absorb = |report: &mut VariationalReport<T>, (margin, v): (f64, Option<Violation<T>>)| {
        report.checked += 1;
        report.worst_margin = report.worst_margin.min(margin);
        report.violations.extend(v);
    };
    for w in &opts.witnesses {
        let alpha = SubMeasure::within(pi, w.entries().iter().cloned())?;
        let outcome = check(alpha, cost, opts.tol)?;
        absorb(&mut report, outcome);
    }
    let run = |k: usize| -> Result<Option<(f64, Option<Violation<T>>)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        match sample_submeasure(pi, opts.max_points, &mut rng) {
            Some(alpha) => check(alpha, cost, opts.tol).map(Some),
            None => Ok(None),
        }
    };
    let jobs = opts.jobs.max(1).min(opts.trials.max(1));
    let outcomes: Vec<Result<Option<(f64, Option<Violation<T>>)>>> = if jobs == 1 {
        (0..opts.trials).map(run).collect()
    } else {
        let mut slots: Vec<Option<Result<Option<(f64, Option<Violation<T>>)>>>> = (0..opts.trials).map(|_| None).collect();
        std::thread::scope(|s| {
            for (c, chunk) in slots.chunks_mut(opts.trials.div_ceil(jobs)).enumerate() {
                let run = &run;
                let base = c * opts.trials.div_ceil(jobs);
                s.spawn(move || {
                    for (off, slot) in chunk.iter_mut().enumerate() {
                        *slot = Some(run(base + off));
                    }
                });
            }
        });
        slots.into_iter().map(|s| s.expect("every trial runs")).collect()
    };
    for o in outcomes {
        if let Some(outcome) = o? {
            absorb(&mut report, outcome);
        }
    }
    if report.checked == 0 {
        report.worst_margin = 0.0;
    }
    Ok(report)
}

/// `(A - B)` for the comparison of `λδ(x,y⁺) + (1-λ)δ(x,y⁻) + δ(x′,y′)`
/// with its swap under the cost `|y - x|`.
pub fn hn_difference<T: Scalar>(x: &T, y_minus: &T, y_prime: &T, y_plus: &T, x_prime: &T) -> Result<T> {
    if !(y_minus < y_prime && y_prime < y_plus) {
        return Err(MotError::Domain(format!("need y⁻ < y′ < y⁺, got {y_minus}, {y_prime}, {y_plus}")));
    }
    let lambda = (y_prime.clone() - y_minus) / (y_plus.clone() - y_minus);
    let rest = T::one() - &lambda;
    let d = |a: &T, b: &T| (a.clone() - b).abs();
    let a = lambda.clone() * d(x, y_plus) + rest.clone() * d(x, y_minus) + d(x_prime, y_prime);
    let b = lambda * d(x_prime, y_plus) + rest * d(x_prime, y_minus) + d(x, y_prime);
    Ok(a - b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HnCase {
    /// `y′ < x`: zeros at `x₀` and `x`.
    BelowSource,
    /// `y′ > x`: zeros at `x` and `x₁`.
    AboveSource,
    /// `y′ = x`: single zero at `x`.
    AtSource,
}

/// Sign of `A - B` as a function of `x′` for fixed `x, y⁻ < y′ < y⁺`.
#[derive(Clone, Debug, PartialEq)]
pub struct HnSignTable<T> {
    pub case: HnCase,
    pub lambda: T,
    pub x0: Option<T>,
    pub x1: Option<T>,
    x: T,
}

impl<T: Scalar> HnSignTable<T> {
    /// Zeros of `A - B` in increasing order.
    pub fn zeros(&self) -> Vec<T> {
        match self.case {
            HnCase::BelowSource => vec![self.x0.clone().expect("x₀"), self.x.clone()],
            HnCase::AboveSource => vec![self.x.clone(), self.x1.clone().expect("x₁")],
            HnCase::AtSource => vec![self.x.clone()],
        }
    }

    /// Sign predicted by the table: negative strictly between the two zeros,
    /// positive outside, zero on them.
    pub fn sign_at(&self, x_prime: &T) -> Ordering {
        let z = self.zeros();
        if z.iter().any(|v| v == x_prime) {
            return Ordering::Equal;
        }
        if z.len() == 2 && z[0] < *x_prime && *x_prime < z[1] {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

/// Sign table of `A - B`. Requires `y⁻ < y′ < y⁺` and `y⁻ < x < y⁺`.
pub fn hn_sign_table<T: Scalar>(x: &T, y_minus: &T, y_prime: &T, y_plus: &T) -> Result<HnSignTable<T>> {
    if !(y_minus < y_prime && y_prime < y_plus) {
        return Err(MotError::Domain(format!("need y⁻ < y′ < y⁺, got {y_minus}, {y_prime}, {y_plus}")));
    }
    if !(y_minus < x && x < y_plus) {
        return Err(MotError::Domain(format!("need y⁻ < x < y⁺, got x = {x}")));
    }
    let lambda = (y_prime.clone() - y_minus) / (y_plus.clone() - y_minus);
    let (case, x0, x1) = match x.partial_cmp(y_prime) {
        Some(Ordering::Greater) => {
            let t = (x.clone() - y_prime) / (y_plus.clone() - y_prime);
            let x0 = y_prime.clone() + t * (y_minus.clone() - y_prime);
            (HnCase::BelowSource, Some(x0), None)
        }
        Some(Ordering::Less) => {
            let t = (x.clone() - y_prime) / (y_minus.clone() - y_prime);
            let x1 = y_prime.clone() + t * (y_plus.clone() - y_prime);
            (HnCase::AboveSource, None, Some(x1))
        }
        _ => (HnCase::AtSource, None, None),
    };
    Ok(HnSignTable {
        case,
        lambda,
        x0,
        x1,
        x: x.clone(),
    })
}

/// Support points `(x, y⁻), (x, y⁺), (x′, y′)` with `y⁻ < y′ < y⁺` and
/// `y′ ≤ x′ < x` or `x < x′ ≤ y′`.
#[derive(Clone, Debug, PartialEq)]
pub struct BadConfiguration<T> {
    pub x: T,
    pub y_minus: T,
    pub y_plus: T,
    pub x_prime: T,
    pub y_prime: T,
}

/// Searches the support of `pi` (atoms above `threshold`) for a
/// configuration that an optimiser of `-|y - x|` cannot contain.
pub fn find_bad_configuration<T: Scalar>(pi: &Coupling<T>, threshold: &T) -> Option<BadConfiguration<T>> {
    let rows: Vec<(T, Vec<T>)> = (0..pi.len())
        .map(|i| {
            let ys = pi.row(i).iter().filter(|(_, w)| w > threshold).map(|(y, _)| y.clone()).collect();
            (pi.x(i).clone(), ys)
        })
        .collect();
    for (x, ys) in &rows {
        if ys.len() < 2 {
            continue;
        }
        let (lo, hi) = (&ys[0], &ys[ys.len() - 1]);
        for (xp, yps) in &rows {
            if xp == x {
                continue;
            }
            for yp in yps {
                let inside = lo < yp && yp < hi;
                let bad = (yp <= xp && xp < x) || (x < xp && xp <= yp);
                if inside && bad {
                    return Some(BadConfiguration {
                        x: x.clone(),
                        y_minus: lo.clone(),
                        y_plus: hi.clone(),
                        x_prime: xp.clone(),
                        y_prime: yp.clone(),
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_martingale;
    use crate::measures::make_measure;
    use crate::scalar::{q, Rational};

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn symmetric_three_point_swap() {
        let (a, b) = three_point_variation(&r(0), &r(-1), &r(1), &r(1), &r(0)).unwrap();
        let expected = SubMeasure::new([(r(1), r(1), q(1, 2)), (r(1), r(-1), q(1, 2)), (r(0), r(0), r(1))]).unwrap();
        assert_eq!(b, expected);
        assert!(a.is_competitor(&b, &r(0)));
        let v = Variation::between(&a, &b);
        assert_eq!(v.residuals().moment, r(0));
        assert!(v.is_variation(&r(0)));
    }

    #[test]
    fn three_point_rejects_outside() {
        assert!(three_point_variation(&r(0), &r(-1), &r(1), &r(1), &r(1)).is_err());
    }

    #[test]
    fn swap_is_cheaper_for_exp() {
        let (a, _) = three_point_variation(&0.0, &-1.0, &2.0, &1.0, &0.5).unwrap();
        let best = best_competitor(&a, &CostSpec::ExpDiff).unwrap();
        assert!(best.value < a.cost(&CostSpec::ExpDiff).unwrap() - 1e-6);
        assert!(a.is_competitor(&best.plan, &1e-12));
    }

    #[test]
    fn single_two_point_row_is_rigid() {
        let a = SubMeasure::new([(r(0), r(-1), q(1, 3)), (r(0), r(2), q(1, 6))]).unwrap();
        let best = best_competitor(&a, &CostSpec::PowerDiff(4)).unwrap();
        assert_eq!(best.plan, a);
        assert_eq!(best.value, a.cost(&CostSpec::PowerDiff(4)).unwrap());
    }

    #[test]
    fn single_row_is_pinned_by_its_marginals() {
        let a = SubMeasure::new([(r(0), r(-1), q(1, 3)), (r(0), r(0), q(1, 2)), (r(0), r(2), q(1, 6))]).unwrap();
        let best = best_competitor(&a, &CostSpec::PowerDiff(4)).unwrap();
        assert_eq!(best.plan, a);
    }

    #[test]
    fn three_point_competitors_form_a_segment() {
        // Six unknowns, five independent constraints: the competitors of a
        // three-point configuration are the segment from α to its swap, so
        // a linear cost is minimised at one of the two ends.
        let configs = [(0, -2, 3, 1, 1), (2, -1, 4, 0, 2), (-1, -3, 1, 2, 0), (1, 0, 5, 3, 2)];
        for cost in [CostSpec::PowerDiff(3), CostSpec::PowerDiff(4), CostSpec::AbsDiff, CostSpec::NegAbsDiff] {
            for (x, ym, yp, xp, yq) in configs {
                let (a, b) = three_point_variation(&r(x), &r(ym), &r(yp), &r(xp), &r(yq)).unwrap();
                let oracle = Rational::min(a.cost(&cost).unwrap(), b.cost(&cost).unwrap());
                assert_eq!(best_competitor(&a, &cost).unwrap().value, oracle, "{cost} {x} {ym} {yp} {xp} {yq}");
            }
        }
    }

    #[test]
    fn competitor_is_idempotent() {
        let (a, _) = three_point_variation(&q(1, 2), &r(-1), &r(3), &r(2), &r(1)).unwrap();
        let once = best_competitor(&a, &CostSpec::PowerDiff(3)).unwrap();
        let twice = best_competitor(&once.plan, &CostSpec::PowerDiff(3)).unwrap();
        assert_eq!(once.value, twice.value);
    }

    #[test]
    fn optimal_plan_has_no_violation() {
        let mu = make_measure(vec![(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        let nu = make_measure(vec![(-2.0, 0.2), (-1.0, 0.2), (0.0, 0.2), (1.0, 0.2), (2.0, 0.2)]).unwrap();
        let sol = solve_martingale(&mu, &nu, &CostSpec::ExpDiff).unwrap();
        let opts = VariationalOptions {
            trials: 100,
            seed: 3,
            ..Default::default()
        };
        let report = verify_variational(&sol.plan, &CostSpec::ExpDiff, &opts).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.checked, 100);
        let parallel = verify_variational(&sol.plan, &CostSpec::ExpDiff, &VariationalOptions { jobs: 4, ..opts }).unwrap();
        assert_eq!(parallel.worst_margin, report.worst_margin);
    }

    #[test]
    fn singleton_plan_passes() {
        let mu = DiscreteMeasure::dirac(r(1), r(1));
        let pi = Coupling::identity(&mu);
        let report = verify_variational(&pi, &CostSpec::PowerDiff(2), &VariationalOptions::default()).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn witness_outside_support_is_rejected() {
        let mu = DiscreteMeasure::dirac(r(1), r(1));
        let pi = Coupling::identity(&mu);
        let w = SubMeasure::new([(r(1), r(2), r(1))]).unwrap();
        let opts = VariationalOptions {
            witnesses: vec![w],
            trials: 0,
            ..Default::default()
        };
        assert!(verify_variational(&pi, &CostSpec::PowerDiff(2), &opts).is_err());
    }

    #[test]
    fn sign_table_below_source() {
        let t = hn_sign_table(&r(2), &r(0), &r(1), &r(3)).unwrap();
        assert_eq!(t.case, HnCase::BelowSource);
        assert_eq!(t.x0, Some(q(1, 2)));
        assert_eq!(t.lambda, q(1, 3));
        assert_eq!(t.sign_at(&r(-5)), Ordering::Greater);
        assert_eq!(t.sign_at(&r(1)), Ordering::Less);
        assert_eq!(t.sign_at(&q(1, 2)), Ordering::Equal);
        assert_eq!(t.sign_at(&r(2)), Ordering::Equal);
    }

    #[test]
    fn sign_table_at_source_is_nonnegative() {
        let t = hn_sign_table(&r(1), &r(0), &r(1), &r(3)).unwrap();
        assert_eq!(t.case, HnCase::AtSource);
        for k in -20..=40 {
            let xp = q(k, 5);
            let d = hn_difference(&r(1), &r(0), &r(1), &r(3), &xp).unwrap();
            assert!(d >= r(0));
            assert_eq!(d.is_zero(), xp == r(1));
        }
    }

    #[test]
    fn sign_table_agrees_with_direct_evaluation() {
        let cases = [(2, 0, 1, 3), (1, 0, 2, 3), (-1, -4, 0, 5), (4, -4, 0, 5), (0, -4, 0, 5)];
        for (x, ym, yp, yq) in cases {
            let t = hn_sign_table(&r(x), &r(ym), &r(yp), &r(yq)).unwrap();
            for k in -80..=80 {
                let xp = q(k, 8);
                let d = hn_difference(&r(x), &r(ym), &r(yp), &r(yq), &xp).unwrap();
                assert_eq!(d.partial_cmp(&r(0)).unwrap(), t.sign_at(&xp), "x={x} x′={xp}");
            }
            for z in t.zeros() {
                assert!(hn_difference(&r(x), &r(ym), &r(yp), &r(yq), &z).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn sign_table_domain() {
        assert!(hn_sign_table(&r(0), &r(1), &r(0), &r(3)).is_err());
        assert!(hn_sign_table(&r(5), &r(0), &r(1), &r(3)).is_err());
    }

    #[test]
    fn bad_configuration_detected() {
        let pi = Coupling::from_entries([
            (r(2), r(0), q(1, 2)),
            (r(2), r(4), q(1, 2)),
            (r(1), r(1), r(1)),
        ])
        .unwrap();
        let bad = find_bad_configuration(&pi, &r(0)).unwrap();
        assert_eq!((bad.x, bad.x_prime, bad.y_prime), (r(2), r(1), r(1)));
    }
}
