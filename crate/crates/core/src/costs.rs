//! Cost functions `c(x, y)` and their textual syntax.
//!
//! ```text
//! pow:<p> | abs | neg-abs | exp | poly:<c0,c1,...> | sep:<file> | ind:<s>,<t>
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use crate::curtain::Coupling;
use crate::error::{MotError, Result};
use crate::measures::DiscreteMeasure;
use crate::scalar::{format_rational, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec {
    /// `(y - x)^p`
    PowerDiff(u32),
    /// `|y - x|`
    AbsDiff,
    /// `-|y - x|`
    NegAbsDiff,
    /// `exp(y - x)`, always evaluated in binary64.
    ExpDiff,
    /// `h(y - x)` with `h(t) = Σ c_k t^k`.
    PolyDiff(Vec<Rational>),
    /// `φ(x)ψ(y)` given as tables aligned with the atoms of the marginals.
    Separable(SeparableTables),
    /// `1{x ≤ s}·|y - t|`
    Indicator(Rational, Rational),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparableTables {
    pub phi: Vec<Rational>,
    pub psi: Vec<Rational>,
    /// File the tables were read from, kept for display.
    pub source: Option<PathBuf>,
}

impl SeparableTables {
    pub fn new(phi: Vec<Rational>, psi: Vec<Rational>) -> Self {
        Self { phi, psi, source: None }
    }

    /// Reads `{"phi": [...], "psi": [...]}`; entries are numbers or `"p/q"` strings.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        let table = |key: &str| -> Result<Vec<Rational>> {
            let arr = v
                .get(key)
                .and_then(|a| a.as_array())
                .ok_or_else(|| MotError::InvalidMeasure(format!("missing array \"{key}\"")))?;
            arr.iter()
                .map(|e| {
                    let s = match e {
                        serde_json::Value::Number(n) => n.to_string(),
                        serde_json::Value::String(s) => s.clone(),
                        _ => String::new(),
                    };
                    Rational::parse_str(&s)
                        .ok_or_else(|| MotError::InvalidMeasure(format!("bad entry {e} in \"{key}\"")))
                })
                .collect()
        };
        Ok(Self::new(table("phi")?, table("psi")?))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut t = Self::from_json_str(&text)?;
        t.source = Some(path.to_path_buf());
        Ok(t)
    }

    /// Checks the tables against the marginals: `φ ≥ 0` non-increasing along
    /// the atoms of `μ`, `ψ ≥ 0` convex along the atoms of `ν`.
    pub fn validate<T: Scalar>(&self, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<()> {
        let bad = |m: String| Err(MotError::UnsupportedCost(m));
        if self.phi.len() != mu.len() || self.psi.len() != nu.len() {
            return bad(format!(
                "tables of length {}/{} for marginals with {}/{} atoms",
                self.phi.len(),
                self.psi.len(),
                mu.len(),
                nu.len()
            ));
        }
        if self.phi.iter().any(|v| v.is_negative()) || self.psi.iter().any(|v| v.is_negative()) {
            return bad("separable tables must be non-negative".into());
        }
        if self.phi.windows(2).any(|w| w[1] > w[0]) {
            return bad("φ must be non-increasing".into());
        }
        let ys = nu.positions();
        let psi: Vec<T> = self.psi.iter().map(T::from_rational).collect();
        let tol = T::tol(1e-12);
        for k in 2..ys.len() {
            let s0 = (psi[k - 1].clone() - &psi[k - 2]) / (ys[k - 1].clone() - &ys[k - 2]);
            let s1 = (psi[k].clone() - &psi[k - 1]) / (ys[k].clone() - &ys[k - 1]);
            if s1 < s0.clone() - &tol {
                return bad("ψ must be convex".into());
            }
        }
        Ok(())
    }
}

impl CostSpec {
    /// Value at `(x, y)`; separable costs need atom indices and are rejected.
    pub fn eval<T: Scalar>(&self, x: &T, y: &T) -> Result<T> {
        let d = y.clone() - x;
        Ok(match self {
            CostSpec::PowerDiff(p) => d.pow_u32(*p),
            CostSpec::AbsDiff => d.abs(),
            CostSpec::NegAbsDiff => -d.abs(),
            CostSpec::ExpDiff => T::from_f64(d.to_f64().exp()),
            CostSpec::PolyDiff(c) => horner(c, &d),
            CostSpec::Indicator(s, t) => {
                if *x <= T::from_rational(s) {
                    (y.clone() - T::from_rational(t)).abs()
                } else {
                    T::zero()
                }
            }
            CostSpec::Separable(_) => {
                return Err(MotError::UnsupportedCost(
                    "separable cost is defined on marginal atoms only".into(),
                ))
            }
        })
    }

    /// Cost matrix `c(x_i, y_j)` on the atoms of the marginals.
    pub fn matrix<T: Scalar>(&self, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) -> Result<Vec<Vec<T>>> {
        if let CostSpec::Separable(tab) = self {
            tab.validate(mu, nu)?;
            let psi: Vec<T> = tab.psi.iter().map(T::from_rational).collect();
            return Ok(tab
                .phi
                .iter()
                .map(|f| {
                    let f = T::from_rational(f);
                    psi.iter().map(|p| f.clone() * p).collect()
                })
                .collect());
        }
        mu.atoms()
            .iter()
            .map(|a| nu.atoms().iter().map(|b| self.eval(&a.x, &b.x)).collect())
            .collect()
    }

    /// `∫ c dπ`. Separable tables are aligned with the plan's own marginals.
    pub fn plan_cost<T: Scalar>(&self, pi: &Coupling<T>) -> Result<T> {
        match self {
            CostSpec::Separable(tab) => {
                tab.validate(pi.source(), pi.target())?;
                pi.total_cost_indexed(|i, j| T::from_rational(&tab.phi[i]) * T::from_rational(&tab.psi[j]))
            }
            // every other variant evaluates on positions without failing
            _ => Ok(pi.total_cost(|x, y| self.eval(x, y).expect("position cost"))),
        }
    }

    /// Coefficients of `h` for the difference costs that are polynomials.
    pub fn polynomial(&self) -> Option<Vec<Rational>> {
        match self {
            CostSpec::PowerDiff(p) => {
                let mut c = vec![Rational::zero(); *p as usize + 1];
                c[*p as usize] = Rational::one();
                Some(c)
            }
            CostSpec::PolyDiff(c) => Some(c.clone()),
            _ => None,
        }
    }

    /// Whether `h′` is strictly convex on the whole line.
    pub fn strict_convex_derivative(&self) -> Result<bool> {
        match self {
            CostSpec::ExpDiff => Ok(true),
            CostSpec::PowerDiff(p) => Ok(*p >= 3 && p % 2 == 1),
            CostSpec::PolyDiff(c) => Ok(third_derivative_nonnegative(c, None)),
            _ => Err(MotError::UnsupportedCost(format!(
                "{self} is not a function of y - x with a smooth profile"
            ))),
        }
    }

    /// Whether `h′` is strictly convex on `[lo, hi]`.
    pub fn strict_convex_derivative_on(&self, lo: f64, hi: f64) -> Result<bool> {
        match self {
            CostSpec::ExpDiff => Ok(true),
            CostSpec::PowerDiff(_) | CostSpec::PolyDiff(_) => {
                let c = self.polynomial().expect("polynomial cost");
                Ok(third_derivative_nonnegative(&c, Some((lo, hi))))
            }
            _ => self.strict_convex_derivative(),
        }
    }

    /// Instance-level check on the hull of `supp ν - supp μ`.
    pub fn strict_convex_derivative_for<T: Scalar>(
        &self,
        mu: &DiscreteMeasure<T>,
        nu: &DiscreteMeasure<T>,
    ) -> Result<bool> {
        let (Some(a), Some(b), Some(c), Some(d)) =
            (mu.min_position(), mu.max_position(), nu.min_position(), nu.max_position())
        else {
            return self.strict_convex_derivative();
        };
        let lo = c.to_f64() - b.to_f64();
        let hi = d.to_f64() - a.to_f64();
        self.strict_convex_derivative_on(lo, hi)
    }
}

fn horner<T: Scalar>(c: &[Rational], t: &T) -> T {
    let mut acc = T::zero();
    for k in c.iter().rev() {
        acc = acc * t + T::from_rational(k);
    }
    acc
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * t + v)
}

fn trim(mut c: Vec<f64>) -> Vec<f64> {
    while c.last() == Some(&0.0) {
        c.pop();
    }
    c
}

/// Real roots of `c` in `(lo, hi)`, isolated between the roots of `c′`.
fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(c.to_vec());
    if c.len() <= 1 {
        return Vec::new();
    }
    let mut pts = vec![lo];
    pts.extend(real_roots(&derivative(&c), lo, hi));
    pts.push(hi);
    let mut roots = Vec::new();
    for w in pts.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (fa, fb) = (poly_eval(&c, a), poly_eval(&c, b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if poly_eval(&c, m) * fa > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
    roots
}

/// `h‴ ≥ 0` and `h‴ ≢ 0`, on the whole line or on an interval.
fn third_derivative_nonnegative(c: &[Rational], range: Option<(f64, f64)>) -> bool {
    let c: Vec<f64> = c.iter().map(|v| v.to_f64()).collect();
    let h3 = trim(derivative(&derivative(&derivative(&c))));
    if h3.is_empty() {
        return false;
    }
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let lead = h3[h3.len() - 1].abs();
            let bound = 1.0 + h3.iter().map(|v| v.abs() / lead).fold(0.0, f64::max);
            if h3.len() % 2 == 0 && h3.len() > 1 {
                // odd degree: changes sign at infinity
                return false;
            }
            if h3[h3.len() - 1] < 0.0 {
                return false;
            }
            (-bound - 1.0, bound + 1.0)
        }
    };
    let scale = h3.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut pts = vec![lo, hi];
    let roots = real_roots(&h3, lo, hi);
    pts.extend(roots.iter().copied());
    pts.sort_by(f64::total_cmp);
    let mut probes = pts.clone();
    for w in pts.windows(2) {
        probes.push(0.5 * (w[0] + w[1]));
    }
    probes.iter().all(|&t| poly_eval(&h3, t) >= -1e-12 * scale)
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::PowerDiff(p) => write!(f, "pow:{p}"),
            CostSpec::AbsDiff => write!(f, "abs"),
            CostSpec::NegAbsDiff => write!(f, "neg-abs"),
            CostSpec::ExpDiff => write!(f, "exp"),
            CostSpec::PolyDiff(c) => {
                let parts: Vec<String> = c.iter().map(format_rational).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            CostSpec::Separable(t) => match &t.source {
                Some(p) => write!(f, "sep:{}", p.display()),
                None => write!(f, "sep:<inline>"),
            },
            CostSpec::Indicator(s, t) => write!(f, "ind:{},{}", format_rational(s), format_rational(t)),
        }
    }
}

fn parse_err(position: usize, message: impl Into<String>) -> MotError {
    MotError::Parse {
        position,
        message: message.into(),
    }
}

/// Parses a list of rationals starting at byte offset `base` of the cost string.
fn parse_list(body: &str, base: usize) -> Result<Vec<Rational>> {
    let mut out = Vec::new();
    let mut offset = base;
    for part in body.split(',') {
        let v = Rational::parse_str(part).ok_or_else(|| parse_err(offset, format!("expected a number, found {part:?}")))?;
        out.push(v);
        offset += part.len() + 1;
    }
    Ok(out)
}

pub fn parse_cost(spec: &str) -> Result<CostSpec> {
    let spec = spec.trim();
    let (head, body) = match spec.split_once(':') {
        Some((h, b)) => (h, Some(b)),
        None => (spec, None),
    };
    let base = head.len() + 1;
    let need_body = || body.filter(|b| !b.is_empty()).ok_or_else(|| parse_err(spec.len(), format!("`{head}` needs an argument")));
    let no_body = |c: CostSpec| match body {
        None => Ok(c),
        Some(_) => Err(parse_err(head.len(), format!("`{head}` takes no argument"))),
    };
    match head {
        "pow" => {
            let b = need_body()?;
            match b.trim().parse::<u32>() {
                Ok(p) if p >= 1 => Ok(CostSpec::PowerDiff(p)),
                _ => Err(parse_err(base, format!("exponent must be a positive integer, found {b:?}"))),
            }
        }
        "abs" => no_body(CostSpec::AbsDiff),
        "neg-abs" => no_body(CostSpec::NegAbsDiff),
        "exp" => no_body(CostSpec::ExpDiff),
        "poly" => Ok(CostSpec::PolyDiff(parse_list(need_body()?, base)?)),
        "ind" => {
            let v = parse_list(need_body()?, base)?;
            match v.as_slice() {
                [s, t] => Ok(CostSpec::Indicator(s.clone(), t.clone())),
                _ => Err(parse_err(base, "expected two numbers `s,t`")),
            }
        }
        "sep" => {
            let path = need_body()?;
            let tab = SeparableTables::from_file(Path::new(path)).map_err(|e| parse_err(base, e.to_string()))?;
            Ok(CostSpec::Separable(tab))
        }
        _ => Err(parse_err(0, format!("unknown cost `{head}`"))),
    }
}

impl std::str::FromStr for CostSpec {
    type Err = MotError;

    fn from_str(s: &str) -> Result<Self> {
        parse_cost(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::make_measure;
    use crate::scalar::q;

    fn r(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(CostSpec::PowerDiff(4).eval(&r(1), &r(-2)).unwrap(), r(81));
        assert_eq!(CostSpec::PowerDiff(3).eval(&r(1), &r(-2)).unwrap(), r(-27));
        assert_eq!(CostSpec::NegAbsDiff.eval(&q(3, 7), &q(3, 7)).unwrap(), r(0));
        let ind = CostSpec::Indicator(r(0), r(1));
        assert_eq!(ind.eval(&r(-1), &r(3)).unwrap(), r(2));
        assert_eq!(ind.eval(&r(1), &r(3)).unwrap(), r(0));
        assert!((CostSpec::ExpDiff.eval(&0.0, &1.0).unwrap() - std::f64::consts::E).abs() < 1e-15);
        let poly = CostSpec::PolyDiff(vec![r(1), r(0), q(1, 2)]);
        assert_eq!(poly.eval(&r(1), &r(3)).unwrap(), r(3));
    }

    #[test]
    fn parse_round_trips() {
        for s in ["pow:4", "abs", "neg-abs", "exp", "poly:1,-1/2,3", "ind:0,1", "ind:-1/3,2"] {
            let c = parse_cost(s).unwrap();
            assert_eq!(c.to_string(), s);
            assert_eq!(parse_cost(&c.to_string()).unwrap(), c);
        }
        assert_eq!(parse_cost("pow:4").unwrap(), CostSpec::PowerDiff(4));
        assert_eq!(parse_cost("ind:0,1").unwrap(), CostSpec::Indicator(r(0), r(1)));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_cost("pow:-1") {
            Err(MotError::Parse { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        match parse_cost("poly:1,x") {
            Err(MotError::Parse { position, .. }) => assert_eq!(position, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_cost("cubic"), Err(MotError::Parse { position: 0, .. })));
        assert!(parse_cost("abs:2").is_err());
        assert!(parse_cost("pow:0").is_err());
        assert!(parse_cost("ind:1").is_err());
        assert!(parse_cost("sep:/nonexistent/tables.json").is_err());
    }

    #[test]
    fn strict_convexity_of_derivative() {
        assert!(CostSpec::ExpDiff.strict_convex_derivative().unwrap());
        assert!(CostSpec::PowerDiff(3).strict_convex_derivative().unwrap());
        assert!(CostSpec::PowerDiff(5).strict_convex_derivative().unwrap());
        assert!(!CostSpec::PowerDiff(4).strict_convex_derivative().unwrap());
        assert!(!CostSpec::PowerDiff(2).strict_convex_derivative().unwrap());
        assert!(CostSpec::AbsDiff.strict_convex_derivative().is_err());
        // h = t³ + t⁴/4: h‴ = 6 + 6t, convex derivative only for t ≥ -1
        let p = CostSpec::PolyDiff(vec![r(0), r(0), r(0), r(1), q(1, 4)]);
        assert!(!p.strict_convex_derivative().unwrap());
        assert!(p.strict_convex_derivative_on(-1.0, 5.0).unwrap());
        assert!(!p.strict_convex_derivative_on(-2.0, 5.0).unwrap());
        // h‴ = 24t² + 6 > 0 everywhere
        let q4 = CostSpec::PolyDiff(vec![r(0), r(0), r(0), r(1), r(0), q(1, 5)]);
        assert!(q4.strict_convex_derivative().unwrap());
        assert!(CostSpec::PowerDiff(4).strict_convex_derivative_on(0.5, 3.0).unwrap());
        assert!(!CostSpec::PowerDiff(4).strict_convex_derivative_on(-3.0, 3.0).unwrap());
    }

    #[test]
    fn roots_are_isolated() {
        // (t - 1)(t + 2)(t - 3)
        let c = [6.0, -5.0, -2.0, 1.0];
        let roots = real_roots(&c, -10.0, 10.0);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((r - e).abs() < 1e-9);
        }
    }

    #[test]
    fn separable_tables() {
        let mu = make_measure(vec![(r(0), q(1, 2)), (r(1), q(1, 2))]).unwrap();
        let nu = make_measure(vec![(r(-1), q(1, 4)), (r(0), q(1, 4)), (r(2), q(1, 2))]).unwrap();
        let tab = SeparableTables::from_json_str(r#"{"phi":[2, "1/2"], "psi":[1, 0.5, 3]}"#).unwrap();
        let c = CostSpec::Separable(tab.clone());
        let m = c.matrix(&mu, &nu).unwrap();
        assert_eq!(m[1][2], q(3, 2));
        assert!(c.eval(&r(0), &r(0)).is_err());
        let bad_phi = SeparableTables::new(vec![r(1), r(2)], tab.psi.clone());
        assert!(CostSpec::Separable(bad_phi).matrix(&mu, &nu).is_err());
        let bad_psi = SeparableTables::new(tab.phi.clone(), vec![r(1), r(3), r(3)]);
        assert!(CostSpec::Separable(bad_psi).matrix(&mu, &nu).is_err());
        let short = SeparableTables::new(tab.phi.clone(), vec![r(1)]);
        assert!(CostSpec::Separable(short).matrix(&mu, &nu).is_err());
        assert!(SeparableTables::from_json_str(r#"{"phi":[1]}"#).is_err());
    }
}
