//! Subcommands of the `mot` binary.
//!
//! Every command returns its standard output as a string together with a
//! verdict; `main` turns the verdict into the exit code (0 pass, 2 failed
//! check, 1 bad input).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mot_core::costs::{parse_cost, CostSpec};
use mot_core::curtain::{is_left_monotone, is_right_monotone, left_curtain_with, right_curtain_with, Coupling};
use mot_core::io::{
    coupling_from_value, coupling_to_value, has_exact_values, maps_to_csv, measure_from_value, measure_to_value,
    parse_document,
};
use mot_core::lp::{solve_classical_matrix, solve_martingale_matrix};
use mot_core::measures::{convex_order_with, extended_order_with, wasserstein1, Wasserstein};
use mot_core::shadow::shadow_with;
use mot_core::variation::{verify_variational, VariationalOptions};
use mot_core::{DiscreteMeasure, MotError, Rational, Result, Scalar, Tolerances};
use serde_json::{json, Value};

use crate::config::Config;
use crate::experiments::{run_many, IDS};

#[derive(Debug, Parser)]
#[command(name = "mot", version, about = "Martingale optimal transport on finitely supported measures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Test convex and extended convex order.
    CheckOrder(Pair),
    /// Shadow of μ in ν, with the remainder and the per-atom windows.
    Shadow {
        #[command(flatten)]
        pair: Pair,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Left or right curtain coupling.
    Curtain {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_enum, default_value_t = Side::Left)]
        side: Side,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the row maps as `x,T1,T2`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Optimal martingale (or classical) plan for a cost.
    Solve {
        #[command(flatten)]
        pair: Pair,
        #[arg(long)]
        cost: String,
        /// Drop the martingale constraint.
        #[arg(long)]
        classical: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the dual certificate.
        #[arg(long)]
        dual: Option<PathBuf>,
    },
    /// Check a plan for variational optimality or left-monotonicity.
    Verify(VerifyArgs),
    /// Run named experiments and print their reports.
    Reproduce(ReproduceArgs),
    /// Kantorovich distance between two measures of equal mass.
    Wasserstein(Pair),
}

#[derive(Debug, Args)]
pub struct Pair {
    #[arg(long)]
    pub mu: PathBuf,
    #[arg(long)]
    pub nu: PathBuf,
    /// Rational arithmetic (also chosen when an input holds quoted numbers).
    #[arg(long)]
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub cost: Option<String>,
    #[arg(long)]
    pub variational: bool,
    #[arg(long, default_value_t = 4)]
    pub points: usize,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of the competitor comparison.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub monotone: bool,
    /// Side for `--monotone`.
    #[arg(long, value_enum, default_value_t = Side::Left)]
    pub side: Side,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub exact: bool,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Experiment id, or `all`.
    pub id: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one setting, e.g. `--set hn-structure.sizes=[60,120]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Write the curtain row maps of `gauss-curtain`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Human-readable text instead of JSON.
    #[arg(long)]
    pub text: bool,
    /// Accepted for symmetry; `quartic-flat` always runs in exact arithmetic.
    #[arg(long)]
    pub exact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug)]
pub struct Output {
    pub stdout: String,
    pub verdict: Verdict,
}

impl Output {
    fn pass(stdout: String) -> Self {
        Self {
            stdout,
            verdict: Verdict::Pass,
        }
    }
}

fn read_doc(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| io_context(path, e))?;
    parse_document(&text).map_err(|e| match e {
        MotError::Json { line, column, message } => MotError::Json {
            line,
            column,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

fn io_context(path: &Path, e: std::io::Error) -> MotError {
    MotError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_context(path, e))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Writes to `path` when given, otherwise returns the text for stdout.
fn emit(path: Option<&Path>, text: String) -> Result<String> {
    match path {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

struct Docs {
    mu: Value,
    nu: Value,
    exact: bool,
}

fn read_pair(pair: &Pair) -> Result<Docs> {
    let mu = read_doc(&pair.mu)?;
    let nu = read_doc(&pair.nu)?;
    let exact = pair.exact || has_exact_values(&mu) || has_exact_values(&nu);
    Ok(Docs { mu, nu, exact })
}

fn measures<T: Scalar>(d: &Docs) -> Result<(DiscreteMeasure<T>, DiscreteMeasure<T>)> {
    Ok((measure_from_value(&d.mu)?, measure_from_value(&d.nu)?))
}

macro_rules! with_scalar {
    ($exact:expr, $f:ident ( $($arg:expr),* )) => {
        if $exact {
            $f::<Rational>($($arg),*)
        } else {
            $f::<f64>($($arg),*)
        }
    };
}

pub fn run(cli: &Cli) -> Result<Output> {
    let tols = Tolerances::default();
    match &cli.command {
        Command::CheckOrder(pair) => {
            let d = read_pair(pair)?;
            with_scalar!(d.exact, check_order(&d, &tols))
        }
        Command::Shadow { pair, output } => {
            let d = read_pair(pair)?;
            with_scalar!(d.exact, shadow_cmd(&d, output.as_deref(), &tols))
        }
        Command::Curtain { pair, side, output, csv } => {
            let d = read_pair(pair)?;
            with_scalar!(d.exact, curtain_cmd(&d, *side, output.as_deref(), csv.as_deref(), &tols))
        }
        Command::Solve {
            pair,
            cost,
            classical,
            output,
            dual,
        } => {
            let d = read_pair(pair)?;
            let cost = parse_cost(cost)?;
            with_scalar!(
                d.exact,
                solve_cmd(&d, &cost, *classical, output.as_deref(), dual.as_deref(), &tols)
            )
        }
        Command::Verify(args) => {
            let doc = read_doc(&args.plan)?;
            let exact = args.exact || has_exact_values(&doc);
            with_scalar!(exact, verify_cmd(&doc, args, &tols))
        }
        Command::Reproduce(args) => reproduce(args),
        Command::Wasserstein(pair) => {
            let d = read_pair(pair)?;
            with_scalar!(d.exact, wasserstein_cmd(&d))
        }
    }
}

fn check_order<T: Scalar>(d: &Docs, tols: &Tolerances) -> Result<Output> {
    let (mu, nu) = measures::<T>(d)?;
    Ok(Output::pass(format!(
        "convex: {}, extended: {}\n",
        convex_order_with(&mu, &nu, tols),
        extended_order_with(&mu, &nu, tols)
    )))
}

fn shadow_cmd<T: Scalar>(d: &Docs, output: Option<&Path>, tols: &Tolerances) -> Result<Output> {
    let (mu, nu) = measures::<T>(d)?;
    let res = shadow_with(&mu, &nu, tols)?;
    let trace: Vec<Value> = res
        .trace
        .iter()
        .map(|t| {
            json!({
                "x": t.x.to_json(),
                "mass": t.mass.to_json(),
                "start": t.start.to_json(),
                "end": t.end.to_json(),
                "window": measure_to_value(&t.window),
            })
        })
        .collect();
    let doc = json!({
        "shadow": measure_to_value(&res.shadow),
        "remainder": measure_to_value(&res.remainder),
        "trace": trace,
    });
    Ok(Output::pass(emit(output, pretty(&doc))?))
}

fn curtain_cmd<T: Scalar>(
    d: &Docs,
    side: Side,
    output: Option<&Path>,
    csv: Option<&Path>,
    tols: &Tolerances,
) -> Result<Output> {
    let (mu, nu) = measures::<T>(d)?;
    let pi = match side {
        Side::Left => left_curtain_with(&mu, &nu, tols)?,
        Side::Right => right_curtain_with(&mu, &nu, tols)?,
    };
    if let Some(p) = csv {
        write_file(p, &maps_to_csv(&pi, &tols.support()))?;
    }
    Ok(Output::pass(emit(output, pretty(&coupling_to_value(&pi)))?))
}

/// Stderr note on whether the left curtain is guaranteed optimal.
fn curtain_optimality_note<T: Scalar>(cost: &CostSpec, mu: &DiscreteMeasure<T>, nu: &DiscreteMeasure<T>) {
    if let Ok(strict) = cost.strict_convex_derivative_for(mu, nu) {
        eprintln!(
            "note: h' strictly convex on supp ν - supp μ (instance-level check): {strict}{}",
            if strict { "" } else { "; the left curtain need not be optimal" }
        );
    }
}

fn solve_cmd<T: Scalar>(
    d: &Docs,
    cost: &CostSpec,
    classical: bool,
    output: Option<&Path>,
    dual: Option<&Path>,
    tols: &Tolerances,
) -> Result<Output> {
    let (mu, nu) = measures::<T>(d)?;
    let c = cost.matrix(&mu, &nu)?;
    let sol = if classical {
        solve_classical_matrix(&mu, &nu, &c, tols)?
    } else {
        curtain_optimality_note(cost, &mu, &nu);
        solve_martingale_matrix(&mu, &nu, &c, tols)?
    };
    let mut doc = coupling_to_value(&sol.plan);
    doc["value"] = sol.value.to_json();
    if let Some(p) = dual {
        let list = |v: &[T]| Value::Array(v.iter().map(Scalar::to_json).collect());
        let cert = &sol.dual;
        let dual_doc = json!({
            "phi": list(&cert.phi),
            "psi": list(&cert.psi),
            "delta": list(&cert.delta),
            "dual_value": cert.dual_value.to_json(),
            "gap": cert.gap.to_json(),
            "min_slack": cert.min_slack(&mu, &nu, &c).to_json(),
        });
        write_file(p, &pretty(&dual_doc))?;
    }
    Ok(Output::pass(emit(output, pretty(&doc))?))
}

fn entries_json<T: Scalar>(entries: &[(T, T, T)]) -> Value {
    Value::Array(
        entries
            .iter()
            .map(|(x, y, w)| json!({"x": x.to_json(), "y": y.to_json(), "w": w.to_json()}))
            .collect(),
    )
}

fn verify_cmd<T: Scalar>(doc: &Value, args: &VerifyArgs, tols: &Tolerances) -> Result<Output> {
    if !args.variational && !args.monotone {
        return Err(MotError::Domain("nothing to verify: pass --variational and/or --monotone".into()));
    }
    let pi: Coupling<T> = coupling_from_value(doc)?;
    let mut out = serde_json::Map::new();
    let mut ok = true;
    if args.variational {
        let spec = args
            .cost
            .as_deref()
            .ok_or_else(|| MotError::Domain("--variational needs --cost".into()))?;
        let cost = parse_cost(spec)?;
        let opts = VariationalOptions {
            max_points: args.points,
            trials: args.trials,
            seed: args.seed,
            tol: args.tol,
            witnesses: Vec::new(),
            jobs: args.jobs,
        };
        let rep = verify_variational(&pi, &cost, &opts)?;
        ok &= rep.passed();
        let violations: Vec<Value> = rep
            .violations
            .iter()
            .map(|v| {
                json!({
                    "alpha": entries_json(v.alpha.entries()),
                    "competitor": entries_json(v.competitor.entries()),
                    "alpha_cost": v.alpha_cost.to_json(),
                    "competitor_value": v.competitor_value.to_json(),
                })
            })
            .collect();
        out.insert(
            "variational".into(),
            json!({
                "passed": rep.passed(),
                "checked": rep.checked,
                "worst_margin": rep.worst_margin,
                "violations": violations,
            }),
        );
    }
    if args.monotone {
        let threshold = tols.support::<T>();
        let witness = match args.side {
            Side::Left => is_left_monotone(&pi, &threshold),
            Side::Right => is_right_monotone(&pi, &threshold),
        };
        ok &= witness.is_none();
        let w = witness.map_or(Value::Null, |w| {
            json!({
                "x": w.x.to_json(),
                "x_prime": w.x_prime.to_json(),
                "y_minus": w.y_minus.to_json(),
                "y_plus": w.y_plus.to_json(),
                "y_prime": w.y_prime.to_json(),
            })
        });
        out.insert("monotone".into(), json!({"passed": w.is_null(), "witness": w}));
    }
    Ok(Output {
        stdout: pretty(&Value::Object(out)),
        verdict: if ok { Verdict::Pass } else { Verdict::Fail },
    })
}

fn wasserstein_cmd<T: Scalar>(d: &Docs) -> Result<Output> {
    let (mu, nu) = measures::<T>(d)?;
    let text = match wasserstein1(&mu, &nu) {
        Wasserstein::Finite(v) => v.to_string(),
        Wasserstein::Infinite => "inf".to_string(),
    };
    Ok(Output::pass(format!("{text}\n")))
}

fn reproduce(args: &ReproduceArgs) -> Result<Output> {
    let config = Config::load(args.config.as_deref(), &args.overrides)?;
    let ids: Vec<&str> = if args.id == "all" {
        IDS.to_vec()
    } else {
        vec![args.id.as_str()]
    };
    let jobs = args.jobs.max(1);
    // One experiment uses the workers itself; several split them.
    let outcomes = if ids.len() == 1 {
        vec![crate::experiments::run(ids[0], &config, jobs)]
    } else {
        run_many(&ids, &config, jobs)
    };
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut csv = None;
    for o in outcomes {
        let o = o?;
        if o.csv.is_some() {
            csv = o.csv;
        }
        reports.push(o.report);
    }
    if let Some(p) = &args.csv {
        let text = csv.ok_or_else(|| MotError::Domain("--csv needs the gauss-curtain experiment".into()))?;
        write_file(p, &text)?;
    }
    let passed = reports.iter().all(|r| r.passed());
    let text = if args.text {
        reports.iter().map(|r| r.to_text()).collect::<Vec<_>>().join("\n")
    } else if reports.len() == 1 {
        reports[0].to_json_string()
    } else {
        let all: Vec<Value> = reports.iter().map(|r| r.to_json()).collect();
        pretty(&json!({"schema": crate::report::SCHEMA, "reports": all}))
    };
    Ok(Output {
        stdout: emit(args.output.as_deref(), text)?,
        verdict: if passed { Verdict::Pass } else { Verdict::Fail },
    })
}
