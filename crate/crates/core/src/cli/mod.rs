//! `monotone-gap` command line: argument handling, command dispatch and exit codes.
//!
//! Exit codes: 0 completed (including exhausted searches and `NotPsd`
//! verdicts), 1 internal error, 2 usage or parse error, 3 domain error,
//! 4 invalid certificate.

pub mod parse;
pub mod report;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dobsch::{
    default_alpha_rat, gap_certificate_with, summary, AlphaEstimate, DEFAULT_ALPHA_TOL,
};
use crate::error::{Error, Result};
use crate::exactpoly::rational::{format_rational, parse_rational, rat};
use crate::exactpoly::Rational;
use crate::loewner::{alpha_loewner_seeded, loewner_matrix, LoewnerWitness, SearchOutcome};
use crate::numfalsify::{falsify, FalsifyOutcome};
use crate::psdcert::{det_exact, is_psd, Definiteness};
use crate::transport::{
    convex_gap_function, gap_function, interval_bijection, sample_points, Interval,
};
use parse::{parse_function, parse_rational_list};
use report::{envelope, float, rational};

pub const SEED_ENV: &str = "MONOTONE_GAP_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "monotone-gap",
    version,
    about = "Certificates and falsifiers for matrix monotone gap functions"
)]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub output: Format,
    /// Worker threads; results do not depend on this value.
    #[arg(long, default_value_t = 1, global = true)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dobsch,
    Loewner,
    Both,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact gap certificate for g(n).
    Certify {
        #[arg(long)]
        n: usize,
        /// Width of the bracket around the Dobsch radius.
        #[arg(long, default_value_t = DEFAULT_ALPHA_TOL)]
        tol: f64,
    },
    /// Lower (Dobsch) and upper (Loewner) bounds on the monotonicity radius.
    Alpha {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Node tuples per Loewner search.
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random matrix-pair search for a monotonicity failure.
    Falsify {
        #[arg(long = "fn")]
        function: String,
        /// Matrix order tested; `--dim` takes precedence.
        #[arg(long, default_value_t = 2)]
        order: usize,
        /// `lo,hi`, `lo,inf` or bracket syntax.
        #[arg(long, default_value = "0,inf", allow_hyphen_values = true)]
        interval: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Exact Loewner matrix and PSD verdict at given nodes.
    Loewner {
        #[arg(long = "fn")]
        function: String,
        /// Comma separated rationals.
        #[arg(long, allow_hyphen_values = true)]
        nodes: String,
    },
    /// Gap function g(n) transported onto a target interval.
    Transport {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target: String,
        /// Rational radius inside the certified one; defaults to the largest k/64 below it.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Matrix convexity gap built from the transported gap function.
    Convex {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        target: String,
        #[arg(long)]
        alpha: Option<String>,
    },
}

/// Rendered report and exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Syntax { .. } => EXIT_USAGE,
        Error::Domain(_)
        | Error::UnsupportedIntervalPair(_)
        | Error::SamplingExhausted(_)
        | Error::ConversionFailed(_) => EXIT_DOMAIN,
        Error::Internal(_) => EXIT_INTERNAL,
    }
}

/// Flag first, then the environment variable, then 0.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<u64> {
    match (flag, env) {
        (Some(s), _) => Ok(s),
        (None, Some(v)) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
        }),
        (None, None) => Ok(0),
    }
}

fn env_seed(flag: Option<u64>) -> Result<u64> {
    resolve_seed(flag, std::env::var(SEED_ENV).ok().as_deref())
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => return failure(&Error::Internal(format!("thread pool: {e}"))),
    };
    match pool.install(|| execute(&cli.command)) {
        Ok((report, code)) => Outcome {
            stdout: match cli.output {
                Format::Json => {
                    serde_json::to_string_pretty(&report).expect("serializable report") + "\n"
                }
                Format::Text => report::to_text(&report) + "\n",
            },
            stderr: String::new(),
            code,
        },
        Err(e) => failure(&e),
    }
}

fn failure(e: &Error) -> Outcome {
    Outcome {
        stdout: String::new(),
        stderr: format!("monotone-gap: {e}\n"),
        code: exit_code(e),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code,
                }
            }
        }
    }
}

fn execute(cmd: &Command) -> Result<(Value, i32)> {
    match cmd {
        Command::Certify { n, tol } => certify(*n, *tol),
        Command::Alpha {
            n,
            method,
            tol,
            budget,
            seed,
        } => alpha(*n, *method, *tol, *budget, *seed),
        Command::Falsify {
            function,
            order,
            interval,
            trials,
            seed,
            dim,
        } => falsify_cmd(function, dim.unwrap_or(*order), interval, *trials, *seed),
        Command::Loewner { function, nodes } => loewner_cmd(function, nodes),
        Command::Transport { n, target, alpha } => {
            transport_cmd("transport", *n, target, alpha.as_deref())
        }
        Command::Convex { n, target, alpha } => {
            transport_cmd("convex", *n, target, alpha.as_deref())
        }
    }
}

fn require_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    Ok(())
}

fn alpha_estimate_json(a: &AlphaEstimate) -> Value {
    json!({
        "value": float(a.value),
        "bracket": a.bracket.as_ref().map_or(Value::Null, report::bracket),
        "minor_index": a.minor_index,
    })
}

fn certify(n: usize, tol: f64) -> Result<(Value, i32)> {
    require_n(n)?;
    let c = gap_certificate_with(n, tol)?;
    let hankel = crate::dobsch::hankel_at_zero(n)?;
    let h = &c.hypothesis;
    let result = json!({
        "n": n,
        "status": if c.is_valid() { "VALID" } else { "INVALID" },
        "failures": c.failures,
        "summary": summary(&c),
        "hankel": {
            "matrix": report::rational_matrix(&hankel),
            "pd": report::verdict(&c.hankel_pd),
        },
        "alpha_dobsch": alpha_estimate_json(&c.alpha),
        "alpha_rat": rational(&c.alpha_rat),
        "alpha_rat_covered": c.alpha_rat_covered,
        "trailing_block": if n >= 2 {
            json!({
                "matrix": report::poly_matrix(&crate::dobsch::trailing_block(n)?),
                "matches_closed_form": c.trailing_matches_closed_form,
                "not_psd_at_0": c.trailing_not_psd.as_ref().map_or(Value::Null, report::verdict),
            })
        } else {
            Value::Null
        },
        "trailing_det": c.trailing_det.as_ref().map_or(Value::Null, |d| match d.as_constant() {
            Some(v) => rational(&v),
            None => report::poly(d),
        }),
        "expected_trailing_det": if n >= 2 { rational(&crate::dobsch::expected_trailing_det(n)) } else { Value::Null },
        "order2_search": c.order2_search.as_ref().map_or(Value::Null, search_json),
        "hypothesis": {
            "derivative_order": h.derivative_order,
            "derivative": report::poly(&h.derivative),
            "interval": h.interval.to_string(),
            "positive": h.positive,
            "convex": h.convex,
            "positivity_witness": h.positivity_witness.as_ref().map_or(Value::Null, rational),
            "convexity_witness": h.convexity_witness.as_ref().map_or(Value::Null, rational),
        },
    });
    let code = if c.is_valid() { EXIT_OK } else { EXIT_INVALID };
    Ok((
        envelope("certify", json!({ "n": n, "tol": tol }), result, None),
        code,
    ))
}

fn search_json(s: &SearchOutcome) -> Value {
    match s {
        SearchOutcome::Witness {
            witness,
            tuple_index,
        } => {
            json!({ "kind": "witness", "tuple_index": tuple_index, "witness": report::loewner_witness(witness) })
        }
        SearchOutcome::Exhausted { tuples } => json!({ "kind": "exhausted", "tuples": tuples }),
    }
}

/// Nodes of the hand-checked order-2 violation of g(2).
pub fn reference_nodes() -> Vec<Rational> {
    vec![rat(13, 20), rat(17, 20)]
}

fn alpha(
    n: usize,
    method: Method,
    tol: f64,
    budget: u64,
    seed: Option<u64>,
) -> Result<(Value, i32)> {
    require_n(n)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("--tol must be positive".into()));
    }
    let use_dobsch = method != Method::Loewner;
    let use_loewner = method != Method::Dobsch;
    let seed = if use_loewner {
        Some(env_seed(seed)?)
    } else {
        None
    };
    let mut result = serde_json::Map::new();
    result.insert("n".into(), json!(n));
    let lower = if use_dobsch {
        let a = crate::dobsch::alpha_dobsch(n, tol)?;
        result.insert("dobsch".into(), alpha_estimate_json(&a));
        Some(a.value)
    } else {
        None
    };
    let upper = if use_loewner {
        let a = alpha_loewner_seeded(n, tol, budget, seed.expect("seeded"))?;
        result.insert(
            "loewner".into(),
            json!({
                "value": float(a.value),
                "bound": a.bound.as_ref().map_or(Value::Null, rational),
                "witness": a.witness.as_ref().map_or(Value::Null, report::loewner_witness),
                "searches": a.probes.len(),
            }),
        );
        Some(a.value)
    } else {
        None
    };
    let discrepancy = match (lower, upper) {
        (Some(l), Some(u)) if l.is_finite() && u.is_finite() => (u - l).abs() > 10.0 * tol,
        (Some(l), Some(u)) => l.is_finite() != u.is_finite(),
        _ => false,
    };
    result.insert(
        "bracket".into(),
        json!({
            "lower": lower.map_or(Value::Null, float),
            "upper": upper.map_or(Value::Null, float),
            "discrepancy": discrepancy,
        }),
    );
    if n == 2 {
        let g2 = crate::transport::FunctionExpr::gn(2)?;
        let nodes = reference_nodes();
        let l = loewner_matrix(&g2, &nodes)?;
        let w = LoewnerWitness::at(&g2, &nodes)?;
        result.insert(
            "reference_witness".into(),
            json!({
                "nodes": report::rationals(&nodes),
                "determinant": rational(&det_exact(&l.entries)),
                "verified": w.as_ref().map(LoewnerWitness::verify).transpose()?.unwrap_or(false),
            }),
        );
        result.insert("published_value_discrepancy".into(), json!(true));
        result.insert(
            "published_value_note".into(),
            json!(
                "A largest radius of 1 for n = 2 is inconsistent with exact arithmetic: the Loewner \
                 matrix of g(2) at nodes 13/20, 17/20 has determinant -71/45000, so g(2) is not \
                 monotone of order 2 on [0, c) for any c > 17/20, and det M_2(g_2; t) = (1 - 2t^2)/3 \
                 vanishes at 1/sqrt(2). Both bounds are reported."
            ),
        );
    }
    let inputs = json!({
        "n": n,
        "method": format!("{method:?}").to_lowercase(),
        "tol": tol,
        "budget": budget,
    });
    Ok((
        envelope("alpha", inputs, Value::Object(result), seed),
        EXIT_OK,
    ))
}

fn falsify_cmd(
    function: &str,
    dim: usize,
    interval: &str,
    trials: u64,
    seed: Option<u64>,
) -> Result<(Value, i32)> {
    let f = parse_function(function)?;
    let i = Interval::parse_bare(interval)?;
    f.check_domain(&i)?;
    let seed = env_seed(seed)?;
    let inputs = json!({
        "fn": f.to_string(),
        "dim": dim,
        "interval": i.to_string(),
        "trials": trials,
    });
    let result = match falsify(&f, dim, &i, trials, seed)? {
        FalsifyOutcome::Witness(w) => json!({
            "kind": "witness",
            "witness": report::pair_witness(&w),
            "revalidation": report::pair_check(&w.validate()?),
        }),
        FalsifyOutcome::Exhausted { trials } => json!({ "kind": "exhausted", "trials": trials }),
    };
    Ok((envelope("falsify", inputs, result, Some(seed)), EXIT_OK))
}

fn loewner_cmd(function: &str, nodes: &str) -> Result<(Value, i32)> {
    let f = parse_function(function)?;
    let nodes = parse_rational_list(nodes)?;
    let l = loewner_matrix(&f, &nodes)?;
    let v = is_psd(&l.entries)?;
    let inputs = json!({ "fn": f.to_string(), "nodes": report::rationals(&nodes) });
    let result = json!({
        "matrix": report::rational_matrix(&l.entries),
        "determinant": rational(&det_exact(&l.entries)),
        "verdict": v.kind.name(),
        "psd": v.kind != Definiteness::NotPsd,
        "failing_minor": v.witness.as_ref().map_or(Value::Null, report::psd_witness),
    });
    Ok((envelope("loewner", inputs, result, None), EXIT_OK))
}

fn transport_cmd(
    command: &str,
    n: usize,
    target: &str,
    alpha: Option<&str>,
) -> Result<(Value, i32)> {
    require_n(n)?;
    let i = Interval::parse(target)?;
    let alpha_rat = match alpha {
        Some(s) => parse_rational(s)?,
        None => default_alpha_rat(
            &crate::dobsch::alpha_dobsch(n, DEFAULT_ALPHA_TOL)?,
            DEFAULT_ALPHA_TOL,
        ),
    };
    let f = if command == "convex" {
        convex_gap_function(n, &i, &alpha_rat)?
    } else {
        gap_function(n, &i, &alpha_rat)?
    };
    let base = Interval::closed_open(Rational::from_integer(0.into()), alpha_rat.clone())?;
    let pair = interval_bijection(&base, &i)?;
    let samples: Vec<Value> = sample_points(&i)
        .iter()
        .map(|t| Ok(json!({ "t": rational(t), "value": rational(&f.eval(t)?) })))
        .collect::<Result<_>>()?;
    let result = json!({
        "expression": f.to_string(),
        "interval": i.to_string(),
        "alpha_rat": rational(&alpha_rat),
        "bijection": {
            "forward": pair.forward.to_string(),
            "inverse": pair.inverse.to_string(),
            "round_trip_verified": pair.verify(20)?,
        },
        "samples": samples,
    });
    let inputs = json!({ "n": n, "target": i.to_string(), "alpha": format_rational(&alpha_rat) });
    Ok((envelope(command, inputs, result, None), EXIT_OK))
}
