//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input or resource limits, 2 when
//! two independent computations disagree.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use crate::constants::theorem_constant;
use crate::engine::{
    factor_reduced_window, factor_window_sieve_with, lcm_fold, log_biguint, log_lcm, squarefull_split,
    window_terms, PrimePowerMap, SieveOptions,
};
use crate::error::{Error, Result};
use crate::ntk::{normalize, ProgressionSpec};
use crate::report::{check_budget, converge, fmt_sig, log_lcm_value, LogMethod, RunOptions, DEFAULT_MAX_SIEVE};
use crate::residue::{build_family, estimate_log_lcm, factor_by_intervals, theta, Location};
use crate::verify;

#[derive(Debug, Parser)]
#[command(name = "lcmlab", version, about = "lcm of arithmetic-progression windows and its growth constant")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Worker threads for the sieve and per-class sums.
    #[arg(long, global = true, env = "LCMLAB_THREADS")]
    threads: Option<usize>,

    /// Largest window term b + a*l*n that may be sieved.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_SIEVE)]
    max_sieve: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    GcdFold,
    Sieve,
    ThetaIntervals,
}

impl From<MethodArg> for LogMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::GcdFold => LogMethod::GcdFold,
            MethodArg::Sieve => LogMethod::Sieve,
            MethodArg::ThetaIntervals => LogMethod::ThetaIntervals,
        }
    }
}

#[derive(Debug, Args)]
struct SpecArgs {
    #[arg(long, allow_negative_numbers = true)]
    a: i64,
    #[arg(long, allow_negative_numbers = true)]
    b: i64,
    #[arg(long, allow_negative_numbers = true)]
    l: i64,
    #[arg(long, allow_negative_numbers = true)]
    m: i64,
}

impl SpecArgs {
    fn spec(&self) -> Result<ProgressionSpec> {
        normalize(self.a, self.b, self.l, self.m)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The exact constant A with its per-residue breakdown.
    Constant {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// The exact lcm of the window.
    Lcm {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, value_enum, default_value_t = MethodArg::Sieve)]
        method: MethodArg,
    },
    /// log of the lcm, its first-power/squarefull split and the predicted main term.
    Logl {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, value_enum, default_value_t = MethodArg::Sieve)]
        method: MethodArg,
    },
    /// Prime support of the lcm with exponents and interval locations.
    Primes {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
    },
    /// Chebyshev theta(x; h, k).
    Theta {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        h: i64,
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
    },
    /// log L / n against A over a grid of n.
    Converge {
        #[command(flatten)]
        spec: SpecArgs,
        /// Comma-separated, e.g. 10^3,10^4,50000.
        #[arg(long)]
        n_grid: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Sieve)]
        method: MethodArg,
    },
    /// Check every exact identity over built-in grids.
    Verify {
        #[arg(long, conflicts_with = "grid_full")]
        grid_small: bool,
        #[arg(long)]
        grid_full: bool,
    },
}

/// Parses `10^3,10^4,2500` into `[1000, 10000, 2500]`.
pub fn parse_n_grid(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let bad = || Error::InvalidArgument(format!("bad n-grid entry {tok:?}"));
            match tok.split_once('^') {
                Some((base, exp)) => {
                    let base: i64 = base.trim().parse().map_err(|_| bad())?;
                    let exp: u32 = exp.trim().parse().map_err(|_| bad())?;
                    base.checked_pow(exp).ok_or_else(bad)
                }
                None => tok.parse().map_err(|_| bad()),
            }
        })
        .collect()
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Inconsistency(_) => 2,
        _ => 1,
    }
}

/// Runs the CLI with the process's stdio. Returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs the CLI writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{rendered}")
            } else {
                write!(err, "{rendered}")
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Resource(e.to_string()))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    };
    match result.and_then(|body| emit(&cli, &body, out)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(cli: &Cli, body: &str, out: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Resource(format!("write failed: {e}"));
    match &cli.output {
        Some(path) => std::fs::write(path, body).map_err(io),
        None => out.write_all(body.as_bytes()).map_err(io),
    }
}

fn json_body<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn spec_json(s: &ProgressionSpec) -> serde_json::Value {
    json!({
        "a": s.a, "b": s.b, "l": s.l, "m": s.m,
        "d": s.d, "a1": s.a1, "b1": s.b1, "b0": s.b0, "q": s.q,
    })
}

fn require_json(cli: &Cli, what: &str) -> Result<()> {
    if cli.format == Format::Csv {
        return Err(Error::InvalidArgument(format!("{what} has no CSV form; use --format json")));
    }
    Ok(())
}

fn run_opts(cli: &Cli) -> RunOptions {
    RunOptions {
        max_sieve: cli.max_sieve,
        parallel: true,
    }
}

fn exact_map(spec: &ProgressionSpec, n: i64, method: MethodArg) -> Result<Option<PrimePowerMap>> {
    Ok(match method {
        MethodArg::GcdFold => None,
        MethodArg::Sieve => Some(factor_window_sieve_with(spec, n, &SieveOptions::default())?),
        MethodArg::ThetaIntervals => Some(factor_by_intervals(spec, n)?),
    })
}

fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Constant { spec } => {
            let s = spec.spec()?;
            let c = theorem_constant::<BigInt>(&s)?;
            match cli.format {
                Format::Json => {
                    let breakdown: Vec<_> = c
                        .breakdown
                        .iter()
                        .map(|(r, t)| {
                            json!({
                                "r": r,
                                "K_r": t.k,
                                "A_r": t.a_r.to_string(),
                                "A_r_float": crate::rational_to_f64(&t.a_r),
                            })
                        })
                        .collect();
                    Ok(json_body(&json!({
                        "spec": spec_json(&s),
                        "A": c.value.to_string(),
                        "A_float": c.to_f64(),
                        "A_display": fmt_sig(c.to_f64(), 12),
                        "phi": c.phi,
                        "modulus": c.modulus,
                        "breakdown": breakdown,
                    })))
                }
                Format::Csv => {
                    let mut body = String::from("r,K_r,A_r,A_r_float\n");
                    for (r, t) in &c.breakdown {
                        body.push_str(&format!(
                            "{},{},{},{}\n",
                            r,
                            t.k,
                            t.a_r,
                            fmt_sig(crate::rational_to_f64(&t.a_r), 12)
                        ));
                    }
                    Ok(body)
                }
            }
        }
        Command::Lcm { spec, n, method } => {
            require_json(cli, "lcm")?;
            let s = spec.spec()?;
            check_budget(&s, *n, cli.max_sieve)?;
            let value = match exact_map(&s, *n, *method)? {
                Some(map) => map.reconstruct(),
                None => lcm_fold(&window_terms(&s, *n)?)?,
            };
            let digits = value.to_string();
            Ok(json_body(&json!({
                "spec": spec_json(&s),
                "n": n,
                "method": LogMethod::from(*method).name(),
                "lcm": digits,
                "digits": digits.len(),
                "log_lcm": log_biguint(&value),
            })))
        }
        Command::Logl { spec, n, method } => {
            require_json(cli, "logl")?;
            let s = spec.spec()?;
            let value = log_lcm_value(&s, *n, (*method).into(), &run_opts(cli))?;
            let estimate = estimate_log_lcm(&s, *n)?;
            let c = theorem_constant::<BigInt>(&s)?;
            let mut body = json!({
                "spec": spec_json(&s),
                "n": n,
                "method": LogMethod::from(*method).name(),
                "log_lcm": value,
                "ratio": value / *n as f64,
                "A": c.value.to_string(),
                "A_float": c.to_f64(),
                "estimate": estimate,
                "log_d": (s.d as f64).ln(),
            });
            if *method == MethodArg::Sieve {
                let reduced = factor_reduced_window(&s, *n, &SieveOptions::default())?;
                let split = squarefull_split(&reduced, s.upper_term(*n)? as u64);
                if !split.bound_respected {
                    return Err(Error::Inconsistency(
                        "a squarefull prime exceeds the square-root bound".into(),
                    ));
                }
                body["first_power_sum"] = json!(split.first_power_sum);
                body["correction"] = json!(split.correction);
            }
            Ok(json_body(&body))
        }
        Command::Primes { spec, n } => {
            let s = spec.spec()?;
            check_budget(&s, *n, cli.max_sieve)?;
            let map = factor_window_sieve_with(&s, *n, &SieveOptions::default())?;
            let reduced = factor_reduced_window(&s, *n, &SieveOptions::default())?;
            let mut families = std::collections::BTreeMap::new();
            let mut rows = Vec::new();
            for (p, e) in map.iter() {
                let (class, location) = if reduced.exponent(p) == 0 {
                    (None, "gcd".to_string())
                } else {
                    let r = if s.a1 == 1 { 1 } else { (p % s.a1 as u64) as i64 };
                    if let std::collections::btree_map::Entry::Vacant(e) = families.entry(r) {
                        e.insert(build_family(&s, *n, r)?);
                    }
                    let loc = match families[&r].locate(p as i64)? {
                        Some(Location::Base) => "base".to_string(),
                        Some(Location::Rung(i)) => format!("rung:{i}"),
                        None => {
                            return Err(Error::Inconsistency(format!(
                                "prime {p} divides the window but lies in no interval"
                            )))
                        }
                    };
                    (Some(r), loc)
                };
                rows.push((p, e, class, location));
            }
            match cli.format {
                Format::Json => {
                    let primes: Vec<_> = rows
                        .iter()
                        .map(|(p, e, c, loc)| json!({"p": p, "e": e, "class": c, "location": loc}))
                        .collect();
                    Ok(json_body(&json!({
                        "spec": spec_json(&s),
                        "n": n,
                        "count": primes.len(),
                        "log_lcm": log_lcm::<f64>(&map),
                        "primes": primes,
                    })))
                }
                Format::Csv => {
                    let mut body = String::from("p,e,class,location\n");
                    for (p, e, c, loc) in rows {
                        let c = c.map(|c| c.to_string()).unwrap_or_default();
                        body.push_str(&format!("{p},{e},{c},{loc}\n"));
                    }
                    Ok(body)
                }
            }
        }
        Command::Theta { x, h, k } => {
            if *x > cli.max_sieve as f64 {
                return Err(Error::Resource(format!(
                    "x = {x} exceeds the sieve budget {}",
                    cli.max_sieve
                )));
            }
            let t = theta(*x, *h, *k)?;
            match cli.format {
                Format::Json => Ok(json_body(&json!({"x": x, "h": h, "k": k, "theta": t}))),
                Format::Csv => Ok(format!("x,h,k,theta\n{},{h},{k},{}\n", fmt_sig(*x, 12), fmt_sig(t, 12))),
            }
        }
        Command::Converge { spec, n_grid, method } => {
            let s = spec.spec()?;
            let grid = parse_n_grid(n_grid)?;
            let report = converge(&s, &grid, (*method).into(), &run_opts(cli))?;
            match cli.format {
                Format::Json => {
                    let mut body = report.to_json();
                    body.push('\n');
                    Ok(body)
                }
                Format::Csv => Ok(report.to_csv()),
            }
        }
        Command::Verify { grid_small: _, grid_full } => {
            let grid = if *grid_full {
                verify::Grid::FULL
            } else {
                verify::Grid::SMALL
            };
            let outcome = verify::run(grid)?;
            if outcome.passed() {
                Ok(format!("all {} checks passed\n", outcome.checks))
            } else {
                Err(Error::Inconsistency(format!(
                    "{} of {} checks failed:\n{}",
                    outcome.failures.len(),
                    outcome.checks,
                    outcome.failures.join("\n")
                )))
            }
        }
    }
}
