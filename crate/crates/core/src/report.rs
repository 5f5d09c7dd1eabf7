//! Convergence experiments: `log L_{m,l}(n) / n` against the constant `A`
//! over a grid of `n`, with CSV and JSON renderings.

use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigInt;
use serde::Serialize;

use crate::constants::theorem_constant;
use crate::engine::{factor_window_sieve_with, lcm_fold, log_biguint, log_lcm, window_terms, SieveOptions};
use crate::error::{Error, Result};
use crate::ntk::ProgressionSpec;
use crate::residue::log_lcm_by_intervals;

/// Default cap on the largest window term `b + a·l·n`.
pub const DEFAULT_MAX_SIEVE: u64 = 100_000_000;

pub const CSV_HEADER: &str = "n,log_lcm,ratio,constant,abs_err";

/// How `log L_{m,l}(n)` is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogMethod {
    GcdFold,
    Sieve,
    ThetaIntervals,
}

impl LogMethod {
    pub fn name(self) -> &'static str {
        match self {
            LogMethod::GcdFold => "gcd-fold",
            LogMethod::Sieve => "sieve",
            LogMethod::ThetaIntervals => "theta-intervals",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub max_sieve: u64,
    pub parallel: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            max_sieve: DEFAULT_MAX_SIEVE,
            parallel: true,
        }
    }
}

/// Rejects windows whose largest term exceeds the budget.
pub fn check_budget(spec: &ProgressionSpec, n: i64, max_sieve: u64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
    }
    let top = spec.upper_term(n)?;
    if top as u64 > max_sieve {
        return Err(Error::Resource(format!(
            "largest term b + a*l*n = {top} exceeds the sieve budget {max_sieve} (raise --max-sieve)"
        )));
    }
    Ok(())
}

/// `log L_{m,l}(n)` by the chosen method.
pub fn log_lcm_value(spec: &ProgressionSpec, n: i64, method: LogMethod, opts: &RunOptions) -> Result<f64> {
    check_budget(spec, n, opts.max_sieve)?;
    match method {
        LogMethod::GcdFold => Ok(log_biguint(&lcm_fold(&window_terms(spec, n)?)?)),
        LogMethod::Sieve => {
            let sieve = SieveOptions {
                parallel: opts.parallel,
                ..Default::default()
            };
            Ok(log_lcm(&factor_window_sieve_with(spec, n, &sieve)?))
        }
        LogMethod::ThetaIntervals => log_lcm_by_intervals(spec, n, opts.parallel),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub n: i64,
    pub log_lcm: f64,
    pub ratio: f64,
    pub constant: f64,
    pub abs_err: f64,
}

impl ExperimentRow {
    pub fn new(n: i64, log_lcm: f64, constant: f64) -> Self {
        let ratio = log_lcm / n as f64;
        Self {
            n,
            log_lcm,
            ratio,
            constant,
            abs_err: (ratio - constant).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMeta {
    pub a: i64,
    pub b: i64,
    pub l: i64,
    pub m: i64,
    pub method: String,
    /// Exact constant, e.g. `"9/4"`.
    pub constant_exact: String,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub meta: ReportMeta,
    pub rows: Vec<ExperimentRow>,
}

/// Runs `log L / n` over `n_grid` (strictly ascending, positive).
pub fn converge(
    spec: &ProgressionSpec,
    n_grid: &[i64],
    method: LogMethod,
    opts: &RunOptions,
) -> Result<ExperimentReport> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("empty n grid".into()));
    }
    if n_grid[0] < 1 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n grid must be strictly ascending positive integers".into(),
        ));
    }
    check_budget(spec, *n_grid.last().unwrap(), opts.max_sieve)?;
    let constant = theorem_constant::<BigInt>(spec)?;
    let a = constant.to_f64();
    let rows = n_grid
        .iter()
        .map(|&n| Ok(ExperimentRow::new(n, log_lcm_value(spec, n, method, opts)?, a)))
        .collect::<Result<Vec<_>>>()?;
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    Ok(ExperimentReport {
        meta: ReportMeta {
            a: spec.a,
            b: spec.b,
            l: spec.l,
            m: spec.m,
            method: method.name().to_string(),
            constant_exact: constant.value.to_string(),
            timestamp,
        },
        rows,
    })
}

impl ExperimentReport {
    /// `n,log_lcm,ratio,constant,abs_err`, 12 significant digits, LF endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n,
                fmt_sig(r.log_lcm, 12),
                fmt_sig(r.ratio, 12),
                fmt_sig(r.constant, 12),
                fmt_sig(r.abs_err, 12)
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Positional decimal with `sig` significant digits (display only).
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sig = sig.max(1);
    // scientific formatting does the correct rounding for us
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp >= 0 {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.push_str(&"0".repeat(int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    } else {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(&digits);
    }
    out
}
