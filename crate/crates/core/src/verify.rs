//! Grid verification behind the `verify` subcommand: every exact identity
//! the library relies on, checked against brute force over small grids.

use std::collections::BTreeSet;

use num_bigint::BigInt;

use crate::constants::{
    corollary1_constant, corollary2_constant, first_branch, residue_constant_rungs, theorem_constant,
};
use crate::engine::{factor_window_sieve, lcm_fold, log_lcm, squarefull_split, trial_factor, window_terms};
use crate::error::Result;
use crate::ntk::{gcd, normalize, residue_set, ProgressionSpec};
use crate::residue::{build_family, finite_form_valid, IntervalFamily, Method, ResidueSums};
use crate::sieve::primes_up_to;
use crate::Rational;

/// Largest `n` for each family of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    pub oracle_max_n: i64,
    pub characterization_max_n: i64,
}

impl Grid {
    pub const SMALL: Grid = Grid {
        oracle_max_n: 12,
        characterization_max_n: 30,
    };
    pub const FULL: Grid = Grid {
        oracle_max_n: 50,
        characterization_max_n: 200,
    };
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl Outcome {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Specs with `a ≤ 6`, `−5 ≤ b ≤ 6`, `a + b ≥ 1`, `0 ≤ m < l ≤ 4`; `d > 1`
/// included.
pub fn oracle_specs() -> Vec<ProgressionSpec> {
    let mut out = Vec::new();
    for a in 1..=6 {
        for b in -5..=6 {
            for l in 1..=4 {
                for m in 0..l {
                    if let Ok(s) = normalize(a, b, l, m) {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// Specs with `a ≤ 5`, `|b| ≤ 5`, `gcd(a, b) = 1`, `a + b ≥ 1`,
/// `0 ≤ m < l ≤ 4`.
pub fn characterization_specs() -> Vec<ProgressionSpec> {
    let mut out = Vec::new();
    for a in 1..=5 {
        for b in -5..=5 {
            if gcd(a, b) != 1 {
                continue;
            }
            for l in 1..=4 {
                for m in 0..l {
                    if let Ok(s) = normalize(a, b, l, m) {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

fn brute_support(terms: &[u64]) -> BTreeSet<u64> {
    terms
        .iter()
        .flat_map(|&t| trial_factor(t).into_iter().map(|(p, _)| p))
        .collect()
}

pub fn check_oracle_equivalence(max_n: i64, out: &mut Outcome) -> Result<()> {
    for s in oracle_specs() {
        for n in 1..=max_n {
            let sieve = factor_window_sieve(&s, n)?.reconstruct();
            let fold = lcm_fold(&window_terms(&s, n)?)?;
            out.record(sieve == fold, || format!("oracle equivalence failed for {s}, n = {n}"));
        }
    }
    Ok(())
}

pub fn check_characterization(max_n: i64, out: &mut Outcome) -> Result<()> {
    for s in characterization_specs() {
        let residues = residue_set(s.a1)?;
        for n in 1..=max_n {
            let bound = s.upper_term(n)? as u64;
            let support = brute_support(&window_terms(&s, n)?);
            let families: Vec<IntervalFamily> = residues
                .iter()
                .map(|&r| build_family(&s, n, r))
                .collect::<Result<_>>()?;
            let finite: Vec<bool> = residues
                .iter()
                .map(|&r| finite_form_valid(&s, n, r))
                .collect::<Result<_>>()?;
            let mut ok = true;
            for p in primes_up_to(bound) {
                if s.a % p as i64 == 0 {
                    continue;
                }
                let class = if s.a1 == 1 { 1 } else { (p % s.a1 as u64) as i64 };
                let k = residues
                    .binary_search(&class)
                    .expect("prime coprime to a lies in R(a)");
                let fam = &families[k];
                let found = fam.locate(p as i64)?;
                ok &= found.is_some() == support.contains(&p);
                if finite[k] {
                    ok &= fam.locate_finite(p as i64)?.is_some() == found.is_some();
                }
            }
            out.record(ok, || format!("characterization failed for {s}, n = {n}"));
        }
    }
    Ok(())
}

pub fn check_assembly(max_n: i64, out: &mut Outcome) -> Result<()> {
    for s in characterization_specs() {
        for n in 1..=max_n {
            let map = factor_window_sieve(&s, n)?;
            let total: f64 = log_lcm(&map);
            let reduced = crate::engine::factor_reduced_window(&s, n, &Default::default())?;
            let corr = squarefull_split(&reduced, s.upper_term(n)? as u64).correction;
            let classes = ResidueSums::new(&s, n, Method::Direct, false)?.total();
            let lhs = classes + corr + (s.d as f64).ln();
            out.record((lhs - total).abs() <= 1e-6, || {
                format!("assembly identity failed for {s}, n = {n}: {lhs} vs {total}")
            });
        }
    }
    Ok(())
}

/// Forced second-branch `A_r` equals `l/r` whenever `l = (a+r)m/r` is an
/// integer; `a ≤ 8`, `1 ≤ m ≤ 6`.
pub fn check_branch_boundary(out: &mut Outcome) -> Result<()> {
    for a in 1..=8 {
        for r in residue_set(a)? {
            for m in 1..=6 {
                if ((a + r) * m) % r != 0 {
                    continue;
                }
                let l = (a + r) * m / r;
                let forced = residue_constant_rungs::<BigInt>(r, a, l, m)?;
                let want = Rational::new(BigInt::from(l), BigInt::from(r));
                out.record(forced == want && first_branch(r, a, l, m), || {
                    format!("branch boundary failed for a = {a}, r = {r}, l = {l}, m = {m}")
                });
            }
        }
    }
    Ok(())
}

pub fn check_corollaries(out: &mut Outcome) -> Result<()> {
    for a in 1..=8 {
        for m in 0..=4 {
            let lo = ((a + 1) * m).max(m + 1);
            for l in lo..=(a + 1) * m + 8 {
                let c1 = corollary1_constant::<BigInt>(a, l, m)?;
                let th = theorem_constant::<BigInt>(&normalize(a, 1, l, m)?)?.value;
                out.record(c1 == th, || {
                    format!("first shortcut disagrees for a = {a}, l = {l}, m = {m}")
                });
            }
        }
    }
    for l in 1..=12 {
        for m in 0..l {
            let c2 = corollary2_constant::<BigInt>(l, m)?;
            let th = theorem_constant::<BigInt>(&normalize(1, 0, l, m)?)?.value;
            out.record(c2 == th, || format!("step-one shortcut disagrees for l = {l}, m = {m}"));
        }
    }
    Ok(())
}

/// Runs every check family over `grid`.
pub fn run(grid: Grid) -> Result<Outcome> {
    let mut out = Outcome::default();
    check_branch_boundary(&mut out)?;
    check_corollaries(&mut out)?;
    check_oracle_equivalence(grid.oracle_max_n, &mut out)?;
    check_characterization(grid.characterization_max_n, &mut out)?;
    check_assembly(grid.characterization_max_n, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_have_expected_shapes() {
        let o = oracle_specs();
        assert!(o.iter().any(|s| s.d > 1));
        assert!(o.iter().all(|s| s.a + s.b >= 1 && s.a <= 6));
        let c = characterization_specs();
        assert!(c.iter().all(|s| s.d == 1));
        assert!(c.iter().any(|s| s.b < 0));
    }

    #[test]
    fn constants_checks_pass() {
        let mut out = Outcome::default();
        check_branch_boundary(&mut out).unwrap();
        check_corollaries(&mut out).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
        assert!(out.checks > 100);
    }

    #[test]
    fn tiny_grid_passes() {
        let grid = Grid {
            oracle_max_n: 3,
            characterization_max_n: 4,
        };
        let out = run(grid).unwrap();
        assert!(out.passed(), "{:?}", out.failures);
    }
}
