//! Prime support of `L_{m,l}(n)` split by residue class.
//!
//! For a reduced window `{a·i + b}` with `gcd(a, b) = 1`, a prime `p ≡ r
//! (mod a)` divides some term exactly when `p·(r' + a·j)` lands in the term
//! range `(b + a·m·n, b + a·l·n]` for some `j ≥ 0`, where `r·r' ≡ b (mod a)`.
//! Each `j` gives one half-open rational interval ("rung") of admissible
//! primes. Rungs are listed until the upper endpoint drops below 2, which
//! makes the family finite for every `n`.
//!
//! Endpoints are exact rationals and primes are classified with integer
//! inequalities only.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;

use crate::constants::{cap_k, theorem_constant};
use crate::engine::{factor_reduced_window, window_valuation, PrimePowerMap, SieveOptions, WindowInstance};
use crate::error::{Error, Result};
use crate::ntk::{companion_residue, gcd, residue_set, ProgressionSpec};
use crate::sieve::{for_each_prime_in, isqrt, primes_up_to};
use crate::summation::CompensatedSum;
use crate::Rational64;

/// Chebyshev's `θ(x; h, k)`: `Σ log p` over primes `p ≤ x`, `p ≡ k (mod h)`.
pub fn theta(x: f64, h: i64, k: i64) -> Result<f64> {
    check_class(h, k)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::InvalidArgument(format!("theta needs x >= 0, got {x}")));
    }
    let limit = x.floor() as u64;
    let k = k.mod_floor(&h) as u64;
    let h = h as u64;
    let mut acc = CompensatedSum::new();
    for_each_prime_in(0, limit, |p| {
        if p % h == k {
            acc.add((p as f64).ln());
        }
    });
    Ok(acc.value())
}

fn check_class(h: i64, k: i64) -> Result<()> {
    if h < 1 {
        return Err(Error::InvalidArgument(format!("modulus must be positive, got {h}")));
    }
    if gcd(h, k) != 1 {
        return Err(Error::NotCoprime { value: k, modulus: h });
    }
    Ok(())
}

/// Primes up to a limit, bucketed by residue mod `h`, for repeated θ
/// queries. Immutable once built and shareable across threads.
#[derive(Debug, Clone)]
pub struct ThetaTable {
    modulus: u64,
    limit: u64,
    classes: Vec<Vec<u32>>,
}

impl ThetaTable {
    pub fn new(limit: u64, modulus: i64) -> Result<Self> {
        if modulus < 1 {
            return Err(Error::InvalidArgument("modulus must be positive".into()));
        }
        if limit > u32::MAX as u64 {
            return Err(Error::Resource(format!("theta table limit {limit} exceeds 2^32")));
        }
        let h = modulus as u64;
        let mut classes = vec![Vec::new(); h as usize];
        for_each_prime_in(0, limit, |p| classes[(p % h) as usize].push(p as u32));
        Ok(Self {
            modulus: h,
            limit,
            classes,
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn class(&self, k: i64) -> Result<&[u32]> {
        check_class(self.modulus as i64, k)?;
        Ok(&self.classes[k.mod_floor(&(self.modulus as i64)) as usize])
    }

    fn check_range(&self, x: u64) -> Result<()> {
        if x > self.limit {
            return Err(Error::Resource(format!(
                "theta query {x} beyond table limit {}",
                self.limit
            )));
        }
        Ok(())
    }

    /// `θ(x; h, k)` for integer `x ≤ limit`.
    pub fn theta(&self, x: u64, k: i64) -> Result<f64> {
        self.theta_between(0, x, k)
    }

    /// Primes `≡ k` in `(lo, hi]`.
    pub fn primes_between(&self, lo: u64, hi: u64, k: i64) -> Result<&[u32]> {
        self.check_range(hi)?;
        let primes = self.class(k)?;
        if hi <= lo {
            return Ok(&[]);
        }
        let start = primes.partition_point(|&p| (p as u64) <= lo);
        let end = primes.partition_point(|&p| (p as u64) <= hi);
        Ok(&primes[start..end])
    }

    /// `θ(hi) − θ(lo)`, summed directly over the primes in `(lo, hi]`.
    pub fn theta_between(&self, lo: u64, hi: u64, k: i64) -> Result<f64> {
        Ok(self
            .primes_between(lo, hi, k)?
            .iter()
            .map(|&p| (p as f64).ln())
            .collect::<CompensatedSum<f64>>()
            .value())
    }
}

/// Half-open interval `(lo, hi]` with exact rational endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfOpen {
    pub lo: Rational64,
    pub hi: Rational64,
}

impl HalfOpen {
    pub fn contains(&self, x: i64) -> bool {
        let x = Rational64::from_integer(x);
        self.lo < x && x <= self.hi
    }

    /// Integers `(⌊lo⌋, ⌊hi⌋]`, i.e. the integers inside the interval.
    pub fn integer_bounds(&self) -> (i64, i64) {
        (self.lo.floor().to_integer(), self.hi.floor().to_integer())
    }
}

/// Where a prime was found in a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Base,
    Rung(i64),
}

/// Interval family for one residue class `r` of a reduced window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalFamily {
    pub residue: i64,
    /// `r'` with `r·r' ≡ b0 (mod a)`.
    pub companion: i64,
    pub modulus: i64,
    /// `H = K_{r'}`.
    pub h_cap: i64,
    /// `b + a·m·n` for the reduced window.
    pub lower_num: i64,
    /// `b + a·l·n` for the reduced window.
    pub upper_num: i64,
    /// `(l − m)·n`.
    pub base_hi: i64,
    /// Rungs are `i = 0 ..= i_max`.
    pub i_max: i64,
}

impl IntervalFamily {
    pub fn base(&self) -> HalfOpen {
        HalfOpen {
            lo: Rational64::from_integer(0),
            hi: Rational64::from_integer(self.base_hi),
        }
    }

    fn divisor(&self, i: i64) -> i64 {
        self.companion + self.modulus * i
    }

    /// `((b+amn)/(r'+ai), (b+aln)/(r'+ai)]`.
    pub fn rung(&self, i: i64) -> HalfOpen {
        let c = self.divisor(i);
        HalfOpen {
            lo: Rational64::new(self.lower_num, c),
            hi: Rational64::new(self.upper_num, c),
        }
    }

    pub fn rungs(&self) -> impl Iterator<Item = HalfOpen> + '_ {
        (0..=self.i_max).map(|i| self.rung(i))
    }

    /// Rung `i` contains `p`, decided as `p·c > b+amn` and `p·c ≤ b+aln`.
    pub fn rung_contains(&self, i: i64, p: i64) -> bool {
        let pc = p as i128 * self.divisor(i) as i128;
        pc > self.lower_num as i128 && pc <= self.upper_num as i128
    }

    /// Lowest-index rung containing `p`, if any.
    fn find_rung(&self, p: i64) -> Option<i64> {
        // smallest multiplier c ≡ r' (mod a) with p·c above the lower end
        let c_min = Integer::div_floor(&(self.lower_num as i128), &(p as i128)) + 1;
        let j = Integer::div_ceil(&(c_min - self.companion as i128), &(self.modulus as i128)).max(0);
        if j > self.i_max as i128 {
            return None;
        }
        let j = j as i64;
        self.rung_contains(j, p).then_some(j)
    }

    fn check_prime_class(&self, p: i64) -> Result<()> {
        if (p - self.residue).mod_floor(&self.modulus) != 0 {
            return Err(Error::InvalidArgument(format!(
                "{p} is not congruent to {} mod {}",
                self.residue, self.modulus
            )));
        }
        Ok(())
    }

    /// Membership in base ∪ rungs.
    pub fn locate(&self, p: i64) -> Result<Option<Location>> {
        self.check_prime_class(p)?;
        if p >= 1 && p <= self.base_hi {
            return Ok(Some(Location::Base));
        }
        Ok(self.find_rung(p).map(Location::Rung))
    }

    /// Membership in the finite form: base ∪ rungs `0..=H`.
    pub fn locate_finite(&self, p: i64) -> Result<Option<Location>> {
        Ok(self.locate(p)?.filter(|loc| match *loc {
            Location::Base => true,
            Location::Rung(i) => i <= self.h_cap,
        }))
    }

    /// Base and rungs coalesced into disjoint intervals, ascending.
    pub fn merged(&self) -> Vec<HalfOpen> {
        let mut all: Vec<HalfOpen> = std::iter::once(self.base()).chain(self.rungs()).collect();
        merge_half_open(&mut all)
    }
}

/// Sorts by lower endpoint and coalesces overlapping or touching intervals.
pub fn merge_half_open(intervals: &mut [HalfOpen]) -> Vec<HalfOpen> {
    intervals.sort_by(|x, y| x.lo.cmp(&y.lo).then(x.hi.cmp(&y.hi)));
    let mut out: Vec<HalfOpen> = Vec::new();
    for iv in intervals.iter() {
        if iv.lo >= iv.hi {
            continue;
        }
        match out.last_mut() {
            Some(cur) if iv.lo <= cur.hi => {
                if iv.hi.cmp(&cur.hi) == Ordering::Greater {
                    cur.hi = iv.hi;
                }
            }
            _ => out.push(*iv),
        }
    }
    out
}

fn check_member_residue(spec: &ProgressionSpec, r: i64) -> Result<()> {
    if r < 1 || r > spec.a1 || gcd(r, spec.a1) != 1 {
        return Err(Error::NotCoprime { value: r, modulus: spec.a1 });
    }
    Ok(())
}

/// Interval family of class `r ∈ R(a1)` for the reduced window of `spec`.
pub fn build_family(spec: &ProgressionSpec, n: i64, r: i64) -> Result<IntervalFamily> {
    check_member_residue(spec, r)?;
    let red = spec.reduced();
    let w = WindowInstance::new(&red, n)?;
    let a = spec.a1;
    let companion = companion_residue(r, spec.b0, a)?;
    let h_cap = cap_k(companion, a, spec.l, spec.m)?;
    let upper_num = w.term_hi;
    let lower_num = red.b + red.a * w.index_lo;
    // least i with upper/(r' + a·i) < 2
    let i_max = if 2 * companion > upper_num {
        0
    } else {
        Integer::div_floor(&(upper_num - 2 * companion), &(2 * a)) + 1
    };
    Ok(IntervalFamily {
        residue: r,
        companion,
        modulus: a,
        h_cap,
        lower_num,
        upper_num,
        base_hi: (spec.l - spec.m) * n,
        i_max,
    })
}

/// Whether `p` (prime, `≡ r`) lies in the family, i.e. divides a window term.
pub fn member(p: i64, family: &IntervalFamily) -> Result<bool> {
    Ok(family.locate(p)?.is_some())
}

/// `(b+aln)/(r'+a(H+1)) < (l−m)n`: the finite union over rungs `0..=H`
/// plus the base already captures every admissible prime.
pub fn finite_form_valid(spec: &ProgressionSpec, n: i64, r: i64) -> Result<bool> {
    let fam = build_family(spec, n, r)?;
    let next = fam.divisor(fam.h_cap + 1) as i128;
    Ok((fam.upper_num as i128) < fam.base_hi as i128 * next)
}

/// How a per-class log sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Sum `log p` over the sieved prime support restricted to the class.
    Direct,
    /// Merge the class's interval family and sum θ over the merged pieces.
    ThetaIntervals,
}

/// `Σ log p` over primes `p ≡ r (mod a1)` dividing `L_{m,l}(n)`'s reduced
/// part.
pub fn residue_log_sum(spec: &ProgressionSpec, n: i64, r: i64, method: Method) -> Result<f64> {
    check_member_residue(spec, r)?;
    let sums = ResidueSums::new(spec, n, method, false)?;
    Ok(sums.by_residue[&r])
}

/// Sum over the reduced support of the primes in one class.
pub fn direct_class_sum(map: &PrimePowerMap, modulus: i64, r: i64) -> f64 {
    let (a, r) = (modulus as u64, r as u64 % modulus as u64);
    map.primes()
        .filter(|&p| p % a == r)
        .map(|p| (p as f64).ln())
        .collect::<CompensatedSum<f64>>()
        .value()
}

/// Class sum over merged intervals of `family`, using `table`.
pub fn theta_interval_sum(family: &IntervalFamily, table: &ThetaTable) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for iv in family.merged() {
        let (lo, hi) = iv.integer_bounds();
        if hi < 2 {
            continue;
        }
        acc.add(table.theta_between(lo.max(0) as u64, hi as u64, family.residue)?);
    }
    Ok(acc.value())
}

/// All per-class sums of one window.
#[derive(Debug, Clone)]
pub struct ResidueSums {
    pub by_residue: BTreeMap<i64, f64>,
}

impl ResidueSums {
    pub fn new(spec: &ProgressionSpec, n: i64, method: Method, parallel: bool) -> Result<Self> {
        let residues = residue_set(spec.a1)?;
        let by_residue = match method {
            Method::Direct => {
                let opts = SieveOptions { parallel, ..Default::default() };
                let map = factor_reduced_window(spec, n, &opts)?;
                residues
                    .iter()
                    .map(|&r| (r, direct_class_sum(&map, spec.a1, r)))
                    .collect()
            }
            Method::ThetaIntervals => {
                let w = WindowInstance::new(&spec.reduced(), n)?;
                let table = ThetaTable::new(w.term_hi as u64, spec.a1)?;
                let one = |&r: &i64| -> Result<(i64, f64)> {
                    let fam = build_family(spec, n, r)?;
                    Ok((r, theta_interval_sum(&fam, &table)?))
                };
                let pairs: Result<Vec<(i64, f64)>> = if parallel {
                    residues.par_iter().map(one).collect()
                } else {
                    residues.iter().map(one).collect()
                };
                pairs?.into_iter().collect()
            }
        };
        Ok(Self { by_residue })
    }

    pub fn total(&self) -> f64 {
        self.by_residue
            .values()
            .copied()
            .collect::<CompensatedSum<f64>>()
            .value()
    }
}

/// `log L_{m,l}(n)` without the factoring sieve: class sums over merged
/// interval families, plus `Σ (v_p − 1)·log p` over small primes with
/// valuations computed from the progression, plus `log d`.
pub fn log_lcm_by_intervals(spec: &ProgressionSpec, n: i64, parallel: bool) -> Result<f64> {
    let support = ResidueSums::new(spec, n, Method::ThetaIntervals, parallel)?.total();
    let w = WindowInstance::new(&spec.reduced(), n)?;
    let mut acc = CompensatedSum::new();
    acc.add(support);
    for p in primes_up_to(isqrt(w.term_hi as u64)) {
        if (spec.a1 as u64).is_multiple_of(p) {
            continue;
        }
        let e = window_valuation(&spec.reduced(), n, p)?;
        if e >= 2 {
            acc.add((e - 1) as f64 * (p as f64).ln());
        }
    }
    acc.add((spec.d as f64).ln());
    Ok(acc.value())
}

/// Prime-power map of `L_{m,l}(n)` assembled from the interval families:
/// support primes come from the merged intervals of each class, exponents
/// from [`window_valuation`], and `d` is reattached.
pub fn factor_by_intervals(spec: &ProgressionSpec, n: i64) -> Result<PrimePowerMap> {
    let red = spec.reduced();
    let w = WindowInstance::new(&red, n)?;
    let top = w.term_hi as u64;
    let table = ThetaTable::new(top, spec.a1)?;
    let mut map = PrimePowerMap::new();
    for r in residue_set(spec.a1)? {
        let fam = build_family(spec, n, r)?;
        for iv in fam.merged() {
            let (lo, hi) = iv.integer_bounds();
            if hi < 2 {
                continue;
            }
            for &p in table.primes_between(lo.max(0) as u64, hi as u64, r)? {
                let p = p as u64;
                let e = if p.saturating_mul(p) <= top {
                    window_valuation(&red, n, p)?
                } else {
                    1
                };
                map.raise(p, e);
            }
        }
    }
    for (p, e) in crate::engine::trial_factor(spec.d as u64) {
        map.multiply(p, e);
    }
    Ok(map)
}

/// The predicted main term `n·A + log d`; no sieving.
pub fn estimate_log_lcm(spec: &ProgressionSpec, n: i64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
    }
    let a = theorem_constant::<BigInt>(spec)?.to_f64();
    Ok(n as f64 * a + (spec.d as f64).ln())
}
