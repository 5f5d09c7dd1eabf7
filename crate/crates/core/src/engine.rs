//! Exact computation of `L_{m,l}(n)`: a big-integer gcd fold over the window
//! terms, and a segmented factoring sieve that yields the prime-power map
//! directly.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{Float, FromPrimitive, One, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ntk::{mod_inverse, ProgressionSpec};
use crate::sieve::{isqrt, primes_up_to};
use crate::summation::CompensatedSum;

/// Default number of window indices per sieve segment.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 20;

/// One concrete window `{a·i + b : index_lo < i ≤ index_hi}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowInstance {
    pub spec: ProgressionSpec,
    pub n: i64,
    /// `m·n`, exclusive.
    pub index_lo: i64,
    /// `l·n`, inclusive.
    pub index_hi: i64,
    pub term_lo: i64,
    pub term_hi: i64,
}

impl WindowInstance {
    pub fn new(spec: &ProgressionSpec, n: i64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
        }
        let term_hi = spec.upper_term(n)?;
        let index_lo = spec.m * n;
        Ok(Self {
            spec: *spec,
            n,
            index_lo,
            index_hi: spec.l * n,
            term_lo: spec.term(index_lo + 1),
            term_hi,
        })
    }

    /// Number of terms, `(l − m)·n`.
    pub fn len(&self) -> usize {
        (self.index_hi - self.index_lo) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `[a·i + b for m·n < i ≤ l·n]`, strictly increasing.
pub fn window_terms(spec: &ProgressionSpec, n: i64) -> Result<Vec<u64>> {
    let w = WindowInstance::new(spec, n)?;
    Ok((w.index_lo + 1..=w.index_hi)
        .map(|i| spec.term(i) as u64)
        .collect())
}

/// lcm of `terms` by folding `lcm(x, y) = x·y / gcd(x, y)` over big integers.
pub fn lcm_fold(terms: &[u64]) -> Result<BigUint> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("lcm of an empty list".into()));
    }
    let mut acc = BigUint::one();
    for &t in terms {
        if t == 0 {
            return Err(Error::InvalidArgument("lcm of a nonpositive term".into()));
        }
        acc = acc.lcm(&BigUint::from(t));
    }
    Ok(acc)
}

/// `L = Π p^e` as an ordered map prime → exponent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimePowerMap {
    entries: BTreeMap<u64, u32>,
}

impl PrimePowerMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Raises the exponent of `p` to at least `e`.
    pub fn raise(&mut self, p: u64, e: u32) {
        if e == 0 {
            return;
        }
        let slot = self.entries.entry(p).or_insert(0);
        *slot = (*slot).max(e);
    }

    /// Multiplies the represented integer by `p^e`.
    pub fn multiply(&mut self, p: u64, e: u32) {
        if e > 0 {
            *self.entries.entry(p).or_insert(0) += e;
        }
    }

    /// Exponent-wise maximum, i.e. the lcm of the two represented integers.
    pub fn merge_max(&mut self, other: &PrimePowerMap) {
        for (&p, &e) in &other.entries {
            self.raise(p, e);
        }
    }

    pub fn exponent(&self, p: u64) -> u32 {
        self.entries.get(&p).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u32)> + '_ {
        self.entries.iter().map(|(&p, &e)| (p, e))
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The exact integer `Π p^e`.
    pub fn reconstruct(&self) -> BigUint {
        let mut factors: Vec<BigUint> = self
            .iter()
            .map(|(p, e)| BigUint::from(p).pow(e))
            .collect();
        if factors.is_empty() {
            return BigUint::one();
        }
        // product tree keeps the multiplications balanced
        while factors.len() > 1 {
            factors = factors
                .chunks(2)
                .map(|c| match c {
                    [x, y] => x * y,
                    [x] => x.clone(),
                    _ => unreachable!(),
                })
                .collect();
        }
        factors.pop().unwrap()
    }
}

impl FromIterator<(u64, u32)> for PrimePowerMap {
    fn from_iter<I: IntoIterator<Item = (u64, u32)>>(iter: I) -> Self {
        let mut map = PrimePowerMap::new();
        for (p, e) in iter {
            map.raise(p, e);
        }
        map
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SieveOptions {
    pub segment_len: usize,
    /// Process segments on the current rayon pool.
    pub parallel: bool,
}

impl Default for SieveOptions {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
            parallel: true,
        }
    }
}

/// Prime-power map of `L_{m,l}(n)` for the raw spec, by segmented sieving
/// of the reduced window and reattaching `d`.
pub fn factor_window_sieve(spec: &ProgressionSpec, n: i64) -> Result<PrimePowerMap> {
    factor_window_sieve_with(spec, n, &SieveOptions::default())
}

pub fn factor_window_sieve_with(
    spec: &ProgressionSpec,
    n: i64,
    opts: &SieveOptions,
) -> Result<PrimePowerMap> {
    let mut map = factor_reduced_window(spec, n, opts)?;
    for (p, e) in trial_factor(spec.d as u64) {
        map.multiply(p, e);
    }
    Ok(map)
}

struct SegmentResult {
    small: Vec<u8>,
    large: Vec<u64>,
}

/// Prime-power map of `lcm{a1·i + b1 : m·n < i ≤ l·n}` (the `d`-free part).
pub fn factor_reduced_window(
    spec: &ProgressionSpec,
    n: i64,
    opts: &SieveOptions,
) -> Result<PrimePowerMap> {
    let red = spec.reduced();
    let w = WindowInstance::new(&red, n)?;
    if opts.segment_len == 0 {
        return Err(Error::InvalidArgument("segment length must be positive".into()));
    }
    let a1 = red.a as u64;
    // term at offset j is t0 + a1·j for 0 ≤ j < len
    let t0 = w.term_lo as u64;
    let len = w.len();
    let small = primes_up_to(isqrt(w.term_hi as u64));
    // first offset j with p | t0 + a1·j, or None when p | a1
    let starts: Vec<Option<u64>> = small
        .iter()
        .map(|&p| {
            let inv = mod_inverse((a1 % p) as i64, p as i64)? as u128;
            let neg_t0 = (p - t0 % p) % p;
            Some(((neg_t0 as u128 * inv) % p as u128) as u64)
        })
        .collect();

    let bounds: Vec<(usize, usize)> = (0..len)
        .step_by(opts.segment_len)
        .map(|j0| (j0, (j0 + opts.segment_len).min(len)))
        .collect();
    let run = |&(j0, j1): &(usize, usize)| factor_segment(t0, a1, j0, j1, &small, &starts);
    let parts: Vec<SegmentResult> = if opts.parallel && bounds.len() > 1 {
        bounds.par_iter().map(run).collect()
    } else {
        bounds.iter().map(run).collect()
    };

    let mut small_exp = vec![0u8; small.len()];
    let mut large = Vec::new();
    for part in parts {
        for (acc, e) in small_exp.iter_mut().zip(part.small) {
            *acc = (*acc).max(e);
        }
        large.extend(part.large);
    }
    large.sort_unstable();
    large.dedup();

    let mut map = PrimePowerMap::new();
    for (&p, &e) in small.iter().zip(&small_exp) {
        map.raise(p, e as u32);
    }
    for p in large {
        map.raise(p, 1);
    }
    Ok(map)
}

fn factor_segment(
    t0: u64,
    a1: u64,
    j0: usize,
    j1: usize,
    small: &[u64],
    starts: &[Option<u64>],
) -> SegmentResult {
    let mut vals: Vec<u64> = (j0..j1).map(|j| t0 + a1 * j as u64).collect();
    let mut exps = vec![0u8; small.len()];
    for (k, (&p, start)) in small.iter().zip(starts).enumerate() {
        let Some(s) = *start else { continue };
        let p_us = p as usize;
        let off = (s as usize + p_us - j0 % p_us) % p_us;
        let mut idx = off;
        let mut best = 0u8;
        while idx < vals.len() {
            let v = &mut vals[idx];
            let mut e = 0u8;
            while (*v).is_multiple_of(p) {
                *v /= p;
                e += 1;
            }
            best = best.max(e);
            idx += p_us;
        }
        exps[k] = best;
    }
    // what survives has no prime factor ≤ √(max term), so it is 1 or prime
    let large = vals.into_iter().filter(|&v| v > 1).collect();
    SegmentResult { small: exps, large }
}

/// Factorization of a small positive integer by trial division.
pub fn trial_factor(mut x: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= x {
        let mut e = 0;
        while x.is_multiple_of(p) {
            x /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if x > 1 {
        out.push((x, 1));
    }
    out
}

/// `v_p(L_{m,l}(n))` for a prime `p`, computed arithmetically from the
/// progression: the largest `e` such that some window index solves
/// `a1·i + b1 ≡ 0 (mod p^e)`, plus `v_p(d)`.
pub fn window_valuation(spec: &ProgressionSpec, n: i64, p: u64) -> Result<u32> {
    let w = WindowInstance::new(&spec.reduced(), n)?;
    let from_d = trial_factor(spec.d as u64)
        .into_iter()
        .find(|&(q, _)| q == p)
        .map_or(0, |(_, e)| e);
    let (a1, b1) = (spec.a1 as i128, spec.b1 as i128);
    let top = w.term_hi as i128;
    let mut e = 0u32;
    let mut pe = p as i128;
    while pe <= top {
        let Some(inv) = mod_inverse(a1.mod_floor(&pe) as i64, pe as i64) else {
            break;
        };
        let root = ((-b1).mod_floor(&pe) * inv as i128) % pe;
        let first = w.index_lo as i128 + 1;
        let i = first + (root - first).mod_floor(&pe);
        if i > w.index_hi as i128 {
            break;
        }
        e += 1;
        pe *= p as i128;
    }
    Ok(e + from_d)
}

/// `Σ e·ln p` with compensated summation.
pub fn log_lcm<F: Float + FromPrimitive>(map: &PrimePowerMap) -> F {
    let mut acc = CompensatedSum::<F>::new();
    for (p, e) in map.iter() {
        acc.add(F::from_u32(e).unwrap() * F::from_u64(p).unwrap().ln());
    }
    acc.value()
}

/// Natural log of a big integer, accurate to f64 precision.
pub fn log_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 960 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `log L` split into the first-power part `Σ log p` and the squarefull
/// correction `Σ (e−1)·log p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquarefullSplit {
    pub first_power_sum: f64,
    pub correction: f64,
    /// Whether every prime with exponent ≥ 2 satisfies `p² ≤ bound`.
    pub bound_respected: bool,
}

pub fn squarefull_split(map: &PrimePowerMap, bound: u64) -> SquarefullSplit {
    let mut first = CompensatedSum::new();
    let mut corr = CompensatedSum::new();
    let mut ok = true;
    for (p, e) in map.iter() {
        let lp = (p as f64).ln();
        first.add(lp);
        if e >= 2 {
            corr.add((e - 1) as f64 * lp);
            ok &= p.checked_mul(p).is_some_and(|s| s <= bound);
        }
    }
    SquarefullSplit {
        first_power_sum: first.value(),
        correction: corr.value(),
        bound_respected: ok,
    }
}
