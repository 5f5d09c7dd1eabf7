//! Prime generation: a plain sieve of Eratosthenes for base primes and a
//! segmented sieve for enumerating primes in `[lo, hi]` with bounded memory.

const SEGMENT_ODDS: usize = 1 << 18;

/// Integer square root, `⌊√x⌋`.
pub fn isqrt(x: u64) -> u64 {
    if x < 2 {
        return x;
    }
    let mut r = (x as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|s| s > x) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|s| s <= x) {
        r += 1;
    }
    r
}

/// All primes `≤ limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    // index i stands for 2i + 1
    let half = (limit - 1) / 2 + 1;
    let mut composite = vec![false; half];
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(estimate_count(limit as u64));
    out.push(2);
    out.extend(
        composite
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1),
    );
    out
}

fn estimate_count(limit: u64) -> usize {
    let x = limit.max(3) as f64;
    (1.26 * x / x.ln()) as usize + 8
}

/// Calls `f` on every prime in `[lo, hi]`, ascending.
pub fn for_each_prime_in<F: FnMut(u64)>(lo: u64, hi: u64, mut f: F) {
    if hi < 2 || lo > hi {
        return;
    }
    let lo = lo.max(2);
    if lo <= 2 {
        f(2);
    }
    let base = primes_up_to(isqrt(hi));
    // odd numbers only, starting at the first odd ≥ max(lo, 3)
    let mut start = lo.max(3) | 1;
    let mut marks = vec![false; SEGMENT_ODDS];
    while start <= hi {
        let span = (((hi - start) / 2 + 1) as usize).min(SEGMENT_ODDS);
        let end = start + 2 * (span as u64 - 1);
        let seg = &mut marks[..span];
        seg.fill(false);
        for &p in base.iter().skip(1) {
            if p * p > end {
                break;
            }
            let mut first = (p * p).max(start.div_ceil(p) * p);
            if first % 2 == 0 {
                first += p;
            }
            let mut j = ((first - start) / 2) as usize;
            while j < span {
                seg[j] = true;
                j += p as usize;
            }
        }
        for (j, &c) in seg.iter().enumerate() {
            if !c {
                f(start + 2 * j as u64);
            }
        }
        start = end + 2;
    }
}

/// All primes in `[lo, hi]`, ascending.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime_in(lo, hi, |p| out.push(p));
    out
}
