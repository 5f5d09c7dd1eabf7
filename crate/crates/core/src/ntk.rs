//! Number-theory kernel: gcd, totient, reduced residue systems, companion
//! residues and the normalized form of a progression window.

use num_integer::Integer;
use num_traits::PrimInt;

use crate::error::{Error, Result};

/// Greatest common divisor, always nonnegative; `gcd(0, 0) == 0`.
pub fn gcd<T: Integer + Clone>(x: T, y: T) -> T {
    x.gcd(&y)
}

/// Euler's totient: the number of `1 ≤ r ≤ a` with `gcd(r, a) = 1`.
pub fn euler_phi<T: PrimInt + Integer>(a: T) -> Result<T> {
    if a <= T::zero() {
        return Err(Error::InvalidArgument(
            "euler_phi requires a positive argument".into(),
        ));
    }
    let mut rest = a;
    let mut phi = a;
    let mut p = T::one() + T::one();
    while p * p <= rest {
        if rest % p == T::zero() {
            while rest % p == T::zero() {
                rest = rest / p;
            }
            phi = phi / p * (p - T::one());
        }
        p = p + T::one();
    }
    if rest > T::one() {
        phi = phi / rest * (rest - T::one());
    }
    Ok(phi)
}

/// The reduced residue system `R(a)`: integers in `[1, a]` coprime to `a`,
/// ascending.
pub fn residue_set<T: PrimInt + Integer>(a: T) -> Result<Vec<T>> {
    if a <= T::zero() {
        return Err(Error::InvalidArgument(
            "residue_set requires a positive modulus".into(),
        ));
    }
    let mut out = Vec::new();
    let mut r = T::one();
    while r <= a {
        if r.gcd(&a) == T::one() {
            out.push(r);
        }
        r = r + T::one();
    }
    Ok(out)
}

/// Inverse of `x` modulo `m` (`m ≥ 1`), as a value in `[0, m)`.
pub(crate) fn mod_inverse(x: i64, m: i64) -> Option<i64> {
    if m == 1 {
        return Some(0);
    }
    let e = x.mod_floor(&m).extended_gcd(&m);
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.mod_floor(&m))
}

/// The unique `r' ∈ R(a)` with `r · r' ≡ b0 (mod a)`.
pub fn companion_residue(r: i64, b0: i64, a: i64) -> Result<i64> {
    if a <= 0 {
        return Err(Error::InvalidArgument(format!(
            "modulus must be positive, got {a}"
        )));
    }
    if gcd(r, a) != 1 {
        return Err(Error::NotCoprime { value: r, modulus: a });
    }
    if gcd(b0, a) != 1 {
        return Err(Error::NotCoprime { value: b0, modulus: a });
    }
    let inv = mod_inverse(r, a).ok_or(Error::NotCoprime { value: r, modulus: a })?;
    let c = ((inv as i128 * b0.mod_floor(&a) as i128) % a as i128) as i64;
    // R(a) lives in [1, a], so residue 0 is represented by a itself.
    Ok(if c == 0 { a } else { c })
}

/// A progression window `{a·i + b : m·n < i ≤ l·n}` together with its
/// reduced form.
///
/// With `d = gcd(a, b)`, every term factors as `d · (a1·i + b1)` and
/// `a1·i + b1 = b0 + a1·(i + q)` with `b0 ∈ R(a1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProgressionSpec {
    pub a: i64,
    pub b: i64,
    pub l: i64,
    pub m: i64,
    pub d: i64,
    pub a1: i64,
    pub b1: i64,
    pub b0: i64,
    pub q: i64,
}

/// Validates the window hypotheses and fills in the reduced form.
pub fn normalize(a: i64, b: i64, l: i64, m: i64) -> Result<ProgressionSpec> {
    if a < 1 {
        return Err(Error::InvalidSpec {
            hypothesis: "a >= 1",
            detail: format!("a = {a}"),
        });
    }
    if a.checked_add(b).map_or(b > 0, |s| s < 1) {
        return Err(Error::InvalidSpec {
            hypothesis: "a + b >= 1",
            detail: format!("a = {a}, b = {b}"),
        });
    }
    if m < 0 {
        return Err(Error::InvalidSpec {
            hypothesis: "m >= 0",
            detail: format!("m = {m}"),
        });
    }
    if l <= m {
        return Err(Error::InvalidSpec {
            hypothesis: "l > m",
            detail: format!("l = {l}, m = {m}"),
        });
    }
    let d = gcd(a, b);
    let (a1, b1) = (a / d, b / d);
    let b0 = (b1 - 1).mod_floor(&a1) + 1;
    let q = (b1 - b0) / a1;
    Ok(ProgressionSpec {
        a,
        b,
        l,
        m,
        d,
        a1,
        b1,
        b0,
        q,
    })
}

impl ProgressionSpec {
    pub fn new(a: i64, b: i64, l: i64, m: i64) -> Result<Self> {
        normalize(a, b, l, m)
    }

    /// The reduced spec `(a1, b1, l, m)`, which has `d = 1`.
    pub fn reduced(&self) -> ProgressionSpec {
        ProgressionSpec {
            a: self.a1,
            b: self.b1,
            d: 1,
            ..*self
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.d == 1
    }

    /// Raw term `a·i + b`.
    pub fn term(&self, i: i64) -> i64 {
        self.a * i + self.b
    }

    /// Reduced term `a1·i + b1`.
    pub fn reduced_term(&self, i: i64) -> i64 {
        self.a1 * i + self.b1
    }

    /// Largest raw term `b + a·l·n`, or an error if it overflows.
    pub fn upper_term(&self, n: i64) -> Result<i64> {
        self.a
            .checked_mul(self.l)
            .and_then(|x| x.checked_mul(n))
            .and_then(|x| x.checked_add(self.b))
            .ok_or_else(|| Error::Resource(format!("b + a*l*n overflows for n = {n}")))
    }
}

impl std::fmt::Display for ProgressionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(a={}, b={}, l={}, m={})", self.a, self.b, self.l, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_phi(a: i64) -> i64 {
        (1..=a).filter(|&r| gcd(r, a) == 1).count() as i64
    }

    #[test]
    fn gcd_cases() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(gcd(4, 6), 2);
        assert_eq!(gcd(0i64, 0), 0);
        assert_eq!(gcd(-4i64, 6), 2);
    }

    #[test]
    fn phi_matches_brute_force() {
        assert_eq!(euler_phi(1i64).unwrap(), 1);
        assert_eq!(euler_phi(3i64).unwrap(), brute_phi(3));
        assert_eq!(euler_phi(12i64).unwrap(), brute_phi(12));
        assert_eq!(brute_phi(12), 4);
        for a in 1..=200i64 {
            assert_eq!(euler_phi(a).unwrap(), brute_phi(a), "a = {a}");
            assert_eq!(residue_set(a).unwrap().len() as i64, brute_phi(a));
        }
        assert_eq!(euler_phi(36u32).unwrap(), 12);
        assert!(euler_phi(0i64).is_err());
        assert!(euler_phi(-3i64).is_err());
    }

    #[test]
    fn residue_sets() {
        assert_eq!(residue_set(1i64).unwrap(), vec![1]);
        assert_eq!(residue_set(4i64).unwrap(), vec![1, 3]);
        assert_eq!(residue_set(6i64).unwrap(), vec![1, 5]);
        assert!(residue_set(0i64).is_err());
    }

    fn brute_companion(r: i64, b0: i64, a: i64) -> i64 {
        let hits: Vec<i64> = residue_set(a)
            .unwrap()
            .into_iter()
            .filter(|&c| (r * c - b0).rem_euclid(a) == 0)
            .collect();
        assert_eq!(hits.len(), 1);
        hits[0]
    }

    #[test]
    fn companion_examples() {
        assert_eq!(companion_residue(1, 1, 1).unwrap(), 1);
        assert_eq!(companion_residue(3, 1, 4).unwrap(), 3);
        assert_eq!(companion_residue(3, 2, 5).unwrap(), 4);
        assert!(matches!(
            companion_residue(2, 1, 4),
            Err(Error::NotCoprime { value: 2, .. })
        ));
        assert!(companion_residue(1, 3, 6).is_err());
    }

    #[test]
    fn companion_is_a_bijection_and_swaps_back() {
        for a in 1..=40i64 {
            let rs = residue_set(a).unwrap();
            for &b0 in &rs {
                let mut image: Vec<i64> = rs
                    .iter()
                    .map(|&r| companion_residue(r, b0, a).unwrap())
                    .collect();
                for (&r, &c) in rs.iter().zip(&image) {
                    assert_eq!(c, brute_companion(r, b0, a));
                    assert_eq!(companion_residue(c, b0, a).unwrap(), r);
                }
                image.sort_unstable();
                assert_eq!(image, rs);
            }
        }
    }

    #[test]
    fn normalize_examples() {
        let s = normalize(1, 0, 1, 0).unwrap();
        assert_eq!((s.d, s.a1, s.b1, s.b0, s.q), (1, 1, 0, 1, -1));
        let s = normalize(4, 6, 2, 1).unwrap();
        assert_eq!((s.d, s.a1, s.b1, s.b0, s.q), (2, 2, 3, 1, 1));
        let s = normalize(3, -1, 1, 0).unwrap();
        assert_eq!((s.d, s.a1, s.b1, s.b0, s.q), (1, 3, -1, 2, -1));
    }

    #[test]
    fn normalize_rejects_each_hypothesis() {
        let hyp = |r: Result<ProgressionSpec>| match r {
            Err(Error::InvalidSpec { hypothesis, .. }) => hypothesis,
            other => panic!("expected InvalidSpec, got {other:?}"),
        };
        assert_eq!(hyp(normalize(0, 1, 1, 0)), "a >= 1");
        assert_eq!(hyp(normalize(2, -2, 1, 0)), "a + b >= 1");
        assert_eq!(hyp(normalize(1, 0, 1, -1)), "m >= 0");
        assert_eq!(hyp(normalize(1, 0, 2, 2)), "l > m");
    }

    #[test]
    fn reduced_spec_drops_the_gcd() {
        let s = normalize(6, 4, 3, 1).unwrap();
        let r = s.reduced();
        assert_eq!((r.a, r.b, r.d), (3, 2, 1));
        assert_eq!(normalize(r.a, r.b, r.l, r.m).unwrap(), r);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn window_identity(a in 1i64..30, b in -29i64..40, l in 1i64..6, dm in 1i64..6,
                               is in proptest::collection::vec(1i64..10_000, 20)) {
                prop_assume!(a + b >= 1);
                let m = (l - dm).max(0);
                let s = normalize(a, b, l, m).unwrap();
                prop_assert_eq!(gcd(s.a1, s.b1), 1);
                prop_assert!(1 <= s.b0 && s.b0 <= s.a1);
                prop_assert_eq!(gcd(s.b0, s.a1), 1);
                prop_assert_eq!(s.b1, s.b0 + s.q * s.a1);
                for i in is {
                    prop_assert_eq!(s.d * (s.a1 * i + s.b1), a * i + b);
                    prop_assert_eq!(s.a1 * i + s.b1, s.b0 + s.a1 * (i + s.q));
                    prop_assert!(s.term(i) >= 1);
                }
            }
        }
    }
}
