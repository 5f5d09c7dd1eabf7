//! The asymptotic constant `A` of `log L_{m,l}(n) = A·n + o(n)` and its
//! closed-form special cases, in exact rational arithmetic.
//!
//! Everything here is generic over the integer type backing the rationals.
//! Small parameters fit in `i64`; long harmonic-type sums (large `m` with
//! `l - m` small) need [`num_bigint::BigInt`].

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::ntk::{euler_phi, gcd, residue_set, ProgressionSpec};
use crate::{ExactInt, Rational};

/// The constant `A` with its per-residue breakdown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsymptoticConstant<T: ExactInt> {
    /// `A = (a/φ(a)) · Σ_{r ∈ R(a)} A_r` for the reduced step `a`.
    pub value: Rational<T>,
    /// `r ↦ (K_r, A_r)`.
    pub breakdown: BTreeMap<i64, ResidueTerm<T>>,
    pub phi: i64,
    /// The reduced step the constant was computed for.
    pub modulus: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTerm<T: ExactInt> {
    pub k: i64,
    pub a_r: Rational<T>,
}

impl<T: ExactInt> AsymptoticConstant<T> {
    /// Floating-point value, display only.
    pub fn to_f64(&self) -> f64 {
        crate::rational_to_f64(&self.value)
    }
}

pub(crate) fn lift<T: ExactInt>(x: i64) -> Result<T> {
    T::from_i64(x).ok_or_else(|| {
        Error::Resource(format!("{x} does not fit the chosen integer type"))
    })
}

fn ratio<T: ExactInt>(num: i64, den: i64) -> Result<Rational<T>> {
    Ok(Rational::new(lift(num)?, lift(den)?))
}

fn check_residue(r: i64, a: i64) -> Result<()> {
    if a < 1 {
        return Err(Error::InvalidArgument(format!(
            "modulus must be positive, got {a}"
        )));
    }
    if r < 1 || r > a || gcd(r, a) != 1 {
        return Err(Error::NotCoprime { value: r, modulus: a });
    }
    Ok(())
}

fn check_window(l: i64, m: i64) -> Result<()> {
    if m < 0 || l <= m {
        return Err(Error::InvalidSpec {
            hypothesis: "l > m >= 0",
            detail: format!("l = {l}, m = {m}"),
        });
    }
    Ok(())
}

/// `K_r = ⌊(a·l − (l−m)·r) / (a·(l−m))⌋`, floored toward −∞.
pub fn cap_k(r: i64, a: i64, l: i64, m: i64) -> Result<i64> {
    check_residue(r, a)?;
    check_window(l, m)?;
    let (r, a, l, m) = (r as i128, a as i128, l as i128, m as i128);
    let num = a * l - (l - m) * r;
    let den = a * (l - m);
    i64::try_from(Integer::div_floor(&num, &den))
        .map_err(|_| Error::Resource("K_r overflows i64".into()))
}

/// Whether `l ≥ (a + r)·m / r`, decided as `l·r ≥ (a + r)·m`.
pub fn first_branch(r: i64, a: i64, l: i64, m: i64) -> bool {
    (l as i128) * (r as i128) >= (a as i128 + r as i128) * (m as i128)
}

/// `A_r`: `l/r` when `l·r ≥ (a+r)·m`, otherwise the rung sum
/// [`residue_constant_rungs`].
pub fn residue_constant<T: ExactInt>(r: i64, a: i64, l: i64, m: i64) -> Result<Rational<T>> {
    check_residue(r, a)?;
    check_window(l, m)?;
    if first_branch(r, a, l, m) {
        ratio(l, r)
    } else {
        residue_constant_rungs(r, a, l, m)
    }
}

/// The second-branch expression
/// `Σ_{i<K_r} (l−m)/(r+a·i) + l/(r+a·K_r)` evaluated regardless of which
/// branch applies.
pub fn residue_constant_rungs<T: ExactInt>(
    r: i64,
    a: i64,
    l: i64,
    m: i64,
) -> Result<Rational<T>> {
    let k = cap_k(r, a, l, m)?;
    let width: T = lift(l - m)?;
    let mut sum = Rational::<T>::new(T::zero(), T::one());
    for i in 0..k {
        let den = checked_rung(r, a, i)?;
        sum = sum + Rational::new(width.clone(), lift(den)?);
    }
    Ok(sum + ratio(l, checked_rung(r, a, k)?)?)
}

fn checked_rung(r: i64, a: i64, i: i64) -> Result<i64> {
    a.checked_mul(i)
        .and_then(|x| x.checked_add(r))
        .ok_or_else(|| Error::Resource("r + a*i overflows i64".into()))
}

/// `A = (a/φ(a)) Σ_{r∈R(a)} A_r` for the reduced step `a1` of `spec`.
/// The offset `b` does not enter.
pub fn theorem_constant<T: ExactInt>(spec: &ProgressionSpec) -> Result<AsymptoticConstant<T>> {
    let a = spec.a1;
    let phi = euler_phi(a)?;
    let mut breakdown = BTreeMap::new();
    let mut total = Rational::<T>::new(T::zero(), T::one());
    for r in residue_set(a)? {
        let a_r = residue_constant::<T>(r, a, spec.l, spec.m)?;
        total = total + a_r.clone();
        breakdown.insert(
            r,
            ResidueTerm {
                k: cap_k(r, a, spec.l, spec.m)?,
                a_r,
            },
        );
    }
    Ok(AsymptoticConstant {
        value: total * ratio(a, phi)?,
        breakdown,
        phi,
        modulus: a,
    })
}

/// `(a·l/φ(a)) Σ_{r∈R(a)} 1/r`, valid when `l ≥ (a+1)·m`.
pub fn corollary1_constant<T: ExactInt>(a: i64, l: i64, m: i64) -> Result<Rational<T>> {
    check_window(l, m)?;
    if a < 1 {
        return Err(Error::InvalidArgument(format!("a must be positive, got {a}")));
    }
    if (l as i128) < (a as i128 + 1) * m as i128 {
        return Err(Error::InvalidArgument(format!(
            "shortcut needs l >= (a+1)m, got a = {a}, l = {l}, m = {m}"
        )));
    }
    let mut harmonic = Rational::<T>::new(T::zero(), T::one());
    for r in residue_set(a)? {
        harmonic = harmonic + ratio(1, r)?;
    }
    let scale = Rational::new(lift::<T>(a)? * lift::<T>(l)?, lift(euler_phi(a)?)?);
    Ok(harmonic * scale)
}

/// The step-one constant: `l` if `l ≥ 2m`, else
/// `l/⌊l/(l−m)⌋ + (l−m)·H_{⌊m/(l−m)⌋}`.
pub fn corollary2_constant<T: ExactInt>(l: i64, m: i64) -> Result<Rational<T>> {
    check_window(l, m)?;
    if l >= 2 * m {
        return ratio(l, 1);
    }
    let w = l - m;
    let mut sum = ratio::<T>(l, l / w)?;
    let width: T = lift(w)?;
    for i in 1..=m / w {
        sum = sum + Rational::new(width.clone(), lift(i)?);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntk::normalize;
    use num_bigint::BigInt;

    fn q(n: i64, d: i64) -> Rational<i64> {
        Rational::new(n, d)
    }

    #[test]
    fn cap_k_examples() {
        assert_eq!(cap_k(1, 1, 3, 2).unwrap(), 2);
        assert_eq!(cap_k(1, 2, 3, 1).unwrap(), 1);
        for a in 1..=12 {
            for r in residue_set(a).unwrap() {
                for l in 1..6 {
                    assert_eq!(cap_k(r, a, l, 0).unwrap(), 0);
                }
            }
        }
        assert!(cap_k(2, 4, 3, 1).is_err());
        assert!(cap_k(5, 4, 3, 1).is_err());
    }

    #[test]
    fn residue_constant_examples() {
        assert_eq!(residue_constant::<i64>(2, 3, 4, 1).unwrap(), q(2, 1));
        assert_eq!(residue_constant::<i64>(1, 1, 3, 2).unwrap(), q(5, 2));
        for a in 1..=6 {
            for r in residue_set(a).unwrap() {
                for l in 1..5 {
                    assert_eq!(residue_constant::<i64>(r, a, l, 0).unwrap(), q(l, r));
                }
            }
        }
        assert!(residue_constant::<i64>(3, 6, 2, 1).is_err());
    }

    #[test]
    fn theorem_constant_examples() {
        let a = |a, b, l, m| theorem_constant::<i64>(&normalize(a, b, l, m).unwrap()).unwrap();
        assert_eq!(a(1, 0, 1, 0).value, q(1, 1));
        assert_eq!(a(3, 1, 1, 0).value, q(9, 4));
        assert_eq!(a(1, 0, 3, 2).value, q(5, 2));
        let c = a(3, 1, 1, 0);
        assert_eq!(c.phi, 2);
        assert_eq!(c.breakdown.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(c.breakdown[&2].a_r, q(1, 2));
        assert!((c.to_f64() - 2.25).abs() < 1e-15);
    }

    #[test]
    fn gcd_reduced_constant_is_used() {
        let raw = theorem_constant::<i64>(&normalize(4, 6, 2, 1).unwrap()).unwrap();
        let red = theorem_constant::<i64>(&normalize(2, 3, 2, 1).unwrap()).unwrap();
        assert_eq!(raw, red);
        assert_eq!(raw.modulus, 2);
    }

    #[test]
    fn corollary_examples() {
        assert_eq!(corollary1_constant::<i64>(1, 1, 0).unwrap(), q(1, 1));
        assert_eq!(corollary1_constant::<i64>(3, 2, 0).unwrap(), q(9, 2));
        assert_eq!(corollary1_constant::<i64>(2, 3, 1).unwrap(), q(6, 1));
        assert!(corollary1_constant::<i64>(2, 2, 1).is_err());
        assert_eq!(corollary2_constant::<i64>(2, 1).unwrap(), q(2, 1));
        assert_eq!(corollary2_constant::<i64>(3, 2).unwrap(), q(5, 2));
        assert_eq!(corollary2_constant::<i64>(5, 3).unwrap(), q(9, 2));
        assert_eq!(residue_constant::<i64>(1, 1, 5, 3).unwrap(), q(9, 2));
        assert!(corollary2_constant::<i64>(2, 2).is_err());
    }

    #[test]
    fn branch_tie_goes_to_first_branch_and_agrees() {
        // l = (a+r)m/r exactly: both branches give l/r.
        let (a, r, m) = (3, 1, 2);
        let l = (a + r) * m / r;
        assert!(first_branch(r, a, l, m));
        assert_eq!(residue_constant_rungs::<i64>(r, a, l, m).unwrap(), q(l, r));
    }

    #[test]
    fn bigint_backing_matches_i128() {
        for (a, b, l, m) in [(5, 2, 7, 5), (8, 3, 9, 8), (1, 0, 12, 11)] {
            let s = normalize(a, b, l, m).unwrap();
            let small = theorem_constant::<i128>(&s).unwrap().value;
            let big = theorem_constant::<BigInt>(&s).unwrap().value;
            assert_eq!(big.numer().to_string(), small.numer().to_string());
            assert_eq!(big.denom().to_string(), small.denom().to_string());
        }
    }

    #[test]
    fn long_harmonic_sum_needs_bigint() {
        // K_1 = 300 rungs; the denominator is lcm(1..=301)-sized.
        let s = normalize(1, 0, 301, 300).unwrap();
        let c = theorem_constant::<BigInt>(&s).unwrap();
        assert_eq!(c.breakdown[&1].k, 300);
        let approx = c.to_f64();
        let h: f64 = (1..=300).map(|i| 1.0 / i as f64).sum();
        assert!((approx - (1.0 + h)).abs() < 1e-9, "{approx}");
    }
}
