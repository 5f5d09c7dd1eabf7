//! Exact least common multiples of arithmetic-progression windows
//! `L_{m,l}(n) = lcm{a·i + b : m·n < i ≤ l·n}`, their prime-support
//! decomposition by residue class, and the asymptotic constant `A` with
//! `log L_{m,l}(n) = A·n + o(n)`.
//!
//! The exact arithmetic is generic over the integer type behind
//! [`Rational`]; log-domain sums are generic over the float type. The
//! aliases below fix the common choices.

pub mod cli;
pub mod constants;
pub mod engine;
pub mod error;
pub mod ntk;
pub mod report;
pub mod residue;
pub mod sieve;
pub mod summation;
pub mod verify;

use num_bigint::{BigInt, ToBigInt};
use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};

pub use constants::{
    cap_k, corollary1_constant, corollary2_constant, residue_constant, theorem_constant,
    AsymptoticConstant,
};
pub use engine::{
    factor_window_sieve, lcm_fold, log_lcm, squarefull_split, window_terms, PrimePowerMap,
    WindowInstance,
};
pub use error::{Error, Result};
pub use ntk::{companion_residue, euler_phi, gcd, normalize, residue_set, ProgressionSpec};
pub use residue::{
    build_family, estimate_log_lcm, finite_form_valid, member, residue_log_sum, theta,
    IntervalFamily, Method,
};

/// Exact rational with integer type `T`, always in lowest terms with a
/// positive denominator. Ordering is exact.
pub type Rational<T> = num_rational::Ratio<T>;
pub type Rational64 = Rational<i64>;
pub type BigRational = Rational<BigInt>;

/// Constant backed by arbitrary-precision rationals; what the CLI uses.
pub type BigConstant = AsymptoticConstant<BigInt>;
pub type Constant64 = AsymptoticConstant<i64>;

/// Signed integer types usable behind [`Rational`].
pub trait ExactInt:
    Integer + Signed + Clone + FromPrimitive + ToPrimitive + ToBigInt + std::fmt::Debug + std::fmt::Display
{
}

impl<T> ExactInt for T where
    T: Integer
        + Signed
        + Clone
        + FromPrimitive
        + ToPrimitive
        + ToBigInt
        + std::fmt::Debug
        + std::fmt::Display
{
}

pub(crate) fn rational_to_f64<T: ExactInt>(x: &Rational<T>) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
