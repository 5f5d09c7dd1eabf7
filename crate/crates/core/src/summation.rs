//! Compensated (Neumaier) summation for long sums of logarithms.
//!
//! The error of a sum of `N` nonnegative addends is bounded by about
//! `2ε·Σ|x|` independent of `N`; for `f64` and the log sums here that is far
//! below `1e-9` per `10^6` addends.

use num_traits::Float;

#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<F: Float> {
    sum: F,
    carry: F,
}

impl<F: Float> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Float> CompensatedSum<F> {
    pub fn new() -> Self {
        Self {
            sum: F::zero(),
            carry: F::zero(),
        }
    }

    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum + self.carry
    }
}

impl<F: Float> Extend<F> for CompensatedSum<F> {
    fn extend<I: IntoIterator<Item = F>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl<F: Float> FromIterator<F> for CompensatedSum<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<F: Float, I: IntoIterator<Item = F>>(iter: I) -> F {
    iter.into_iter().collect::<CompensatedSum<F>>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        let xs = [1.0f64, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_eq!(xs.iter().sum::<f64>(), 0.0);
    }

    #[test]
    fn million_logs_within_budget() {
        // Σ ln k for k ≤ N is ln N!, which Stirling gets to ~1e-20 here.
        let n = 1_000_000u64;
        let s = compensated_sum((1..=n).map(|k| (k as f64).ln()));
        let x = n as f64;
        let stirling = x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
            + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!((s - stirling).abs() < 1e-9 * 10.0 + stirling * 1e-15, "{}", s - stirling);
    }

    #[test]
    fn works_for_f32() {
        let s: f32 = compensated_sum(std::iter::repeat_n(0.1f32, 10_000));
        assert!((s - 1000.0).abs() < 1e-3);
    }
}
