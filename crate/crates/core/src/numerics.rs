//! Floating point helpers shared by the enumeration and sampling code.

use std::f64::consts::PI;

const STIRLING_MIN: f64 = 20.0;

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * z2)) / z2) / z2) / z
}

/// `ln Γ(a) − ln Γ(b)` for positive `a`, `b`.
///
/// For large arguments the two Stirling expansions are subtracted term by
/// term, so the result keeps full relative precision even when both
/// log-gammas are around 1e10 and their difference is small.
pub fn ln_gamma_diff(a: f64, b: f64) -> f64 {
    debug_assert!(a > 0.0 && b > 0.0);
    if a == b {
        return 0.0;
    }
    if a < STIRLING_MIN || b < STIRLING_MIN {
        return libm::lgamma(a) - libm::lgamma(b);
    }
    let d = a - b;
    // (a-1/2) ln a - (b-1/2) ln b = (a-1/2) ln(a/b) + d ln b
    (a - 0.5) * (d / b).ln_1p() + d * b.ln() - d + (stirling_tail(a) - stirling_tail(b))
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln(C(2n, n) / 4^n)`.
pub fn ln_central_binomial_over_4n(n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let x = n as f64;
    if n < 1000 {
        return ln_gamma(2.0 * x + 1.0) - 2.0 * ln_gamma(x + 1.0) - x * 4f64.ln();
    }
    let inv = 1.0 / x;
    -0.5 * (PI * x).ln() - inv / 8.0 + inv * inv * inv / 192.0
}

/// Kahan–Babuška–Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_diff_matches_lgamma_in_overlap() {
        for &(a, b) in &[(25.0, 21.0), (300.5, 299.0), (1e4, 2e4), (77.0, 1500.0)] {
            let direct = libm::lgamma(a) - libm::lgamma(b);
            let got = ln_gamma_diff(a, b);
            assert!((direct - got).abs() < 1e-9 * (1.0 + direct.abs()), "{a} {b}");
        }
    }

    #[test]
    fn gamma_diff_small_shift_at_huge_argument() {
        // Γ(x+1)/Γ(x) = x
        let x = 1.0e12;
        assert!((ln_gamma_diff(x + 1.0, x) - x.ln()).abs() < 1e-12);
        let x: f64 = 3.0e9;
        let want = (x * (x + 1.0)).ln();
        assert!((ln_gamma_diff(x + 2.0, x) - want).abs() < 1e-12);
    }

    #[test]
    fn central_binomial_branches_meet() {
        let x = 1000.0f64;
        let direct = ln_gamma(2.0 * x + 1.0) - 2.0 * ln_gamma(x + 1.0) - x * 4f64.ln();
        assert!((direct - ln_central_binomial_over_4n(1000)).abs() < 1e-11);
        assert_eq!(ln_central_binomial_over_4n(0), 0.0);
        assert!((ln_central_binomial_over_4n(1) - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        assert!((s.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }
}
