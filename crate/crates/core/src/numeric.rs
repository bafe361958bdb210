//! Small numerical helpers shared by the modules: normal distribution
//! functions, compensated summation and monotone root finding.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::erfc;

pub(crate) const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `ln Φ(x)`, accurate far into the left tail.
pub(crate) fn ln_normal_cdf(x: f64) -> f64 {
    if x > -30.0 {
        normal_cdf(x).ln()
    } else {
        // Mills-ratio asymptotics: Φ(x) ≈ φ(x)/|x| (1 - 1/x² + 3/x⁴).
        let z = -x;
        let z2 = z * z;
        -0.5 * z2 - z.ln() - 0.5 * (2.0 * PI).ln() + (1.0 - 1.0 / z2 + 3.0 / (z2 * z2)).ln()
    }
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub(crate) fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<KahanSum>().value()
}

/// Solves `f(x) = 0` for a nondecreasing `f` on `(0, ∞)` by bisection in
/// log-space. Returns `x` with relative bracket width below `1e-15`.
pub(crate) fn solve_increasing_positive(f: impl Fn(f64) -> f64, guess: f64) -> f64 {
    let mut lo = if guess > 0.0 && guess.is_finite() { guess } else { 1.0 };
    let mut hi = lo;
    while f(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return lo;
        }
    }
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    for _ in 0..400 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        let mid = if mid <= lo || mid >= hi { 0.5 * (lo + hi) } else { mid };
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection for a nondecreasing `f` on the whole line.
pub(crate) fn solve_increasing(f: impl Fn(f64) -> f64, guess: f64, scale: f64) -> f64 {
    let step = if scale > 0.0 { scale } else { 1.0 };
    let mut lo = guess - step;
    let mut hi = guess + step;
    let mut width = step;
    while f(lo) > 0.0 {
        width *= 2.0;
        lo = guess - width;
        if width > 1e300 {
            return lo;
        }
    }
    width = step;
    while f(hi) < 0.0 {
        width *= 2.0;
        hi = guess + width;
        if width > 1e300 {
            return hi;
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-17);
    }

    #[test]
    fn ln_normal_cdf_matches_direct_where_both_work() {
        for &x in &[-29.0, -20.0, -5.0, 0.0, 2.0] {
            assert!((ln_normal_cdf(x) - normal_cdf(x).ln()).abs() < 1e-10 * normal_cdf(x).ln().abs().max(1.0));
        }
        // continuity across the switch
        assert!((ln_normal_cdf(-30.0 + 1e-9) - ln_normal_cdf(-30.0 - 1e-9)).abs() < 1e-6);
    }

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        assert!((acc.value() - (1.0 + 1e-10)).abs() < 1e-22 + 1e-16);
    }

    #[test]
    fn solvers_find_roots() {
        let r = solve_increasing_positive(|x| x * x - 2.0, 1.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
        let r = solve_increasing(|x| x.powi(3) + 5.0, 0.0, 1.0);
        assert!((r + 5f64.cbrt()).abs() < 1e-13);
    }
}
