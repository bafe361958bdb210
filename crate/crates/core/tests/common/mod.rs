//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the numerical routines under test.
#![allow(dead_code)]

use num_complex::Complex64;
use randsum_core::scheme::Row;

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}

/// Adaptive Simpson to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 22)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `erfc(y)` for `y ≥ 0`: the positive-term series for `erf` below 3, a
/// Lentz continued fraction above.
fn erfc_oracle(y: f64) -> f64 {
    assert!(y >= 0.0);
    if y < 3.0 {
        let mut term = y;
        let mut sum = y;
        let mut n = 0.0;
        while term > 1e-18 * sum {
            n += 1.0;
            term *= 2.0 * y * y / (2.0 * n + 1.0);
            sum += term;
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * (-y * y).exp() * sum
    } else {
        // erfc(y) = e^{-y²}/√π · 1/(y + (1/2)/(y + 1/(y + (3/2)/(y + ...))))
        let tiny = 1e-300;
        let mut f = y;
        let mut c = y;
        let mut d = 0.0;
        for k in 1..500 {
            let a = k as f64 / 2.0;
            d = y + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = y + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-y * y).exp() / std::f64::consts::PI.sqrt() / f
    }
}

/// `Φ(x)`, independent of the crate's implementation.
pub fn std_normal_cdf(x: f64) -> f64 {
    let y = x / std::f64::consts::SQRT_2;
    if y < 0.0 {
        0.5 * erfc_oracle(-y)
    } else {
        1.0 - 0.5 * erfc_oracle(y)
    }
}

#[test]
fn normal_cdf_oracle_reference_values() {
    assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
    assert!((std_normal_cdf(-3.0) - 0.001_349_898_031_630_094_6).abs() < 1e-15);
    assert!((std_normal_cdf(-5.0) - 2.866_515_718_791_939e-7).abs() < 1e-20);
    assert!((std_normal_cdf(-4.2) - 1.334_574_901_590_634e-5).abs() < 1e-15);
}

/// Asymmetric Laplace law of `αW + √W·G`, `W ~ Exp(1)`: density
/// `e^{αx - γ|x|}/γ` with `γ = √(α² + 2)`.
pub fn asymmetric_laplace_cdf(alpha: f64, x: f64) -> f64 {
    let g = (alpha * alpha + 2.0).sqrt();
    if x < 0.0 {
        ((alpha + g) * x).exp() / (g * (alpha + g))
    } else {
        1.0 - ((alpha - g) * x).exp() / (g * (g - alpha))
    }
}

pub fn asymmetric_laplace_pdf(alpha: f64, x: f64) -> f64 {
    let g = (alpha * alpha + 2.0).sqrt();
    (alpha * x - g * x.abs()).exp() / g
}

/// `f_n(t)` straight from the definition: the full summand characteristic
/// functions, multiplied one by one, weighted by the index pmf up to `k_max`.
pub fn brute_fn(row: &Row, t: f64, k_max: u64) -> Complex64 {
    let d = row.d_n();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..=k_max {
        prod *= row.family(k).cf(t / d);
        acc += prod * row.index_law().pmf(k);
    }
    acc * Complex64::from_polar(1.0, -t * row.c_n() / d)
}

/// `h_{n,k}(t)` from the definition.
pub fn brute_hnk(row: &Row, k: u64, t: f64) -> Complex64 {
    let b = row.b2(k).sqrt();
    let mut prod = Complex64::from_polar(1.0, -t * row.a(k) / b);
    for j in 1..=k {
        prod *= row.family(j).cf(t / b);
    }
    prod
}

/// Direct Lévy distance by grid search over `y` and `x` for step CDFs given
/// as sorted atoms with masses.
pub fn levy_grid_oracle(f1: &dyn Fn(f64) -> f64, f2: &dyn Fn(f64) -> f64, xs: &[f64], ys: &[f64]) -> f64 {
    let ok = |y: f64| xs.iter().all(|&x| f2(x - y) - y <= f1(x) + 1e-12 && f1(x) <= f2(x + y) + y + 1e-12);
    // feasibility is monotone in y, so the first feasible grid value is found by bisection
    if ys.is_empty() || !ok(ys[ys.len() - 1]) {
        return 1.0;
    }
    if ok(ys[0]) {
        return ys[0];
    }
    let (mut lo, mut hi) = (0usize, ys.len() - 1);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(ys[mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    ys[hi]
}

/// Standard error of a Monte-Carlo mean.
pub fn standard_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Two-sided critical value of the Kolmogorov distribution at level 0.05.
pub const KS_95: f64 = 1.36;
