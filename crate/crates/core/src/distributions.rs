//! Summand laws with closed-form moments, characteristic functions and
//! truncated central second moments.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{normal_cdf, normal_pdf, FRAC_1_SQRT_2PI};

/// One summand law `X_{n,j}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SummandFamily {
    Normal { mu: f64, sigma: f64 },
    Uniform { lo: f64, hi: f64 },
    /// Mass `p` at `x1`, `1 - p` at `x2`.
    TwoPoint { x1: f64, x2: f64, p: f64 },
    /// `shift + E` with `E` exponential of the given rate.
    ShiftedExponential { rate: f64, shift: f64 },
}

impl SummandFamily {
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be finite, got {v}")))
            }
        };
        match *self {
            SummandFamily::Normal { mu, sigma } => {
                finite("mu", mu)?;
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
                }
            }
            SummandFamily::Uniform { lo, hi } => {
                finite("lo", lo)?;
                finite("hi", hi)?;
                if !(lo < hi) {
                    return Err(Error::param("hi", format!("need lo < hi, got [{lo}, {hi}]")));
                }
            }
            SummandFamily::TwoPoint { x1, x2, p } => {
                finite("x1", x1)?;
                finite("x2", x2)?;
                if x1 == x2 {
                    return Err(Error::param("x2", "atoms must differ (variance would be zero)"));
                }
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::param("p", format!("must lie in (0, 1), got {p}")));
                }
            }
            SummandFamily::ShiftedExponential { rate, shift } => {
                finite("shift", shift)?;
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::param("rate", format!("must be positive, got {rate}")));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            SummandFamily::Normal { mu, .. } => mu,
            SummandFamily::Uniform { lo, hi } => 0.5 * (lo + hi),
            SummandFamily::TwoPoint { x1, x2, p } => p * x1 + (1.0 - p) * x2,
            SummandFamily::ShiftedExponential { rate, shift } => shift + 1.0 / rate,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            SummandFamily::Normal { sigma, .. } => sigma * sigma,
            SummandFamily::Uniform { lo, hi } => (hi - lo) * (hi - lo) / 12.0,
            SummandFamily::TwoPoint { x1, x2, p } => p * (1.0 - p) * (x2 - x1) * (x2 - x1),
            SummandFamily::ShiftedExponential { rate, .. } => 1.0 / (rate * rate),
        }
    }

    pub fn sd(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Characteristic function `E exp(itX)`.
    pub fn cf(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t * self.mean()) * self.centered_cf(t)
    }

    /// Characteristic function of `X - E X`.
    pub fn centered_cf(&self, t: f64) -> Complex64 {
        match *self {
            SummandFamily::Normal { sigma, .. } => {
                Complex64::new((-0.5 * sigma * sigma * t * t).exp(), 0.0)
            }
            SummandFamily::Uniform { lo, hi } => Complex64::new(sinc(0.5 * (hi - lo) * t), 0.0),
            SummandFamily::TwoPoint { x1, x2, p } => {
                let mu = self.mean();
                Complex64::from_polar(p, t * (x1 - mu)) + Complex64::from_polar(1.0 - p, t * (x2 - mu))
            }
            SummandFamily::ShiftedExponential { rate, .. } => {
                // e^{-it/λ} λ/(λ - it)
                Complex64::from_polar(1.0, -t / rate) * (rate / Complex64::new(rate, -t))
            }
        }
    }

    /// `(ln|φ(t)|, arg φ(t))` for the centered characteristic function `φ`,
    /// from closed forms that stay accurate when `|φ|` is close to one.
    pub fn centered_log_cf(&self, t: f64) -> (f64, f64) {
        match *self {
            SummandFamily::Normal { sigma, .. } => (-0.5 * sigma * sigma * t * t, 0.0),
            SummandFamily::Uniform { lo, hi } => {
                let x = 0.5 * (hi - lo) * t;
                if x.abs() < 1e-2 {
                    let x2 = x * x;
                    (-x2 * (1.0 / 6.0 + x2 * (1.0 / 180.0 + x2 / 2835.0)), 0.0)
                } else {
                    let v = x.sin() / x;
                    (v.abs().ln(), if v < 0.0 { std::f64::consts::PI } else { 0.0 })
                }
            }
            SummandFamily::TwoPoint { x1, x2, p } => {
                let half = (0.5 * t * (x2 - x1)).sin();
                let q = 4.0 * p * (1.0 - p) * half * half;
                let log_mod = if q >= 1.0 { f64::NEG_INFINITY } else { 0.5 * (-q).ln_1p() };
                (log_mod, self.centered_cf(t).arg())
            }
            SummandFamily::ShiftedExponential { rate, .. } => {
                let u = t / rate;
                let arg = if u.abs() < 1e-3 {
                    let u2 = u * u;
                    -u * u2 * (1.0 / 3.0 - u2 * (1.0 / 5.0 - u2 / 7.0))
                } else {
                    u.atan() - u
                };
                (-0.5 * (u * u).ln_1p(), arg)
            }
        }
    }

    /// `∫_{|x-μ|>c} (x-μ)² dF(x)`, the central second moment beyond `c`.
    pub fn truncated_second_moment(&self, c: f64) -> f64 {
        debug_assert!(c >= 0.0);
        let c = c.max(0.0);
        match *self {
            SummandFamily::Normal { sigma, .. } => {
                let z = c / sigma;
                // 2σ²[zφ(z) + 1 - Φ(z)]
                let upper = normal_cdf(-z);
                2.0 * sigma * sigma * (z * normal_pdf(z) + upper)
            }
            SummandFamily::Uniform { lo, hi } => {
                let h = 0.5 * (hi - lo);
                if c >= h {
                    0.0
                } else {
                    (h * h * h - c * c * c) / (3.0 * h)
                }
            }
            SummandFamily::TwoPoint { x1, x2, p } => {
                let mu = self.mean();
                let (d1, d2) = (x1 - mu, x2 - mu);
                let mut v = 0.0;
                if d1.abs() > c {
                    v += p * d1 * d1;
                }
                if d2.abs() > c {
                    v += (1.0 - p) * d2 * d2;
                }
                v
            }
            SummandFamily::ShiftedExponential { rate, .. } => {
                // G(e) = -e^{-λe}[(e-m)² + 2(e-m)/λ + 2/λ²] is an antiderivative of
                // (e-m)² λe^{-λe}; m = 1/λ is the mean of the exponential part.
                let inv = 1.0 / rate;
                let upper = (-1.0 - rate * c).exp() * (c * c + 2.0 * c * inv + 2.0 * inv * inv);
                let lower = if c < inv {
                    inv * inv - (rate * c - 1.0).exp() * (c * c - 2.0 * c * inv + 2.0 * inv * inv)
                } else {
                    0.0
                };
                (upper + lower).max(0.0)
            }
        }
    }

    /// `E|X - μ|³`.
    pub fn third_abs_central_moment(&self) -> f64 {
        match *self {
            SummandFamily::Normal { sigma, .. } => 4.0 * FRAC_1_SQRT_2PI * sigma.powi(3),
            SummandFamily::Uniform { lo, hi } => {
                let h = 0.5 * (hi - lo);
                h.powi(3) / 4.0
            }
            SummandFamily::TwoPoint { x1, x2, p } => {
                let mu = self.mean();
                p * (x1 - mu).abs().powi(3) + (1.0 - p) * (x2 - mu).abs().powi(3)
            }
            SummandFamily::ShiftedExponential { rate, .. } => {
                (12.0 / std::f64::consts::E - 2.0) / rate.powi(3)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            SummandFamily::Normal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mu + sigma * z
            }
            SummandFamily::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            SummandFamily::TwoPoint { x1, x2, p } => {
                if rng.random::<f64>() < p {
                    x1
                } else {
                    x2
                }
            }
            SummandFamily::ShiftedExponential { rate, shift } => {
                let e: f64 = rng.sample(Exp1);
                shift + e / rate
            }
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Shape of a summand law up to location and scale. Rows of a double array
/// are built by placing this template at the mean and standard deviation each
/// summand requires.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SummandShape {
    Normal,
    Uniform,
    /// Two atoms, the lower one carrying probability `p`.
    TwoPoint { p: f64 },
    ShiftedExponential,
}

impl SummandShape {
    pub fn validate(&self) -> Result<()> {
        if let SummandShape::TwoPoint { p } = *self {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::param("shape.p", format!("must lie in (0, 1), got {p}")));
            }
        }
        Ok(())
    }

    /// The template instance with mean 0 and variance 1.
    pub fn standard(&self) -> SummandFamily {
        self.instantiate(0.0, 1.0)
    }

    /// The member of the shape with the given mean and standard deviation.
    pub fn instantiate(&self, mean: f64, sd: f64) -> SummandFamily {
        match *self {
            SummandShape::Normal => SummandFamily::Normal { mu: mean, sigma: sd },
            SummandShape::Uniform => {
                let h = 3f64.sqrt() * sd;
                SummandFamily::Uniform { lo: mean - h, hi: mean + h }
            }
            SummandShape::TwoPoint { p } => SummandFamily::TwoPoint {
                x1: mean - sd * ((1.0 - p) / p).sqrt(),
                x2: mean + sd * (p / (1.0 - p)).sqrt(),
                p,
            },
            SummandShape::ShiftedExponential => SummandFamily::ShiftedExponential {
                rate: 1.0 / sd,
                shift: mean - sd,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SummandShape::Normal => "normal",
            SummandShape::Uniform => "uniform",
            SummandShape::TwoPoint { .. } => "two_point",
            SummandShape::ShiftedExponential => "shifted_exponential",
        }
    }
}
