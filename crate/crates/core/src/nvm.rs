//! Normal variance-mean mixtures `Z = β + αW + √W·G` with `G ~ N(0, 1)`
//! independent of the mixing variable `W ≥ 0`.
//!
//! The CDF `P(Z < x) = E Φ((x - β - αW)/√W)` is integrated in the quantile
//! domain of `W`: composite Gauss–Legendre panels with geometrically shrinking
//! widths towards both tails of `u ∈ [10⁻¹⁰, 1 - 10⁻¹⁰]`, and the two
//! remaining tails of mass `10⁻¹⁰` replaced by the limits of the integrand.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, InverseGaussian, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};
use crate::metrics::EvaluableCdf;
use crate::numeric::{ln_normal_cdf, normal_cdf, normal_pdf, solve_increasing, solve_increasing_positive};
use crate::quad::gauss_legendre;

/// Quantile levels below this (and above its complement) are not integrated.
pub const TAIL_U: f64 = 1e-10;

/// Gauss–Legendre nodes per panel.
pub const NODES_PER_PANEL: usize = 16;

/// Law of the mixing variable `W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum MixingLaw {
    /// `W ≡ w`.
    Dirac { w: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, rate: f64 },
    /// `W = scale / G`, `G ~ Gamma(shape, 1)`.
    InverseGamma { shape: f64, scale: f64 },
    InverseGaussian { mean: f64, shape: f64 },
}

impl fmt::Display for MixingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MixingLaw::Dirac { w } => write!(f, "Dirac({w})"),
            MixingLaw::Exponential { rate } => write!(f, "Exponential(rate={rate})"),
            MixingLaw::Gamma { shape, rate } => write!(f, "Gamma(shape={shape}, rate={rate})"),
            MixingLaw::InverseGamma { shape, scale } => write!(f, "InverseGamma(shape={shape}, scale={scale})"),
            MixingLaw::InverseGaussian { mean, shape } => write!(f, "InverseGaussian(mean={mean}, shape={shape})"),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be positive and finite, got {v}")))
    }
}

impl MixingLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MixingLaw::Dirac { w } => {
                if w >= 0.0 && w.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("mixing.w", format!("must be non-negative, got {w}")))
                }
            }
            MixingLaw::Exponential { rate } => positive("mixing.rate", rate),
            MixingLaw::Gamma { shape, rate } => {
                positive("mixing.shape", shape)?;
                positive("mixing.rate", rate)
            }
            MixingLaw::InverseGamma { shape, scale } => {
                positive("mixing.shape", shape)?;
                positive("mixing.scale", scale)
            }
            MixingLaw::InverseGaussian { mean, shape } => {
                positive("mixing.mean", mean)?;
                positive("mixing.shape", shape)
            }
        }
    }

    /// `E W`; infinite for an inverse gamma law with `shape ≤ 1`.
    pub fn mean(&self) -> f64 {
        match *self {
            MixingLaw::Dirac { w } => w,
            MixingLaw::Exponential { rate } => 1.0 / rate,
            MixingLaw::Gamma { shape, rate } => shape / rate,
            MixingLaw::InverseGamma { shape, scale } => {
                if shape > 1.0 {
                    scale / (shape - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            MixingLaw::InverseGaussian { mean, .. } => mean,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, MixingLaw::Dirac { .. })
    }

    /// `P(W < w)`.
    pub fn cdf(&self, w: f64) -> f64 {
        if w.is_nan() {
            return f64::NAN;
        }
        match *self {
            MixingLaw::Dirac { w: w0 } => {
                if w > w0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ if w <= 0.0 => 0.0,
            _ if w == f64::INFINITY => 1.0,
            MixingLaw::Exponential { rate } => -(-rate * w).exp_m1(),
            MixingLaw::Gamma { shape, rate } => gamma_lr(shape, rate * w),
            MixingLaw::InverseGamma { shape, scale } => gamma_ur(shape, scale / w),
            MixingLaw::InverseGaussian { mean, shape } => {
                let r = (shape / w).sqrt();
                let a = normal_cdf(r * (w / mean - 1.0));
                let b = (2.0 * shape / mean + ln_normal_cdf(-r * (w / mean + 1.0))).exp();
                (a + b).min(1.0)
            }
        }
    }

    /// `P(W > w)`, accurate in the upper tail.
    pub fn sf(&self, w: f64) -> f64 {
        if w.is_nan() {
            return f64::NAN;
        }
        match *self {
            MixingLaw::Dirac { w: w0 } => {
                if w < w0 {
                    1.0
                } else {
                    0.0
                }
            }
            _ if w <= 0.0 => 1.0,
            _ if w == f64::INFINITY => 0.0,
            MixingLaw::Exponential { rate } => (-rate * w).exp(),
            MixingLaw::Gamma { shape, rate } => gamma_ur(shape, rate * w),
            MixingLaw::InverseGamma { shape, scale } => gamma_lr(shape, scale / w),
            MixingLaw::InverseGaussian { mean, shape } => {
                let r = (shape / w).sqrt();
                let a = normal_cdf(-r * (w / mean - 1.0));
                let b = (2.0 * shape / mean + ln_normal_cdf(-r * (w / mean + 1.0))).exp();
                (a - b).max(0.0)
            }
        }
    }

    /// Density of `W` (zero for a point mass).
    pub fn pdf(&self, w: f64) -> f64 {
        if w <= 0.0 || !w.is_finite() {
            return 0.0;
        }
        match *self {
            MixingLaw::Dirac { .. } => 0.0,
            MixingLaw::Exponential { rate } => rate * (-rate * w).exp(),
            MixingLaw::Gamma { shape, rate } => {
                (shape * rate.ln() + (shape - 1.0) * w.ln() - rate * w - statrs::function::gamma::ln_gamma(shape)).exp()
            }
            MixingLaw::InverseGamma { shape, scale } => {
                (shape * scale.ln() - (shape + 1.0) * w.ln() - scale / w - statrs::function::gamma::ln_gamma(shape)).exp()
            }
            MixingLaw::InverseGaussian { mean, shape } => {
                (shape / (2.0 * std::f64::consts::PI * w.powi(3))).sqrt()
                    * (-shape * (w - mean).powi(2) / (2.0 * mean * mean * w)).exp()
            }
        }
    }

    fn scale_hint(&self) -> f64 {
        let m = self.mean();
        if m.is_finite() && m > 0.0 {
            m
        } else if let MixingLaw::InverseGamma { shape, scale } = *self {
            scale / (shape + 1.0)
        } else {
            1.0
        }
    }

    /// Lower quantile: `w` with `P(W < w) = u`.
    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            MixingLaw::Dirac { w } => w,
            _ if u <= 0.0 => 0.0,
            _ if u >= 1.0 => f64::INFINITY,
            MixingLaw::Exponential { rate } => -(-u).ln_1p() / rate,
            _ if u > 0.5 => self.upper_quantile(1.0 - u),
            _ => solve_increasing_positive(|w| self.cdf(w) - u, self.scale_hint()),
        }
    }

    /// Upper quantile: `w` with `P(W > w) = v`, without forming `1 - v`.
    pub fn upper_quantile(&self, v: f64) -> f64 {
        match *self {
            MixingLaw::Dirac { w } => w,
            _ if v >= 1.0 => 0.0,
            _ if v <= 0.0 => f64::INFINITY,
            MixingLaw::Exponential { rate } => -v.ln() / rate,
            _ if v > 0.5 => self.quantile(1.0 - v),
            _ => solve_increasing_positive(|w| v - self.sf(w), self.scale_hint()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            MixingLaw::Dirac { w } => w,
            MixingLaw::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                e / rate
            }
            MixingLaw::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("validated").sample(rng),
            MixingLaw::InverseGamma { shape, scale } => {
                scale / Gamma::new(shape, 1.0).expect("validated").sample(rng)
            }
            MixingLaw::InverseGaussian { mean, shape } => {
                InverseGaussian::new(mean, shape).expect("validated").sample(rng)
            }
        }
    }
}

/// Serialized form of an [`NVMixture`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureConfig {
    pub mixing: MixingLaw,
    pub alpha: f64,
    #[serde(default)]
    pub beta: f64,
}

/// The law of `β + αW + √W·G`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "MixtureConfig", into = "MixtureConfig")]
pub struct NVMixture {
    mixing: MixingLaw,
    alpha: f64,
    beta: f64,
    /// `(weight, w)` quadrature pairs in the quantile domain of `W`.
    nodes: Arc<Vec<(f64, f64)>>,
    lower_tail: f64,
    upper_tail: f64,
}

impl PartialEq for NVMixture {
    fn eq(&self, other: &Self) -> bool {
        self.mixing == other.mixing && self.alpha == other.alpha && self.beta == other.beta
    }
}

impl TryFrom<MixtureConfig> for NVMixture {
    type Error = Error;

    fn try_from(c: MixtureConfig) -> Result<Self> {
        NVMixture::new(c.mixing, c.alpha, c.beta)
    }
}

impl From<NVMixture> for MixtureConfig {
    fn from(m: NVMixture) -> Self {
        m.config()
    }
}

impl fmt::Display for NVMixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NVM(W={}, alpha={}, beta={})", self.mixing, self.alpha, self.beta)
    }
}

/// Panel edges on `[TAIL_U, 1/2]`, one per decade.
fn half_panels() -> Vec<(f64, f64)> {
    let mut edges: Vec<f64> = (0..10).map(|i| TAIL_U * 10f64.powi(i)).collect();
    edges.push(0.5);
    edges.windows(2).map(|w| (w[0], w[1])).collect()
}

impl NVMixture {
    pub fn new(mixing: MixingLaw, alpha: f64, beta: f64) -> Result<Self> {
        Self::with_nodes_per_panel(mixing, alpha, beta, NODES_PER_PANEL)
    }

    /// As [`NVMixture::new`] with a custom panel order (for accuracy checks).
    pub fn with_nodes_per_panel(mixing: MixingLaw, alpha: f64, beta: f64, per_panel: usize) -> Result<Self> {
        mixing.validate()?;
        if !alpha.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        if !beta.is_finite() {
            return Err(Error::param("beta", "must be finite"));
        }
        if per_panel == 0 {
            return Err(Error::param("per_panel", "must be positive"));
        }
        let (nodes, lower_tail, upper_tail) = if mixing.is_degenerate() {
            (vec![(1.0, mixing.quantile(0.5))], 0.0, 0.0)
        } else {
            let (x, w) = gauss_legendre(per_panel);
            let mut nodes = Vec::with_capacity(40 * per_panel);
            for (lo, hi) in half_panels() {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (xi, wi) in x.iter().zip(&w) {
                    let u = mid + half * xi;
                    nodes.push((wi * half, mixing.quantile(u)));
                    nodes.push((wi * half, mixing.upper_quantile(u)));
                }
            }
            nodes.sort_by(|a, b| a.1.total_cmp(&b.1));
            (nodes, TAIL_U, TAIL_U)
        };
        Ok(NVMixture { mixing, alpha, beta, nodes: Arc::new(nodes), lower_tail, upper_tail })
    }

    pub fn from_config(config: &MixtureConfig) -> Result<Self> {
        Self::new(config.mixing, config.alpha, config.beta)
    }

    pub fn config(&self) -> MixtureConfig {
        MixtureConfig { mixing: self.mixing, alpha: self.alpha, beta: self.beta }
    }

    pub fn mixing(&self) -> &MixingLaw {
        &self.mixing
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mean(&self) -> f64 {
        self.beta + self.alpha * self.mixing.mean()
    }

    /// The mixture collapses to the point mass at `β`.
    fn is_point_mass(&self) -> bool {
        self.mixing == MixingLaw::Dirac { w: 0.0 }
    }

    fn conditional_cdf(&self, x: f64, w: f64) -> f64 {
        if w == 0.0 {
            return step(x - self.beta);
        }
        normal_cdf((x - self.beta - self.alpha * w) / w.sqrt())
    }

    /// `P(Z < x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_point_mass() {
            return if x > self.beta { 1.0 } else { 0.0 };
        }
        let mut acc = 0.0;
        for &(weight, w) in self.nodes.iter() {
            acc += weight * self.conditional_cdf(x, w);
        }
        // Integrand limits as W → 0 and W → ∞.
        acc += self.lower_tail * step(x - self.beta);
        acc += self.upper_tail * step(-self.alpha);
        acc.clamp(0.0, 1.0)
    }

    /// Density of `Z` (zero for a point mass).
    pub fn pdf(&self, x: f64) -> f64 {
        if self.is_point_mass() {
            return 0.0;
        }
        let mut acc = 0.0;
        for &(weight, w) in self.nodes.iter() {
            if w > 0.0 {
                let s = w.sqrt();
                acc += weight * normal_pdf((x - self.beta - self.alpha * w) / s) / s;
            }
        }
        acc
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let w = self.mixing.sample(rng);
        let g: f64 = StandardNormal.sample(rng);
        self.beta + self.alpha * w + w.sqrt() * g
    }

    /// `x` with `P(Z < x) = p` (by bisection).
    pub fn quantile(&self, p: f64) -> f64 {
        if self.is_point_mass() {
            return self.beta;
        }
        let scale = (self.mixing.scale_hint() * (1.0 + self.alpha * self.alpha)).sqrt().max(1e-3);
        solve_increasing(|x| self.cdf(x) - p, self.beta, scale)
    }

    /// A cubic Hermite table of the CDF on `points` uniform nodes spanning the
    /// central `1 - 2·10⁻⁹` of the mass.
    pub fn tabulate(&self, points: usize) -> TabulatedCdf {
        let points = points.max(2);
        if self.is_point_mass() {
            return TabulatedCdf {
                lo: self.beta,
                step: 0.0,
                center: self.beta,
                scale: 1.0,
                values: vec![0.0, 1.0],
                slopes: vec![0.0, 0.0],
                point_mass: true,
            };
        }
        let lo = self.quantile(1e-9);
        let hi = self.quantile(1.0 - 1e-9);
        // Nodes are uniform in y with x = center + scale·sinh(y): dense in the
        // bulk, sparse in long tails.
        let center = self.quantile(0.5);
        let scale = ((self.quantile(0.75) - self.quantile(0.25)) / 2.0).max(1e-9);
        let y_lo = ((lo - center) / scale).asinh();
        let y_hi = ((hi - center) / scale).asinh();
        let step = (y_hi - y_lo) / (points - 1) as f64;
        let mut values = Vec::with_capacity(points);
        let mut slopes = Vec::with_capacity(points);
        for i in 0..points {
            let y = y_lo + i as f64 * step;
            let x = center + scale * y.sinh();
            values.push(self.cdf(x));
            slopes.push(self.pdf(x) * scale * y.cosh());
        }
        TabulatedCdf { lo: y_lo, step, center, scale, values, slopes, point_mass: false }
    }
}

fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

impl EvaluableCdf for NVMixture {
    fn cdf(&self, x: f64) -> f64 {
        NVMixture::cdf(self, x)
    }

    fn cdf_right(&self, x: f64) -> f64 {
        if self.is_point_mass() && x == self.beta {
            1.0
        } else {
            NVMixture::cdf(self, x)
        }
    }

    fn breakpoints(&self) -> Option<&[f64]> {
        if self.is_point_mass() {
            Some(std::slice::from_ref(&self.beta))
        } else {
            None
        }
    }

    fn support_hint(&self) -> (f64, f64) {
        if self.is_point_mass() {
            (self.beta, self.beta)
        } else {
            (self.quantile(1e-9), self.quantile(1.0 - 1e-9))
        }
    }
}

/// Piecewise cubic Hermite interpolant of a continuous CDF, clamped to the
/// bracketing table values so it stays monotone.
#[derive(Clone, Debug)]
pub struct TabulatedCdf {
    /// For a point mass this is the atom; otherwise the first node in y.
    lo: f64,
    step: f64,
    center: f64,
    scale: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
    point_mass: bool,
}

impl TabulatedCdf {
    pub fn cdf(&self, x: f64) -> f64 {
        if self.point_mass {
            return if x > self.lo { 1.0 } else { 0.0 };
        }
        let last = self.values.len() - 1;
        let y = ((x - self.center) / self.scale).asinh();
        let pos = (y - self.lo) / self.step;
        if !(pos > 0.0) {
            return self.values[0];
        }
        if pos >= last as f64 {
            return self.values[last];
        }
        let i = pos.floor() as usize;
        let s = pos - i as f64;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * self.step, self.slopes[i + 1] * self.step);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        (h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1).clamp(y0, y1)
    }

    pub fn range(&self) -> (f64, f64) {
        if self.point_mass {
            return (self.lo, self.lo);
        }
        let y_hi = self.lo + self.step * (self.values.len() - 1) as f64;
        (self.center + self.scale * self.lo.sinh(), self.center + self.scale * y_hi.sinh())
    }
}

impl EvaluableCdf for TabulatedCdf {
    fn cdf(&self, x: f64) -> f64 {
        TabulatedCdf::cdf(self, x)
    }

    fn cdf_right(&self, x: f64) -> f64 {
        if self.point_mass && x == self.lo {
            1.0
        } else {
            TabulatedCdf::cdf(self, x)
        }
    }

    fn breakpoints(&self) -> Option<&[f64]> {
        if self.point_mass {
            Some(std::slice::from_ref(&self.lo))
        } else {
            None
        }
    }

    fn support_hint(&self) -> (f64, f64) {
        self.range()
    }
}

/// The pair `(√W, αW + β)` whose mixture is an [`NVMixture`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VarianceMeanPair {
    pub mixing: MixingLaw,
    pub alpha: f64,
    pub beta: f64,
}

impl VarianceMeanPair {
    pub fn of(m: &NVMixture) -> Self {
        VarianceMeanPair { mixing: m.mixing, alpha: m.alpha, beta: m.beta }
    }
}

impl crate::metrics::JointCdf for VarianceMeanPair {
    /// `P(√W < u, αW + β < v)`.
    fn joint_cdf(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let wu = u * u;
        if let MixingLaw::Dirac { w } = self.mixing {
            let hit = w.sqrt() < u && self.alpha * w + self.beta < v;
            return if hit { 1.0 } else { 0.0 };
        }
        if self.alpha == 0.0 {
            return if self.beta < v { self.mixing.cdf(wu) } else { 0.0 };
        }
        let wv = (v - self.beta) / self.alpha;
        if self.alpha > 0.0 {
            self.mixing.cdf(wu.min(wv))
        } else if wv >= wu {
            0.0
        } else {
            // P(wv < W < wu) for a continuous W.
            (self.mixing.cdf(wu) - self.mixing.cdf(wv.max(0.0))).max(0.0)
        }
    }
}
