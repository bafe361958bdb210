//! Double arrays of independent, non-identically distributed summands with
//! a random number of terms per row.
//!
//! A [`DoubleArrayScheme`] describes every row; [`DoubleArrayScheme::row`]
//! fixes `n`, truncates the index law and computes the normalizers `d_n`,
//! `c_n`, after which the partial sums `A_{n,k}`, `B²_{n,k}` and the pair
//! `(U_n, V_n)` are available in closed form.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::distributions::{SummandFamily, SummandShape};
use crate::error::{Error, Result};
use crate::index_laws::{IndexLaw, WeightedSupport, DEFAULT_TAIL_EPS};
use crate::metrics::EmpiricalDistribution;
use crate::numeric::KahanSum;
use crate::rng::{substream, Purpose};

/// Standard deviations `σ_{n,j}` along a row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pattern", rename_all = "snake_case")]
pub enum VariancePattern {
    Constant { sigma: f64 },
    /// `a, b, a, b, ...`
    Alternating { a: f64, b: f64 },
    /// `σ·j^γ`, `|γ| ≤ 1/4`.
    PowerLaw { sigma: f64, gamma: f64 },
}

impl VariancePattern {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(field, format!("must be positive, got {v}")))
            }
        };
        match *self {
            VariancePattern::Constant { sigma } => positive("variances.sigma", sigma),
            VariancePattern::Alternating { a, b } => {
                positive("variances.a", a)?;
                positive("variances.b", b)
            }
            VariancePattern::PowerLaw { sigma, gamma } => {
                positive("variances.sigma", sigma)?;
                if !(gamma.abs() <= 0.25) {
                    return Err(Error::param("variances.gamma", format!("need |gamma| <= 1/4, got {gamma}")));
                }
                Ok(())
            }
        }
    }

    pub fn sigma(&self, j: u64) -> f64 {
        match *self {
            VariancePattern::Constant { sigma } => sigma,
            VariancePattern::Alternating { a, b } => {
                if j % 2 == 1 {
                    a
                } else {
                    b
                }
            }
            VariancePattern::PowerLaw { sigma, gamma } => sigma * (j as f64).powf(gamma),
        }
    }

    /// Summands `1..=k` grouped by standard deviation, as `(σ, multiplicity)`.
    pub fn groups(&self, k: u64) -> Vec<(f64, u64)> {
        match *self {
            VariancePattern::Constant { sigma } => vec![(sigma, k)],
            VariancePattern::Alternating { a, b } => {
                let odd = k.div_ceil(2);
                let even = k / 2;
                if even == 0 {
                    vec![(a, odd)]
                } else {
                    vec![(a, odd), (b, even)]
                }
            }
            VariancePattern::PowerLaw { .. } => (1..=k).map(|j| (self.sigma(j), 1)).collect(),
        }
    }

    fn closed_form_b2(&self, k: u64) -> Option<f64> {
        match *self {
            VariancePattern::Constant { sigma } => Some(k as f64 * sigma * sigma),
            VariancePattern::Alternating { a, b } => {
                Some(k.div_ceil(2) as f64 * a * a + (k / 2) as f64 * b * b)
            }
            VariancePattern::PowerLaw { .. } => None,
        }
    }
}

/// A row-indexed parameter: `limit + c/√n` (`c = 0` for a constant).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRule {
    pub limit: f64,
    pub c: f64,
}

impl ParamRule {
    pub const fn constant(value: f64) -> Self {
        ParamRule { limit: value, c: 0.0 }
    }

    pub fn at(&self, n: u64) -> f64 {
        if self.c == 0.0 {
            self.limit
        } else {
            self.limit + self.c / (n as f64).sqrt()
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum ParamRuleRepr {
    Const {
        #[serde(rename = "const")]
        value: f64,
    },
    Decaying {
        limit: f64,
        c: f64,
    },
}

impl Serialize for ParamRule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.c == 0.0 {
            ParamRuleRepr::Const { value: self.limit }.serialize(s)
        } else {
            ParamRuleRepr::Decaying { limit: self.limit, c: self.c }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for ParamRule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ParamRuleRepr::deserialize(d)? {
            ParamRuleRepr::Const { value } => Ok(ParamRule::constant(value)),
            ParamRuleRepr::Decaying { limit, c } => Ok(ParamRule { limit, c }),
        }
    }
}

/// A parameter of the index law that may follow the row index: a number,
/// `"n"` or `"1/n"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RowParam {
    Value(f64),
    N,
    InverseN,
}

impl RowParam {
    pub fn at(&self, n: u64) -> f64 {
        match *self {
            RowParam::Value(v) => v,
            RowParam::N => n as f64,
            RowParam::InverseN => 1.0 / n as f64,
        }
    }
}

impl Serialize for RowParam {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            RowParam::Value(v) => s.serialize_f64(v),
            RowParam::N => s.serialize_str("n"),
            RowParam::InverseN => s.serialize_str("1/n"),
        }
    }
}

impl<'de> Deserialize<'de> for RowParam {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(RowParam::Value(v)),
            Raw::Text(t) => match t.trim() {
                "n" => Ok(RowParam::N),
                "1/n" => Ok(RowParam::InverseN),
                other => Err(de::Error::custom(format!(
                    "expected a number, \"n\" or \"1/n\", got \"{other}\""
                ))),
            },
        }
    }
}

/// `n ↦ N_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "index", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndexRule {
    Deterministic { k: RowParam },
    Geometric { p: RowParam },
    MixedPoissonGamma { r: f64, mean: RowParam },
}

impl IndexRule {
    pub fn law_at(&self, n: u64) -> Result<IndexLaw> {
        let law = match *self {
            IndexRule::Deterministic { k } => {
                let k = k.at(n);
                if !(k >= 1.0 && k.fract() == 0.0 && k.is_finite()) {
                    return Err(Error::param("index.k", format!("must be a positive integer, got {k}")));
                }
                IndexLaw::Deterministic { k: k as u64 }
            }
            IndexRule::Geometric { p } => IndexLaw::Geometric { p: p.at(n) },
            IndexRule::MixedPoissonGamma { r, mean } => IndexLaw::MixedPoissonGamma { r, mean: mean.at(n) },
        };
        law.validate()?;
        Ok(law)
    }
}

impl From<IndexLaw> for IndexRule {
    fn from(law: IndexLaw) -> Self {
        match law {
            IndexLaw::Deterministic { k } => IndexRule::Deterministic { k: RowParam::Value(k as f64) },
            IndexLaw::Geometric { p } => IndexRule::Geometric { p: RowParam::Value(p) },
            IndexLaw::MixedPoissonGamma { r, mean } => IndexRule::MixedPoissonGamma { r, mean: RowParam::Value(mean) },
        }
    }
}

/// How summand means and the centering `c_n` are tied to the variances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    /// `μ_{n,j} d_n = α_n σ²_{n,j}`, `c_n = 0`, `d_n = √(E B²_{n,N_n})`.
    Theorem4,
    /// `a_{n,k} = b_{n,k}^{ρ+1} α_n / d_n^ρ`, `c_n = -d_n β_n`.
    General { rho: f64, beta: ParamRule },
}

impl Mode {
    pub fn rho(&self) -> f64 {
        match *self {
            Mode::Theorem4 => 1.0,
            Mode::General { rho, .. } => rho,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoubleArrayScheme {
    pub shape: SummandShape,
    pub variances: VariancePattern,
    pub index: IndexRule,
    pub alpha: ParamRule,
    pub mode: Mode,
    pub tail_eps: f64,
}

impl DoubleArrayScheme {
    /// Scheme with means tied to variances (`Mode::Theorem4`) and the default truncation.
    pub fn theorem4(shape: SummandShape, variances: VariancePattern, index: IndexRule, alpha: ParamRule) -> Self {
        DoubleArrayScheme {
            shape,
            variances,
            index,
            alpha,
            mode: Mode::Theorem4,
            tail_eps: DEFAULT_TAIL_EPS,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        self.variances.validate()?;
        if !self.alpha.limit.is_finite() || !self.alpha.c.is_finite() {
            return Err(Error::param("alpha", "must be finite"));
        }
        if let Mode::General { rho, beta } = self.mode {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::param("rho", format!("must be positive, got {rho}")));
            }
            if !beta.limit.is_finite() || !beta.c.is_finite() {
                return Err(Error::param("beta", "must be finite"));
            }
        }
        Ok(())
    }

    /// Fixes the row `n`: truncates `N_n` and computes `d_n`, `c_n`, `α_n`, `β_n`.
    pub fn row(&self, n: u64) -> Result<Row> {
        self.validate()?;
        if n == 0 {
            return Err(Error::param("n", "rows are indexed from 1"));
        }
        let index = self.index.law_at(n)?;
        let support = index.truncate(self.tail_eps)?;
        let sigmas = match self.variances {
            VariancePattern::PowerLaw { .. } => (1..=support.max_k()).map(|j| self.variances.sigma(j)).collect(),
            _ => Vec::new(),
        };
        let b2_prefix = if sigmas.is_empty() {
            Vec::new()
        } else {
            let mut acc = KahanSum::new();
            let mut prefix = Vec::with_capacity(sigmas.len() + 1);
            prefix.push(0.0);
            for s in &sigmas {
                acc.add(s * s);
                prefix.push(acc.value());
            }
            prefix
        };
        // B² depends on the variances only, so d_n is fixed before any mean is assigned.
        let mut row = Row {
            n,
            shape: self.shape,
            standard: self.shape.standard(),
            variances: self.variances,
            index,
            support,
            sigmas,
            b2_prefix,
            rho: self.mode.rho(),
            alpha_n: self.alpha.at(n),
            beta_n: 0.0,
            d_n: f64::NAN,
            c_n: 0.0,
        };
        let d2 = row.support.expect(|k| row.b2(k));
        row.d_n = d2.sqrt();
        if let Mode::General { beta, .. } = self.mode {
            row.beta_n = beta.at(n);
            // Sign chosen so that V_n = α_n U_n^{ρ+1} + β_n.
            row.c_n = -row.d_n * row.beta_n;
        }
        Ok(row)
    }
}

/// One row of a [`DoubleArrayScheme`] with its normalizers.
#[derive(Clone, Debug)]
pub struct Row {
    n: u64,
    shape: SummandShape,
    standard: SummandFamily,
    variances: VariancePattern,
    index: IndexLaw,
    support: WeightedSupport,
    sigmas: Vec<f64>,
    b2_prefix: Vec<f64>,
    rho: f64,
    alpha_n: f64,
    beta_n: f64,
    d_n: f64,
    c_n: f64,
}

impl Row {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn index_law(&self) -> &IndexLaw {
        &self.index
    }

    pub fn support(&self) -> &WeightedSupport {
        &self.support
    }

    pub fn shape(&self) -> SummandShape {
        self.shape
    }

    pub fn variances(&self) -> VariancePattern {
        self.variances
    }

    pub fn d_n(&self) -> f64 {
        self.d_n
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    pub fn alpha_n(&self) -> f64 {
        self.alpha_n
    }

    pub fn beta_n(&self) -> f64 {
        self.beta_n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Summands share one centered law.
    pub fn is_identically_distributed(&self) -> bool {
        match self.variances {
            VariancePattern::Constant { .. } => true,
            VariancePattern::Alternating { a, b } => a == b,
            VariancePattern::PowerLaw { gamma, .. } => gamma == 0.0,
        }
    }

    pub fn sigma(&self, j: u64) -> f64 {
        match self.sigmas.get((j as usize).wrapping_sub(1)) {
            Some(&s) => s,
            None => self.variances.sigma(j),
        }
    }

    pub fn sigma2(&self, j: u64) -> f64 {
        let s = self.sigma(j);
        s * s
    }

    /// `B²_{n,k} = σ²_{n,1} + ... + σ²_{n,k}`.
    pub fn b2(&self, k: u64) -> f64 {
        if let Some(v) = self.variances.closed_form_b2(k) {
            return v;
        }
        match self.b2_prefix.get(k as usize) {
            Some(&v) => v,
            None => {
                let known = self.b2_prefix.len().saturating_sub(1) as u64;
                let mut acc = KahanSum::new();
                acc.add(self.b2_prefix.last().copied().unwrap_or(0.0));
                for j in known + 1..=k {
                    acc.add(self.sigma2(j));
                }
                acc.value()
            }
        }
    }

    /// `A_{n,k} = μ_{n,1} + ... + μ_{n,k} = α_n B_{n,k}^{ρ+1} / d_n^ρ`.
    pub fn a(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        if self.rho == 1.0 {
            self.alpha_n * self.b2(k) / self.d_n
        } else {
            self.alpha_n * self.b2(k).sqrt().powf(self.rho + 1.0) / self.d_n.powf(self.rho)
        }
    }

    /// `μ_{n,j}`.
    pub fn mean(&self, j: u64) -> f64 {
        if self.rho == 1.0 {
            self.alpha_n * self.sigma2(j) / self.d_n
        } else {
            self.a(j) - self.a(j - 1)
        }
    }

    /// The law of `X_{n,j}`.
    pub fn family(&self, j: u64) -> SummandFamily {
        self.shape.instantiate(self.mean(j), self.sigma(j))
    }

    /// `(b_{n,k}/d_n, (a_{n,k} - c_n)/d_n)`: the value of `(U_n, V_n)` on `{N_n = k}`.
    pub fn un_vn(&self, k: u64) -> (f64, f64) {
        (self.b2(k).sqrt() / self.d_n, (self.a(k) - self.c_n) / self.d_n)
    }

    /// Summands `1..=k` grouped by standard deviation.
    pub fn groups(&self, k: u64) -> Vec<(f64, u64)> {
        match self.variances {
            VariancePattern::PowerLaw { .. } => (1..=k).map(|j| (self.sigma(j), 1)).collect(),
            _ => self.variances.groups(k),
        }
    }

    /// Characteristic function of `X_{n,j} - μ_{n,j}` for a summand with
    /// standard deviation `sigma`.
    pub fn centered_cf(&self, sigma: f64, t: f64) -> num_complex::Complex64 {
        self.standard.centered_cf(sigma * t)
    }

    /// `(ln|φ|, arg φ)` of [`Row::centered_cf`].
    pub(crate) fn centered_log_cf(&self, sigma: f64, t: f64) -> (f64, f64) {
        self.standard.centered_log_cf(sigma * t)
    }

    /// `∫_{|x-μ|>c} (x-μ)² dF` for a summand with standard deviation `sigma`.
    pub(crate) fn truncated_second_moment(&self, sigma: f64, c: f64) -> f64 {
        sigma * sigma * self.standard.truncated_second_moment(c / sigma)
    }

    /// `ν³ = E|X - μ|³` for a summand with standard deviation `sigma`.
    pub(crate) fn third_abs_central_moment(&self, sigma: f64) -> f64 {
        sigma.powi(3) * self.standard.third_abs_central_moment()
    }

    fn standard_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.standard.sample(rng) - self.standard.mean()
    }

    /// `S_{n,k}`: sum of `k` independent summand draws.
    pub fn draw_sum<R: Rng + ?Sized>(&self, k: u64, rng: &mut R) -> f64 {
        let mut s = 0.0;
        for j in 1..=k {
            s += self.mean(j) + self.sigma(j) * self.standard_draw(rng);
        }
        s
    }

    /// Draws `(N_n, S_{n,N_n})` for one replicate.
    fn draw_random_sum(&self, seed: u64, replicate: u64) -> (u64, f64) {
        let mut rng = substream(seed, self.n, Purpose::RandomSum, replicate);
        let k = self.index.sample(&mut rng);
        (k, self.draw_sum(k, &mut rng))
    }

    fn draw_index(&self, seed: u64, replicate: u64) -> u64 {
        let mut rng = substream(seed, self.n, Purpose::RandomSum, replicate);
        self.index.sample(&mut rng)
    }

    /// Replicates of `Z_n = (S_{n,N_n} - c_n)/d_n`.
    pub fn simulate_sample(&self, replicates: usize, seed: u64) -> Result<EmpiricalDistribution> {
        let draws: Vec<f64> = (0..replicates as u64)
            .into_par_iter()
            .map(|r| {
                let (_, s) = self.draw_random_sum(seed, r);
                (s - self.c_n) / self.d_n
            })
            .collect();
        EmpiricalDistribution::from_samples(draws)
    }

    /// Replicates of `B²_{n,N_n} / E B²_{n,N_n}`; uses the same index draws
    /// as [`Row::simulate_sample`] for the same seed.
    pub fn simulate_u_scaled(&self, replicates: usize, seed: u64) -> Result<EmpiricalDistribution> {
        let d2 = self.d_n * self.d_n;
        let draws: Vec<f64> = (0..replicates as u64)
            .into_par_iter()
            .map(|r| self.b2(self.draw_index(seed, r)) / d2)
            .collect();
        EmpiricalDistribution::from_samples(draws)
    }

    /// Replicates of the pair `(U_n, V_n)`, replicate-aligned with
    /// [`Row::simulate_sample`].
    pub fn simulate_pairs(&self, replicates: usize, seed: u64) -> Vec<(f64, f64)> {
        (0..replicates as u64)
            .into_par_iter()
            .map(|r| self.un_vn(self.draw_index(seed, r)))
            .collect()
    }

    /// Replicates of `Y_{n,k} = (S_{n,k} - A_{n,k}) / B_{n,k}` for a fixed `k`.
    pub fn simulate_centered(&self, k: u64, replicates: usize, seed: u64) -> Result<EmpiricalDistribution> {
        if k == 0 {
            return Err(Error::param("k", "must be at least 1"));
        }
        let a = self.a(k);
        let b = self.b2(k).sqrt();
        let draws: Vec<f64> = (0..replicates as u64)
            .into_par_iter()
            .map(|r| {
                let mut rng = substream(seed, self.n ^ (k << 32), Purpose::Centered, r);
                (self.draw_sum(k, &mut rng) - a) / b
            })
            .collect();
        EmpiricalDistribution::from_samples(draws)
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "row n={} index={} d_n={:.6} alpha_n={} atoms={}",
            self.n,
            self.index,
            self.d_n,
            self.alpha_n,
            self.support.len()
        )
    }
}
