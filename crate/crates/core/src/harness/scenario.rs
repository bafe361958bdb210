//! Scenario configuration: JSON form, validation and presets.

use std::path::Path;

use serde::de::Deserializer;
use serde::{Deserialize, Serialize};

use crate::conditions::EPS_SWEEP;
use crate::distributions::SummandShape;
use crate::error::{Error, Result};
use crate::index_laws::DEFAULT_TAIL_EPS;
use crate::nvm::{MixingLaw, MixtureConfig, NVMixture};
use crate::scheme::{DoubleArrayScheme, IndexRule, Mode, ParamRule, RowParam, VariancePattern};

/// Names accepted by [`preset`].
pub const PRESETS: [&str; 4] = ["classical", "geometric-laplace", "mixed-poisson-vg", "heterogeneous-laplace"];

/// Smallest replicate count accepted for metric rows.
pub const MIN_REPLICATES: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    #[default]
    Theorem4,
    General,
}

/// Summand shape; accepts `"normal"` as shorthand for `{"family": "normal"}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ShapeConfig(pub SummandShape);

impl<'de> Deserialize<'de> for ShapeConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        let tagged = match value {
            serde_json::Value::String(name) => serde_json::json!({ "family": name }),
            other => other,
        };
        SummandShape::deserialize(tagged).map(ShapeConfig).map_err(serde::de::Error::custom)
    }
}

fn default_t_sweep() -> Vec<f64> {
    vec![1.0, 5.0, 10.0]
}

fn default_eps_sweep() -> Vec<f64> {
    EPS_SWEEP.to_vec()
}

fn default_report_t() -> f64 {
    5.0
}

fn default_tail_eps() -> f64 {
    DEFAULT_TAIL_EPS
}

fn default_n_grid() -> Vec<u64> {
    vec![10, 100, 1000]
}

fn default_replicates() -> usize {
    100_000
}

/// A convergence experiment: a scheme, its conjectured limit and the sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<ParamRule>,
    pub alpha: ParamRule,
    pub variances: VariancePattern,
    pub shape: ShapeConfig,
    pub index: IndexRule,
    pub limit: MixtureConfig,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_t_sweep")]
    pub t_sweep: Vec<f64>,
    #[serde(default = "default_eps_sweep")]
    pub eps_sweep: Vec<f64>,
    #[serde(default = "default_report_t")]
    pub report_t: f64,
    #[serde(default = "default_tail_eps")]
    pub tail_eps: f64,
}

fn positive_list(field: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::config(field, "must not be empty"));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::config(field, format!("entries must be positive, got {v}")));
    }
    Ok(())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::config("scenario", e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let s: Scenario = serde_json::from_str(&text).map_err(|e| Error::Parse {
            what: "scenario",
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.is_empty() {
            return Err(Error::config("n_grid", "must not be empty"));
        }
        if self.n_grid[0] == 0 {
            return Err(Error::config("n_grid", "row indices start at 1"));
        }
        if let Some(w) = self.n_grid.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::config("n_grid", format!("must be strictly increasing ({} then {})", w[0], w[1])));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::config(
                "replicates",
                format!("must be at least {MIN_REPLICATES}, got {}", self.replicates),
            ));
        }
        positive_list("t_sweep", &self.t_sweep)?;
        positive_list("eps_sweep", &self.eps_sweep)?;
        if !(self.report_t > 0.0 && self.report_t.is_finite()) {
            return Err(Error::config("report_t", format!("must be positive, got {}", self.report_t)));
        }
        if !(self.tail_eps > 0.0 && self.tail_eps <= 1e-6) {
            return Err(Error::config("tail_eps", format!("must lie in (0, 1e-6], got {}", self.tail_eps)));
        }
        match self.mode {
            ModeName::Theorem4 => {
                if self.rho.is_some() || self.beta.is_some() {
                    return Err(Error::config("mode", "`rho` and `beta` apply only to mode \"general\""));
                }
            }
            ModeName::General => {
                if self.rho.is_none() {
                    return Err(Error::config("rho", "required in mode \"general\""));
                }
                if self.beta.is_none() {
                    return Err(Error::config("beta", "required in mode \"general\""));
                }
            }
        }
        for &n in &self.n_grid {
            self.index.law_at(n).map_err(|e| Error::config("index", format!("row {n}: {e}")))?;
        }
        self.scheme().validate().map_err(|e| Error::config("scheme", e.to_string()))?;
        self.limit_law().map_err(|e| Error::config("limit", e.to_string()))?;
        Ok(())
    }

    pub fn scheme(&self) -> DoubleArrayScheme {
        let mode = match self.mode {
            ModeName::Theorem4 => Mode::Theorem4,
            ModeName::General => Mode::General {
                rho: self.rho.unwrap_or(1.0),
                beta: self.beta.unwrap_or(ParamRule::constant(0.0)),
            },
        };
        DoubleArrayScheme {
            shape: self.shape.0,
            variances: self.variances,
            index: self.index,
            alpha: self.alpha,
            mode,
            tail_eps: self.tail_eps,
        }
    }

    pub fn limit_law(&self) -> Result<NVMixture> {
        NVMixture::from_config(&self.limit)
    }

    /// `eps_sweep` plus the report column `ε = 0.05`, sorted.
    pub fn lindeberg_eps(&self) -> Vec<f64> {
        let mut eps = self.eps_sweep.clone();
        if !eps.contains(&REPORT_EPS) {
            eps.push(REPORT_EPS);
        }
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        eps
    }
}

/// `ε` of the Lindeberg column in CSV reports.
pub const REPORT_EPS: f64 = 0.05;

fn base(name: &str, index: IndexRule, limit: MixtureConfig) -> Scenario {
    Scenario {
        name: name.to_string(),
        mode: ModeName::Theorem4,
        rho: None,
        beta: None,
        alpha: ParamRule::constant(limit.alpha),
        variances: VariancePattern::Constant { sigma: 1.0 },
        shape: ShapeConfig(SummandShape::Normal),
        index,
        limit,
        n_grid: default_n_grid(),
        replicates: default_replicates(),
        seed: 42,
        t_sweep: default_t_sweep(),
        eps_sweep: default_eps_sweep(),
        report_t: default_report_t(),
        tail_eps: DEFAULT_TAIL_EPS,
    }
}

/// A named, fully specified scenario.
pub fn preset(name: &str) -> Result<Scenario> {
    let geometric = IndexRule::Geometric { p: RowParam::InverseN };
    let laplace = MixtureConfig { mixing: MixingLaw::Exponential { rate: 1.0 }, alpha: 1.0, beta: 0.0 };
    let s = match name {
        "classical" => base(
            name,
            IndexRule::Deterministic { k: RowParam::N },
            MixtureConfig { mixing: MixingLaw::Dirac { w: 1.0 }, alpha: 0.0, beta: 0.0 },
        ),
        "geometric-laplace" => base(name, geometric, laplace),
        "mixed-poisson-vg" => {
            let mut s = base(
                name,
                IndexRule::MixedPoissonGamma { r: 2.0, mean: RowParam::N },
                MixtureConfig { mixing: MixingLaw::Gamma { shape: 2.0, rate: 2.0 }, alpha: 1.0, beta: 0.0 },
            );
            s.shape = ShapeConfig(SummandShape::ShiftedExponential);
            s
        }
        "heterogeneous-laplace" => {
            let mut s = base(name, geometric, laplace);
            s.variances = VariancePattern::Alternating { a: 1.0, b: 2.0 };
            s.shape = ShapeConfig(SummandShape::TwoPoint { p: 0.75 });
            s
        }
        other => {
            return Err(Error::config(
                "preset",
                format!("unknown preset \"{other}\"; expected one of {}", PRESETS.join(", ")),
            ))
        }
    };
    Ok(s)
}
