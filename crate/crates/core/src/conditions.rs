//! Random Lindeberg and Lyapunov conditions for a row of a double array.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EmpiricalDistribution;
use crate::numeric::KahanSum;
use crate::rng::{substream, Purpose};
use crate::scheme::Row;

/// Default `ε` values for Lindeberg sweeps.
pub const EPS_SWEEP: [f64; 4] = [0.01, 0.05, 0.1, 0.5];

/// Values below this are reported as exactly zero.
const ZERO_FLOOR: f64 = 1e-14;

/// How a [`ConditionReport`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionReport {
    pub n: u64,
    /// `(ε, L_n(ε))` pairs.
    pub lindeberg: Vec<(f64, f64)>,
    pub lyapunov: f64,
    /// Only for identically distributed rows.
    pub gf_bound: Option<f64>,
    pub method: Method,
    /// Probability mass of `N_n` not covered by the truncated support.
    pub truncation_slack: f64,
}

impl ConditionReport {
    pub fn evaluate(row: &Row, eps_sweep: &[f64]) -> Result<Self> {
        let lindeberg = eps_sweep
            .iter()
            .map(|&eps| random_lindeberg(row, eps).map(|v| (eps, v)))
            .collect::<Result<Vec<_>>>()?;
        let gf_bound = match lyapunov_gf_bound(row) {
            Ok(v) => Some(v),
            Err(Error::NotIdenticallyDistributed { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(ConditionReport {
            n: row.n(),
            lindeberg,
            lyapunov: random_lyapunov(row),
            gf_bound,
            method: Method::Exact,
            truncation_slack: row.support().dropped_mass(),
        })
    }

    pub fn lindeberg_at(&self, eps: f64) -> Option<f64> {
        self.lindeberg.iter().find(|(e, _)| *e == eps).map(|&(_, v)| v)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::param("eps", format!("must be positive, got {eps}")))
    }
}

fn floor_tiny(v: f64) -> f64 {
    if v < ZERO_FLOOR {
        0.0
    } else {
        v.min(1.0)
    }
}

/// `B_{n,k}^{-2} Σ_{j≤k} ∫_{|x-μ_{n,j}|>ε B_{n,k}} (x-μ_{n,j})² dF_{n,j}`.
pub fn lindeberg_fraction(row: &Row, k: u64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if k == 0 {
        return Ok(0.0);
    }
    let b2 = row.b2(k);
    let c = eps * b2.sqrt();
    let mut acc = KahanSum::new();
    for (sigma, count) in row.groups(k) {
        acc.add(count as f64 * row.truncated_second_moment(sigma, c));
    }
    Ok(floor_tiny(acc.value() / b2))
}

/// `L_n(ε) = E[lindeberg_fraction(N_n, ε)]` over the truncated support.
pub fn random_lindeberg(row: &Row, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let mut acc = KahanSum::new();
    for &(k, w) in row.support().atoms() {
        acc.add(w * lindeberg_fraction(row, k, eps)?);
    }
    Ok(floor_tiny(acc.value()))
}

/// Monte-Carlo draws of `lindeberg_fraction(N_n, ε)`, for the
/// in-probability form of the condition.
pub fn random_lindeberg_mc(row: &Row, eps: f64, replicates: usize, seed: u64) -> Result<EmpiricalDistribution> {
    check_eps(eps)?;
    let draws = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, row.n(), Purpose::Lindeberg, r);
            lindeberg_fraction(row, row.index_law().sample(&mut rng), eps)
        })
        .collect::<Result<Vec<f64>>>()?;
    EmpiricalDistribution::from_samples(draws)
}

/// `E[M³_{n,N_n} / B³_{n,N_n}]` with `M³_{n,k} = Σ_{j≤k} E|X_{n,j} - μ_{n,j}|³`.
pub fn random_lyapunov(row: &Row) -> f64 {
    let mut acc = KahanSum::new();
    for &(k, w) in row.support().atoms() {
        let mut m3 = KahanSum::new();
        for (sigma, count) in row.groups(k) {
            m3.add(count as f64 * row.third_abs_central_moment(sigma));
        }
        acc.add(w * m3.value() / row.b2(k).powf(1.5));
    }
    acc.value()
}

/// `(ν³/σ³) √(∫₀¹ ψ_n(s)/s ds)`, which dominates [`random_lyapunov`] when
/// every summand of the row has the same centered law.
pub fn lyapunov_gf_bound(row: &Row) -> Result<f64> {
    if !row.is_identically_distributed() {
        return Err(Error::NotIdenticallyDistributed { n: row.n() });
    }
    let sigma = row.sigma(1);
    let ratio = row.third_abs_central_moment(sigma) / sigma.powi(3);
    Ok(ratio * row.index_law().psi_integral().sqrt())
}

/// `E[N_n^{-1/2}]` over the truncated support.
pub fn inverse_sqrt_index_mean(row: &Row) -> f64 {
    row.support().expect(|k| 1.0 / (k as f64).sqrt())
}
