//! Laws of the random number of summands `N_n`, all supported on `{1, 2, ...}`.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Geometric, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::quad;

/// Default tail mass dropped when truncating an index law.
pub const DEFAULT_TAIL_EPS: f64 = 1e-12;
/// Largest support an exact computation will accept.
pub const DEFAULT_ATOM_CAP: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "index", rename_all = "snake_case")]
pub enum IndexLaw {
    Deterministic { k: u64 },
    /// `P(N = k) = p(1-p)^{k-1}`, `k ≥ 1`.
    Geometric { p: f64 },
    /// Poisson with a gamma-distributed intensity of shape `r` and mean
    /// `mean` (negative binomial), conditioned on `N ≥ 1`.
    MixedPoissonGamma { r: f64, mean: f64 },
}

/// Finite support `{k: w_k}` ascending in `k`, weights renormalized to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSupport {
    atoms: Vec<(u64, f64)>,
    dropped_mass: f64,
}

impl WeightedSupport {
    pub fn atoms(&self) -> &[(u64, f64)] {
        &self.atoms
    }

    /// Probability mass beyond the last atom before renormalization.
    pub fn dropped_mass(&self) -> f64 {
        self.dropped_mass
    }

    pub fn max_k(&self) -> u64 {
        self.atoms.last().map_or(0, |a| a.0)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Compensated `Σ_k w_k g(k)`.
    pub fn expect(&self, mut g: impl FnMut(u64) -> f64) -> f64 {
        let mut acc = KahanSum::new();
        for &(k, w) in &self.atoms {
            acc.add(w * g(k));
        }
        acc.value()
    }

    fn normalized(mut atoms: Vec<(u64, f64)>, kept: f64, dropped_mass: f64) -> Self {
        for a in &mut atoms {
            a.1 /= kept;
        }
        WeightedSupport { atoms, dropped_mass }
    }
}

impl fmt::Display for IndexLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexLaw::Deterministic { k } => write!(f, "Deterministic{{k={k}}}"),
            IndexLaw::Geometric { p } => write!(f, "Geometric{{p={p}}}"),
            IndexLaw::MixedPoissonGamma { r, mean } => write!(f, "MixedPoissonGamma{{r={r}, mean={mean}}}"),
        }
    }
}

impl IndexLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            IndexLaw::Deterministic { k } => {
                if k == 0 {
                    return Err(Error::param("index.k", "must be at least 1"));
                }
            }
            IndexLaw::Geometric { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::param("index.p", format!("must lie in (0, 1], got {p}")));
                }
            }
            IndexLaw::MixedPoissonGamma { r, mean } => {
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::param("index.r", format!("must be positive, got {r}")));
                }
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(Error::param("index.mean", format!("must be positive, got {mean}")));
                }
            }
        }
        Ok(())
    }

    /// `P(N = 0)` of the unconditioned negative binomial, `(r/(r+m))^r`.
    fn nb_zero_mass(r: f64, mean: f64) -> f64 {
        (-r * (mean / r).ln_1p()).exp()
    }

    pub fn pmf(&self, k: u64) -> f64 {
        if k == 0 {
            return 0.0;
        }
        match *self {
            IndexLaw::Deterministic { k: kk } => {
                if k == kk {
                    1.0
                } else {
                    0.0
                }
            }
            IndexLaw::Geometric { p } => {
                if p == 1.0 {
                    return if k == 1 { 1.0 } else { 0.0 };
                }
                p * ((k - 1) as f64 * (-p).ln_1p()).exp()
            }
            IndexLaw::MixedPoissonGamma { r, mean } => {
                let kf = k as f64;
                let ln_q = (mean / (r + mean)).ln();
                let ln_1mq = -(mean / r).ln_1p();
                let ln_p = ln_gamma(kf + r) - ln_gamma(r) - ln_gamma(kf + 1.0) + r * ln_1mq + kf * ln_q;
                ln_p.exp() / (1.0 - Self::nb_zero_mass(r, mean))
            }
        }
    }

    pub fn mean_index(&self) -> f64 {
        match *self {
            IndexLaw::Deterministic { k } => k as f64,
            IndexLaw::Geometric { p } => 1.0 / p,
            IndexLaw::MixedPoissonGamma { r, mean } => mean / (1.0 - Self::nb_zero_mass(r, mean)),
        }
    }

    /// Smallest prefix `{1..K}` carrying all but `tail_eps` of the mass,
    /// renormalized; fails above [`DEFAULT_ATOM_CAP`] atoms.
    pub fn truncate(&self, tail_eps: f64) -> Result<WeightedSupport> {
        self.truncate_with_cap(tail_eps, DEFAULT_ATOM_CAP)
    }

    pub fn truncate_with_cap(&self, tail_eps: f64, cap: usize) -> Result<WeightedSupport> {
        if !(tail_eps > 0.0 && tail_eps <= 1e-6) {
            return Err(Error::param("tail_eps", format!("must lie in (0, 1e-6], got {tail_eps}")));
        }
        self.validate()?;
        let cap_err = || Error::TruncationCap {
            law: self.to_string(),
            tail_eps,
            cap,
        };
        match *self {
            IndexLaw::Deterministic { k } => {
                if k as usize > cap {
                    return Err(cap_err());
                }
                Ok(WeightedSupport {
                    atoms: vec![(k, 1.0)],
                    dropped_mass: 0.0,
                })
            }
            IndexLaw::Geometric { p } => {
                // tail beyond K is (1-p)^K
                let last = if p == 1.0 {
                    1.0
                } else {
                    (tail_eps.ln() / (-p).ln_1p()).ceil().max(1.0)
                };
                if last > cap as f64 {
                    return Err(cap_err());
                }
                let last = last as u64;
                let atoms: Vec<(u64, f64)> = (1..=last).map(|k| (k, self.pmf(k))).collect();
                let dropped = if p == 1.0 { 0.0 } else { (last as f64 * (-p).ln_1p()).exp() };
                let kept = atoms.iter().map(|a| a.1).collect::<KahanSum>().value();
                Ok(WeightedSupport::normalized(atoms, kept, dropped))
            }
            IndexLaw::MixedPoissonGamma { r, mean } => {
                let q = mean / (r + mean);
                let mut atoms = Vec::new();
                let mut cum = KahanSum::new();
                let mut pk = self.pmf(1);
                let mode = ((r - 1.0) * q / (1.0 - q)).max(1.0);
                let mut k = 1u64;
                loop {
                    atoms.push((k, pk));
                    cum.add(pk);
                    let tail = 1.0 - cum.value();
                    if tail <= tail_eps || (pk == 0.0 && k as f64 > mode) {
                        let kept = cum.value();
                        return Ok(WeightedSupport::normalized(atoms, kept, tail.max(0.0)));
                    }
                    if atoms.len() >= cap {
                        return Err(cap_err());
                    }
                    let kf = k as f64;
                    pk *= (kf + r) / (kf + 1.0) * q;
                    k += 1;
                    // re-anchor the recurrence periodically
                    if k % 4096 == 0 {
                        pk = self.pmf(k);
                    }
                }
            }
        }
    }

    /// Generating function `ψ(s) = E s^N`.
    pub fn psi(&self, s: f64) -> f64 {
        match *self {
            IndexLaw::Deterministic { k } => s.powf(k as f64),
            IndexLaw::Geometric { p } => p * s / (1.0 - s + p * s),
            IndexLaw::MixedPoissonGamma { .. } => self.psi_over_s(s) * s,
        }
    }

    /// `ψ(s)/s`, finite at `s = 0` since the support starts at one.
    fn psi_over_s(&self, s: f64) -> f64 {
        match *self {
            IndexLaw::Deterministic { k } => s.powf(k as f64 - 1.0),
            IndexLaw::Geometric { p } => p / (1.0 - s + p * s),
            IndexLaw::MixedPoissonGamma { r, mean } => {
                if s == 0.0 {
                    return self.pmf(1);
                }
                let q = mean / (r + mean);
                let p0 = Self::nb_zero_mass(r, mean);
                // ((1-q)/(1-qs))^r - p0 = p0 (exp(-r ln(1-qs)) - 1)
                p0 * (-r * (-q * s).ln_1p()).exp_m1() / ((1.0 - p0) * s)
            }
        }
    }

    /// `∫_0^1 ψ(s)/s ds`, equal to `E[1/N]`.
    pub fn psi_integral(&self) -> f64 {
        quad::integrate(|s| self.psi_over_s(s), 0.0, 1.0, 1e-15, 1e-13)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            IndexLaw::Deterministic { k } => k,
            IndexLaw::Geometric { p } => {
                let failures = Geometric::new(p).expect("validated p").sample(rng);
                failures + 1
            }
            IndexLaw::MixedPoissonGamma { r, mean } => {
                let intensity = Gamma::new(r, mean / r).expect("validated shape");
                loop {
                    let lambda: f64 = intensity.sample(rng);
                    if !(lambda > 0.0) {
                        continue;
                    }
                    let k: f64 = Poisson::new(lambda).expect("finite intensity").sample(rng);
                    if k >= 1.0 {
                        return k as u64;
                    }
                }
            }
        }
    }
}
