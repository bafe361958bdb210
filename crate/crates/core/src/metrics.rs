//! Empirical distributions and distances between laws on the line and the
//! plane.
//!
//! CDFs follow the convention `F(x) = P(X < x)` (left-continuous);
//! [`EvaluableCdf::cdf_right`] gives `P(X ≤ x)`.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// A distribution function that can be evaluated pointwise.
pub trait EvaluableCdf: Sync {
    /// `P(X < x)`.
    fn cdf(&self, x: f64) -> f64;

    /// `P(X ≤ x)`.
    fn cdf_right(&self, x: f64) -> f64 {
        self.cdf(x)
    }

    /// Sorted jump locations, or `None` for a continuous law.
    fn breakpoints(&self) -> Option<&[f64]> {
        None
    }

    /// An interval carrying essentially all of the mass.
    fn support_hint(&self) -> (f64, f64);
}

/// A continuous CDF given by a closure.
pub struct FnCdf<F> {
    f: F,
    lo: f64,
    hi: f64,
}

impl<F: Fn(f64) -> f64 + Sync> FnCdf<F> {
    /// `f` must be continuous; `[lo, hi]` should carry essentially all mass.
    pub fn new(f: F, lo: f64, hi: f64) -> Self {
        FnCdf { f, lo, hi }
    }
}

impl<F: Fn(f64) -> f64 + Sync> EvaluableCdf for FnCdf<F> {
    fn cdf(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn support_hint(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
}

/// A finite, possibly weighted sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
    atoms: Vec<f64>,
    /// `cum[i]` is the mass strictly below `atoms[i]`; `cum[atoms.len()] = 1`.
    cum: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Equal-weight sample; sorted on construction.
    pub fn from_samples(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::param("sample", "contains NaN"));
        }
        values.sort_by(|a, b| a.total_cmp(b));
        let n = values.len() as f64;
        let mut atoms = Vec::new();
        let mut cum = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if atoms.last() != Some(&v) {
                atoms.push(v);
                cum.push(i as f64 / n);
            }
        }
        cum.push(1.0);
        Ok(EmpiricalDistribution { values, weights: None, atoms, cum })
    }

    /// Weighted sample; weights must be non-negative and sum to one.
    pub fn weighted(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        if pairs.iter().any(|(v, w)| v.is_nan() || !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::param("sample", "values must be numbers and weights non-negative"));
        }
        let total: f64 = pairs.iter().map(|p| p.1).collect::<KahanSum>().value();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("weights", format!("must sum to 1, got {total}")));
        }
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms = Vec::new();
        let mut cum = Vec::new();
        let mut acc = KahanSum::new();
        for &(v, w) in &pairs {
            if atoms.last() != Some(&v) {
                atoms.push(v);
                cum.push((acc.value() / total).min(1.0));
            }
            acc.add(w);
        }
        cum.push(1.0);
        let (values, weights) = pairs.into_iter().unzip();
        Ok(EmpiricalDistribution { values, weights: Some(weights), atoms, cum })
    }

    /// Sorted sample values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distinct values and their probabilities.
    pub fn atoms_with_mass(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.atoms.iter().enumerate().map(|(i, &a)| (a, self.cum[i + 1] - self.cum[i]))
    }

    pub fn mean(&self) -> f64 {
        self.atoms_with_mass().map(|(x, w)| x * w).collect::<KahanSum>().value()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms_with_mass().map(|(x, w)| w * (x - m).powi(2)).collect::<KahanSum>().value()
    }

    /// `P(X < x)`.
    pub fn ecdf(&self, x: f64) -> f64 {
        self.cum[self.atoms.partition_point(|&a| a < x)]
    }

    /// `P(X ≤ x)`.
    pub fn ecdf_right(&self, x: f64) -> f64 {
        self.cum[self.atoms.partition_point(|&a| a <= x)]
    }

    /// Smallest sample value `v` with `P(X ≤ v) ≥ q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let i = self.cum[1..].partition_point(|&c| c < q);
        self.atoms[i.min(self.atoms.len() - 1)]
    }
}

impl EvaluableCdf for EmpiricalDistribution {
    fn cdf(&self, x: f64) -> f64 {
        self.ecdf(x)
    }

    fn cdf_right(&self, x: f64) -> f64 {
        self.ecdf_right(x)
    }

    fn breakpoints(&self) -> Option<&[f64]> {
        Some(&self.atoms)
    }

    fn support_hint(&self) -> (f64, f64) {
        (self.atoms[0], self.atoms[self.atoms.len() - 1])
    }
}

impl EmpiricalDistribution {
    /// Reads draws from the first column of a CSV file. A non-numeric first
    /// line is taken as a header.
    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        let parse_err = |message: String| Error::Parse { what: "sample", path: path.to_path_buf(), message };
        let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(file);
        let mut values = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| parse_err(e.to_string()))?;
            let field = rec.get(0).unwrap_or("").trim();
            if field.is_empty() {
                continue;
            }
            match field.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(_) if i == 0 => {}
                Err(_) => return Err(parse_err(format!("line {}: not a number: {field:?}", i + 1))),
            }
        }
        Self::from_samples(values)
    }
}

/// Grid size used when both laws are continuous.
const CONTINUOUS_GRID: usize = 10_000;
/// Bisection stops once the bracket is this narrow.
const LEVY_TOL: f64 = 1e-7;
const SLACK: f64 = 1e-12;

fn continuous_grid(f1: &dyn EvaluableCdf, f2: &dyn EvaluableCdf) -> Vec<f64> {
    let (a1, b1) = f1.support_hint();
    let (a2, b2) = f2.support_hint();
    let lo = a1.min(a2) - 1.0;
    let hi = b1.max(b2) + 1.0;
    let step = (hi - lo) / (CONTINUOUS_GRID - 1) as f64;
    (0..CONTINUOUS_GRID).map(|i| lo + i as f64 * step).collect()
}

/// Points where the Lévy band condition can first fail for shift `y`.
fn levy_candidates(f1: &dyn EvaluableCdf, f2: &dyn EvaluableCdf, y: f64, grid: &[f64]) -> Vec<f64> {
    let mut xs = Vec::new();
    if let Some(b) = f1.breakpoints() {
        xs.extend_from_slice(b);
    }
    if let Some(b) = f2.breakpoints() {
        for &c in b {
            xs.push(c + y);
            xs.push(c - y);
        }
    }
    xs.extend_from_slice(grid);
    xs
}

fn levy_feasible(f1: &dyn EvaluableCdf, f2: &dyn EvaluableCdf, y: f64, grid: &[f64]) -> bool {
    levy_candidates(f1, f2, y, grid).into_iter().all(|x| {
        let l1 = f1.cdf(x);
        let r1 = f1.cdf_right(x);
        f2.cdf(x - y) - y <= l1 + SLACK
            && f2.cdf_right(x - y) - y <= r1 + SLACK
            && l1 <= f2.cdf(x + y) + y + SLACK
            && r1 <= f2.cdf_right(x + y) + y + SLACK
    })
}

/// Lévy distance `inf{y > 0 : F₂(x-y) - y ≤ F₁(x) ≤ F₂(x+y) + y ∀x}`.
///
/// Exact (to `1e-7`) when either law is a step function; for two continuous
/// laws the condition is checked on a `10⁴`-point grid.
pub fn levy(f1: &dyn EvaluableCdf, f2: &dyn EvaluableCdf) -> f64 {
    let grid = if f1.breakpoints().is_none() && f2.breakpoints().is_none() {
        continuous_grid(f1, f2)
    } else {
        Vec::new()
    };
    if levy_feasible(f1, f2, 0.0, &grid) {
        return 0.0;
    }
    let mut lo = 0.0;
    let mut hi = ks(f1, f2).clamp(LEVY_TOL, 1.0);
    if !levy_feasible(f1, f2, hi, &grid) {
        hi = 1.0;
    }
    while hi - lo > LEVY_TOL {
        let mid = 0.5 * (lo + hi);
        if levy_feasible(f1, f2, mid, &grid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Kolmogorov distance `sup_x |F₁(x) - F₂(x)|` over jump points (both
/// one-sided values) or, for two continuous laws, a `10⁴`-point grid.
pub fn ks(f1: &dyn EvaluableCdf, f2: &dyn EvaluableCdf) -> f64 {
    let mut xs: Vec<f64> = Vec::new();
    if let Some(b) = f1.breakpoints() {
        xs.extend_from_slice(b);
    }
    if let Some(b) = f2.breakpoints() {
        xs.extend_from_slice(b);
    }
    if xs.is_empty() {
        xs = continuous_grid(f1, f2);
    }
    xs.into_iter()
        .map(|x| {
            let left = (f1.cdf(x) - f2.cdf(x)).abs();
            let right = (f1.cdf_right(x) - f2.cdf_right(x)).abs();
            left.max(right)
        })
        .fold(0.0, f64::max)
}

/// A sample of pairs `(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedSample {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl PairedSample {
    pub fn new(pairs: &[(f64, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptySample);
        }
        if pairs.iter().any(|(u, v)| u.is_nan() || v.is_nan()) {
            return Err(Error::param("pairs", "contain NaN"));
        }
        let (u, v) = pairs.iter().copied().unzip();
        Ok(PairedSample { u, v })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.v.iter().copied())
    }

    /// Joint `P(U < gu[i], V < gv[j])` for all grid nodes, row-major.
    fn joint_on_grid(&self, gu: &[f64], gv: &[f64]) -> Vec<f64> {
        let (nu, nv) = (gu.len() + 1, gv.len() + 1);
        let mut counts = vec![0u64; nu * nv];
        for (u, v) in self.pairs() {
            // The pair counts towards (i, j) iff u < gu[i] and v < gv[j].
            let iu = gu.partition_point(|&g| g <= u);
            let iv = gv.partition_point(|&g| g <= v);
            counts[iu * nv + iv] += 1;
        }
        for i in 0..nu {
            for j in 1..nv {
                counts[i * nv + j] += counts[i * nv + j - 1];
            }
        }
        for i in 1..nu {
            for j in 0..nv {
                counts[i * nv + j] += counts[(i - 1) * nv + j];
            }
        }
        let n = self.len() as f64;
        let mut out = Vec::with_capacity(gu.len() * gv.len());
        for i in 0..gu.len() {
            for j in 0..gv.len() {
                out.push(counts[i * nv + j] as f64 / n);
            }
        }
        out
    }

    fn marginal_quantiles(values: &[f64], levels: usize) -> Vec<f64> {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let n = sorted.len();
        let mut g: Vec<f64> = (0..levels)
            .map(|i| {
                let q = (i as f64 + 0.5) / levels as f64;
                sorted[((q * n as f64) as usize).min(n - 1)]
            })
            .collect();
        g.dedup();
        g
    }
}

/// A joint distribution of a pair, `P(U < u, V < v)`.
pub trait JointCdf: Sync {
    fn joint_cdf(&self, u: f64, v: f64) -> f64;
}

/// Grid resolution per axis for [`weak2d`].
pub const WEAK2D_LEVELS: usize = 100;

/// Bivariate Kolmogorov distance between two paired samples, evaluated on a
/// `100 × 100` grid at the pooled marginal quantile levels `(i + ½)/100`.
pub fn weak2d(a: &PairedSample, b: &PairedSample) -> f64 {
    let pooled_u: Vec<f64> = a.u.iter().chain(&b.u).copied().collect();
    let pooled_v: Vec<f64> = a.v.iter().chain(&b.v).copied().collect();
    let gu = PairedSample::marginal_quantiles(&pooled_u, WEAK2D_LEVELS);
    let gv = PairedSample::marginal_quantiles(&pooled_v, WEAK2D_LEVELS);
    let fa = a.joint_on_grid(&gu, &gv);
    let fb = b.joint_on_grid(&gu, &gv);
    fa.iter().zip(&fb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// As [`weak2d`] against an exact joint law, on the sample's own marginal
/// quantile grid.
pub fn weak2d_law(a: &PairedSample, law: &dyn JointCdf) -> f64 {
    let gu = PairedSample::marginal_quantiles(&a.u, WEAK2D_LEVELS);
    let gv = PairedSample::marginal_quantiles(&a.v, WEAK2D_LEVELS);
    let fa = a.joint_on_grid(&gu, &gv);
    let mut sup = 0.0f64;
    for (i, &u) in gu.iter().enumerate() {
        for (j, &v) in gv.iter().enumerate() {
            sup = sup.max((fa[i * gv.len() + j] - law.joint_cdf(u, v)).abs());
        }
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_conventions() {
        let e = EmpiricalDistribution::from_samples(vec![2.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(e.ecdf(2.0), 0.25);
        assert_eq!(e.ecdf_right(2.0), 0.75);
        assert_eq!(e.ecdf(0.0), 0.0);
        assert_eq!(e.ecdf(3.5), 1.0);
        assert_eq!(e.quantile(0.5), 2.0);
        assert_eq!(e.values(), &[1.0, 2.0, 2.0, 3.0]);
    }

    #[test]
    fn empty_sample_rejected() {
        assert!(matches!(EmpiricalDistribution::from_samples(vec![]), Err(Error::EmptySample)));
        assert!(matches!(PairedSample::new(&[]), Err(Error::EmptySample)));
    }

    #[test]
    fn levy_between_point_masses() {
        let a = EmpiricalDistribution::from_samples(vec![0.0]).unwrap();
        let b = EmpiricalDistribution::from_samples(vec![0.3]).unwrap();
        assert!((levy(&a, &b) - 0.3).abs() < 1e-6);
        let c = EmpiricalDistribution::from_samples(vec![5.0]).unwrap();
        assert!((levy(&a, &c) - 1.0).abs() < 1e-6);
        assert_eq!(levy(&a, &a), 0.0);
    }
}
