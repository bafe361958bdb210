//! Characteristic functions of randomly indexed sums and the two gap
//! functionals that compare them with their normal variance-mean
//! counterparts.
//!
//! All evaluation uses the centered summand characteristic functions, so
//! `h_{n,k}` depends on the variances and the shape only. Products over a
//! row are accumulated as `(ln|φ|, arg φ)` and exponentiated once.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::metrics::EmpiricalDistribution;
use crate::numeric::{normal_cdf, KahanSum};
use crate::scheme::{Row, VariancePattern};

/// A limit law for the normalized sums `Y_{n,k}`.
pub trait LimitLaw: Sync {
    fn cf(&self, t: f64) -> Complex64;
    fn cdf(&self, x: f64) -> f64;
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StandardNormal;

impl LimitLaw for StandardNormal {
    fn cf(&self, t: f64) -> Complex64 {
        Complex64::new((-0.5 * t * t).exp(), 0.0)
    }

    fn cdf(&self, x: f64) -> f64 {
        normal_cdf(x)
    }
}

/// Number of points of the coarse uniform grid on `[-T, T]`.
pub const GRID_POINTS: usize = 1024;

/// A supremum over `t ∈ [-T, T]` taken on the coarse grid and on the
/// refined grid (`2·GRID_POINTS - 1` points, containing the coarse one).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupReport {
    pub coarse: f64,
    pub refined: f64,
    pub grid_points: usize,
}

impl SupReport {
    pub fn value(&self) -> f64 {
        self.coarse.max(self.refined)
    }

    /// Relative change between the coarse and refined grids.
    pub fn refinement_change(&self) -> f64 {
        let v = self.value();
        if v == 0.0 {
            0.0
        } else {
            (self.refined - self.coarse).abs() / v
        }
    }
}

/// Non-negative half of the refined grid; even positions belong to the
/// coarse grid. Conjugate symmetry covers `t < 0`.
fn half_grid(t_max: f64) -> Vec<(f64, bool)> {
    let m = 2 * GRID_POINTS - 1;
    let step = 2.0 * t_max / (m - 1) as f64;
    let center = (m - 1) / 2;
    (center..m)
        .map(|i| {
            let t = if i == m - 1 { t_max } else { -t_max + i as f64 * step };
            (t.max(0.0), i % 2 == 0)
        })
        .collect()
}

fn sup_over_grid(grid: &[(f64, bool)], f: impl Fn(f64) -> f64 + Sync) -> SupReport {
    let values: Vec<(f64, bool)> = grid.par_iter().map(|&(t, coarse)| (f(t), coarse)).collect();
    fold_sup(&values)
}

fn fold_sup(values: &[(f64, bool)]) -> SupReport {
    let mut coarse = 0.0f64;
    let mut refined = 0.0f64;
    for &(v, on_coarse) in values {
        refined = refined.max(v);
        if on_coarse {
            coarse = coarse.max(v);
        }
    }
    SupReport { coarse, refined, grid_points: GRID_POINTS }
}

fn from_log_polar(log_mod: f64, arg: f64) -> Complex64 {
    if log_mod == f64::NEG_INFINITY {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(log_mod.exp(), arg)
}

/// `h_{n,k}(t) = E exp(it Y_{n,k})`, `Y_{n,k} = (S_{n,k} - A_{n,k}) / B_{n,k}`.
pub fn hnk(row: &Row, k: u64, t: f64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = t / row.b2(k).sqrt();
    let (mut lm, mut arg) = (0.0, 0.0);
    for (sigma, count) in row.groups(k) {
        let (l, a) = row.centered_log_cf(sigma, s);
        lm += count as f64 * l;
        arg += count as f64 * a;
    }
    from_log_polar(lm, arg)
}

/// Per-summand `ln φ^c_j(s)`, cached for the periodic patterns.
struct RowLogFactors<'a> {
    row: &'a Row,
    s: f64,
    cached: Option<[(f64, f64); 2]>,
}

impl<'a> RowLogFactors<'a> {
    fn new(row: &'a Row, s: f64) -> Self {
        let cached = match row.variances() {
            VariancePattern::Constant { sigma } => {
                let v = row.centered_log_cf(sigma, s);
                Some([v, v])
            }
            VariancePattern::Alternating { a, b } => {
                Some([row.centered_log_cf(b, s), row.centered_log_cf(a, s)])
            }
            VariancePattern::PowerLaw { .. } => None,
        };
        RowLogFactors { row, s, cached }
    }

    fn get(&self, j: u64) -> (f64, f64) {
        match &self.cached {
            Some(c) => c[(j % 2) as usize],
            None => self.row.centered_log_cf(self.row.sigma(j), self.s),
        }
    }
}

/// Walks the truncated support of `N_n` in increasing `k`, handing each atom
/// the running `ln ∏_{j≤k} φ^c_j(s)`.
fn accumulate_atoms(row: &Row, s: f64, mut visit: impl FnMut(u64, f64, f64, f64)) {
    let factors = RowLogFactors::new(row, s);
    let (mut lm, mut arg) = (0.0f64, 0.0f64);
    let mut j = 0u64;
    for &(k, w) in row.support().atoms() {
        if let Some(c) = &factors.cached {
            let odd = (k.div_ceil(2) - j.div_ceil(2)) as f64;
            let even = (k / 2 - j / 2) as f64;
            for (count, (l, a)) in [(odd, c[1]), (even, c[0])] {
                if count > 0.0 {
                    lm += count * l;
                    arg += count * a;
                }
            }
            j = k;
        }
        while j < k {
            j += 1;
            let (l, a) = factors.get(j);
            lm += l;
            arg += a;
        }
        visit(k, w, lm, arg);
    }
}

/// `f_n(t) = E exp(it Z_n)` on the truncated support of `N_n`.
pub fn fn_exact(row: &Row, t: f64) -> Complex64 {
    let d = row.d_n();
    let c = row.c_n();
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    accumulate_atoms(row, t / d, |k, w, lm, arg| {
        let z = from_log_polar(lm, arg + t * (row.a(k) - c) / d) * w;
        re.add(z.re);
        im.add(z.im);
    });
    Complex64::new(re.value(), im.value())
}

/// `g_n(t) = E exp(it V_n) h(t U_n)`.
pub fn gn(row: &Row, limit: &dyn LimitLaw, t: f64) -> Complex64 {
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for &(k, w) in row.support().atoms() {
        let (u, v) = row.un_vn(k);
        let z = Complex64::from_polar(w, t * v) * limit.cf(t * u);
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value())
}

/// `f_n(t) - g_n(t)`, summed term by term.
pub fn fn_minus_gn(row: &Row, limit: &dyn LimitLaw, t: f64) -> Complex64 {
    let d = row.d_n();
    let c = row.c_n();
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    accumulate_atoms(row, t / d, |k, w, lm, arg| {
        let u = row.b2(k).sqrt() / d;
        let phase = Complex64::from_polar(w, t * (row.a(k) - c) / d);
        let z = phase * (from_log_polar(lm, arg) - limit.cf(t * u));
        re.add(z.re);
        im.add(z.im);
    });
    Complex64::new(re.value(), im.value())
}

/// `sup_{|t|≤T} |f_n(t) - g_n(t)|`.
pub fn lemma1_gap(row: &Row, limit: &dyn LimitLaw, t_max: f64) -> SupReport {
    let grid = half_grid(t_max);
    sup_over_grid(&grid, |t| fn_minus_gn(row, limit, t).norm())
}

/// `E sup_{|t|≤T} |h_{n,N_n}(t) - h(t)|`.
pub fn coherency_gap(row: &Row, limit: &dyn LimitLaw, t_max: f64) -> SupReport {
    let grid = half_grid(t_max);
    let h: Vec<Complex64> = grid.iter().map(|&(t, _)| limit.cf(t)).collect();
    let per_atom: Vec<(f64, f64, f64)> = row
        .support()
        .atoms()
        .par_iter()
        .map(|&(k, w)| {
            let values: Vec<(f64, bool)> = grid
                .iter()
                .zip(&h)
                .map(|(&(t, coarse), &ht)| ((hnk(row, k, t) - ht).norm(), coarse))
                .collect();
            let s = fold_sup(&values);
            (w, s.coarse, s.refined)
        })
        .collect();
    let mut coarse = KahanSum::new();
    let mut refined = KahanSum::new();
    for (w, c, r) in per_atom {
        coarse.add(w * c);
        refined.add(w * r);
    }
    SupReport { coarse: coarse.value(), refined: refined.value(), grid_points: GRID_POINTS }
}

/// `∫ e^{itx} dF̂(x)` for an empirical distribution.
pub fn empirical_cf(sample: &EmpiricalDistribution, t: f64) -> Complex64 {
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for (x, w) in sample.atoms_with_mass() {
        let (s, c) = (t * x).sin_cos();
        re.add(w * c);
        im.add(w * s);
    }
    Complex64::new(re.value(), im.value())
}
