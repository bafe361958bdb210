mod common;

use common::{simpson, standard_error};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randsum_core::distributions::{SummandFamily, SummandShape};

fn catalog() -> Vec<SummandFamily> {
    vec![
        SummandFamily::Normal { mu: 0.4, sigma: 1.3 },
        SummandFamily::Uniform { lo: -1.0, hi: 3.0 },
        SummandFamily::TwoPoint { x1: -2.0, x2: 1.5, p: 0.3 },
        SummandFamily::ShiftedExponential { rate: 0.5, shift: -1.0 },
    ]
}

/// `E g(X)` by quadrature over the density, or enumeration of atoms.
fn expect(f: &SummandFamily, g: &dyn Fn(f64) -> f64) -> f64 {
    expect_split(f, g, &[])
}

/// As [`expect`], splitting the quadrature at `cuts` where `g` may jump.
fn expect_split(f: &SummandFamily, g: &dyn Fn(f64) -> f64, cuts: &[f64]) -> f64 {
    let (lo, hi, dens): (f64, f64, Box<dyn Fn(f64) -> f64>) = match *f {
        SummandFamily::Normal { mu, sigma } => (
            mu - 12.0 * sigma,
            mu + 12.0 * sigma,
            Box::new(move |x: f64| (-(x - mu).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())),
        ),
        SummandFamily::Uniform { lo, hi } => (lo, hi, Box::new(move |_| 1.0 / (hi - lo))),
        SummandFamily::TwoPoint { x1, x2, p } => return p * g(x1) + (1.0 - p) * g(x2),
        SummandFamily::ShiftedExponential { rate, shift } => {
            (shift, shift + 60.0 / rate, Box::new(move |x: f64| rate * (-rate * (x - shift)).exp()))
        }
    };
    let mut edges = vec![lo];
    edges.extend(cuts.iter().copied().filter(|&c| c > lo && c < hi));
    edges.push(hi);
    edges.sort_by(f64::total_cmp);
    // g is sampled just inside each panel so a jump at a cut takes the panel's side
    edges
        .windows(2)
        .map(|w| {
            let d = 1e-12 * (w[1] - w[0]);
            simpson(|x| g(x.clamp(w[0] + d, w[1] - d)) * dens(x), w[0], w[1], 20_000)
        })
        .sum()
}

#[test]
fn moments_match_quadrature() {
    for f in catalog() {
        let m = expect(&f, &|x| x);
        let v = expect(&f, &|x| (x - m).powi(2));
        let nu3 = expect(&f, &|x| (x - m).abs().powi(3));
        assert!((f.mean() - m).abs() < 1e-9, "{f:?}");
        assert!((f.variance() - v).abs() < 1e-9, "{f:?}");
        assert!((f.third_abs_central_moment() - nu3).abs() < 1e-8, "{f:?}");
    }
}

#[test]
fn cf_matches_quadrature() {
    for f in catalog() {
        for &t in &[0.0, 0.3, 1.0, 2.7] {
            let re = expect(&f, &|x| (t * x).cos());
            let im = expect(&f, &|x| (t * x).sin());
            assert!((f.cf(t) - Complex64::new(re, im)).norm() < 1e-8, "{f:?} t={t}");
        }
    }
}

#[test]
fn truncated_second_moment_matches_quadrature() {
    for f in catalog() {
        let m = f.mean();
        for &c in &[0.0, 0.2, 1.0, 1.8, 4.0] {
            let direct = expect_split(&f, &|x| if (x - m).abs() > c { (x - m).powi(2) } else { 0.0 }, &[m - c, m + c]);
            let got = f.truncated_second_moment(c);
            assert!((got - direct).abs() < 1e-9, "{f:?} c={c}: {got} vs {direct}");
        }
        assert!((f.truncated_second_moment(0.0) - f.variance()).abs() < 1e-12);
    }
}

#[test]
fn truncated_second_moment_normal_closed_form() {
    // 2σ²[(c/σ)φ(c/σ) + 1 - Φ(c/σ)] computed by Simpson.
    let f = SummandFamily::Normal { mu: 0.0, sigma: 1.0 };
    let c = 1.5;
    let tail = simpson(|x| x * x * (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt(), c, 15.0, 20000);
    let got = f.truncated_second_moment(c);
    assert!((got - 2.0 * tail).abs() < 1e-12, "{got} vs {}", 2.0 * tail);
}

#[test]
fn spec_examples() {
    assert_eq!(SummandFamily::Normal { mu: 2.0, sigma: 1.0 }.mean(), 2.0);
    assert!((SummandFamily::Uniform { lo: 0.0, hi: 1.0 }.variance() - 1.0 / 12.0).abs() < 1e-15);
    let tp = SummandFamily::TwoPoint { x1: -1.0, x2: 1.0, p: 0.5 };
    assert_eq!(tp.mean(), 0.0);
    assert_eq!(tp.variance(), 1.0);
    assert_eq!(tp.third_abs_central_moment(), 1.0);
    let nu3 = SummandFamily::Normal { mu: 0.0, sigma: 1.0 }.third_abs_central_moment();
    assert!((nu3 - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    assert!((SummandFamily::ShiftedExponential { rate: 1.0, shift: 0.0 }.truncated_second_moment(0.0) - 1.0).abs() < 1e-15);
}

#[test]
fn invalid_parameters_rejected() {
    assert!(SummandFamily::Normal { mu: 0.0, sigma: 0.0 }.validate().is_err());
    assert!(SummandFamily::Uniform { lo: 1.0, hi: 1.0 }.validate().is_err());
    assert!(SummandFamily::TwoPoint { x1: 0.0, x2: 1.0, p: 1.0 }.validate().is_err());
    assert!(SummandFamily::ShiftedExponential { rate: -1.0, shift: 0.0 }.validate().is_err());
    assert!(SummandShape::TwoPoint { p: 0.0 }.validate().is_err());
}

#[test]
fn sampler_moments_within_clt_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for f in catalog() {
        let draws: Vec<f64> = (0..200_000).map(|_| f.sample(&mut rng)).collect();
        let (m, se) = standard_error(&draws);
        assert!((m - f.mean()).abs() < 4.0 * se, "{f:?}: {m} vs {}", f.mean());
        let sq: Vec<f64> = draws.iter().map(|x| (x - f.mean()).powi(2)).collect();
        let (v, se) = standard_error(&sq);
        assert!((v - f.variance()).abs() < 4.0 * se, "{f:?}: {v} vs {}", f.variance());
    }
}

#[test]
fn serde_tags() {
    let f: SummandFamily = serde_json::from_str(r#"{"family": "two_point", "x1": -1, "x2": 2, "p": 0.5}"#).unwrap();
    assert_eq!(f, SummandFamily::TwoPoint { x1: -1.0, x2: 2.0, p: 0.5 });
    let s: SummandShape = serde_json::from_str(r#"{"family": "shifted_exponential"}"#).unwrap();
    assert_eq!(s, SummandShape::ShiftedExponential);
}

fn shape_strategy() -> impl Strategy<Value = SummandShape> {
    prop_oneof![
        Just(SummandShape::Normal),
        Just(SummandShape::Uniform),
        Just(SummandShape::ShiftedExponential),
        (0.05f64..0.95).prop_map(|p| SummandShape::TwoPoint { p }),
    ]
}

proptest! {
    #[test]
    fn instantiate_hits_mean_and_sd(shape in shape_strategy(), mean in -5.0f64..5.0, sd in 0.1f64..4.0) {
        let f = shape.instantiate(mean, sd);
        prop_assert!(f.validate().is_ok());
        prop_assert!((f.mean() - mean).abs() < 1e-12 * (1.0 + mean.abs() + sd));
        prop_assert!((f.sd() - sd).abs() < 1e-12 * sd);
    }

    #[test]
    fn centered_cf_is_a_cf(shape in shape_strategy(), sd in 0.1f64..4.0, t in -20.0f64..20.0) {
        let f = shape.instantiate(1.0, sd);
        let z = f.centered_cf(t);
        prop_assert!(z.norm() <= 1.0 + 1e-14);
        prop_assert!((f.centered_cf(-t) - z.conj()).norm() < 1e-14);
        prop_assert_eq!(f.centered_cf(0.0), Complex64::new(1.0, 0.0));
        let (l, a) = f.centered_log_cf(t);
        prop_assert!((Complex64::from_polar(l.exp(), a) - z).norm() < 1e-13);
    }

    #[test]
    fn truncated_moment_is_monotone(shape in shape_strategy(), c1 in 0.0f64..5.0, c2 in 0.0f64..5.0) {
        let f = shape.instantiate(0.0, 1.0);
        let (lo, hi) = if c1 < c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(f.truncated_second_moment(lo) >= f.truncated_second_moment(hi) - 1e-15);
        prop_assert!(f.truncated_second_moment(lo) <= f.variance() + 1e-15);
    }
}
