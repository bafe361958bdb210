mod common;

use common::{adaptive_simpson, asymmetric_laplace_cdf, asymmetric_laplace_pdf, standard_error, std_normal_cdf};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randsum_core::metrics::{ks, levy, weak2d_law, PairedSample};
use randsum_core::nvm::{MixingLaw, MixtureConfig, NVMixture, VarianceMeanPair};
use randsum_core::EmpiricalDistribution;

fn catalog() -> Vec<MixingLaw> {
    vec![
        MixingLaw::Dirac { w: 1.0 },
        MixingLaw::Exponential { rate: 1.0 },
        MixingLaw::Gamma { shape: 2.0, rate: 2.0 },
        MixingLaw::InverseGamma { shape: 3.0, scale: 2.0 },
        MixingLaw::InverseGaussian { mean: 1.0, shape: 3.0 },
    ]
}

/// Densities written out independently of the crate.
fn mixing_density(law: &MixingLaw, w: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    match *law {
        MixingLaw::Exponential { rate } => rate * (-rate * w).exp(),
        MixingLaw::Gamma { shape, rate } => {
            assert_eq!(shape, 2.0);
            rate * rate * w * (-rate * w).exp()
        }
        MixingLaw::InverseGamma { shape, scale } => {
            assert_eq!(shape, 3.0);
            (3.0 * scale.ln() - 2f64.ln() - 4.0 * w.ln() - scale / w).exp()
        }
        MixingLaw::InverseGaussian { mean, shape } => {
            (0.5 * (shape / (2.0 * std::f64::consts::PI)).ln() - 1.5 * w.ln() - shape * (w - mean).powi(2) / (2.0 * mean * mean * w)).exp()
        }
        MixingLaw::Dirac { .. } => unreachable!(),
    }
}

/// `E Φ((x - β - αW)/√W)` by panel-wise adaptive Simpson over `w`.
fn cdf_oracle(law: &MixingLaw, alpha: f64, beta: f64, x: f64) -> f64 {
    if let MixingLaw::Dirac { w } = *law {
        return std_normal_cdf((x - beta - alpha * w) / w.sqrt());
    }
    let f = |w: f64| {
        if w <= 0.0 {
            0.0
        } else {
            std_normal_cdf((x - beta - alpha * w) / w.sqrt()) * mixing_density(law, w)
        }
    };
    let mut edges = vec![0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.25, 0.5];
    let mut e = 1.0;
    while e < 1e8 {
        edges.push(e);
        e *= 1.25;
    }
    edges.windows(2).map(|w| adaptive_simpson(&f, w[0], w[1], 1e-13)).sum()
}

#[test]
fn spec_examples() {
    let normal = NVMixture::new(MixingLaw::Dirac { w: 1.0 }, 0.0, 0.0).unwrap();
    assert!((normal.cdf(0.0) - 0.5).abs() < 1e-15);
    assert!((normal.pdf(0.0) - 1.0 / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-15);
    let laplace = NVMixture::new(MixingLaw::Exponential { rate: 1.0 }, 0.0, 0.0).unwrap();
    assert!((laplace.cdf(0.0) - 0.5).abs() < 1e-12);
    assert!((laplace.cdf(1.0) - (1.0 - 0.5 * (-(2f64.sqrt())).exp())).abs() < 1e-8);
}

#[test]
fn asymmetric_laplace_closed_form() {
    for &alpha in &[0.0, 1.0, -0.7, 2.0] {
        let m = NVMixture::new(MixingLaw::Exponential { rate: 1.0 }, alpha, 0.0).unwrap();
        for i in 0..81 {
            let x = -10.0 + 0.25 * i as f64 + 0.01;
            assert!((m.cdf(x) - asymmetric_laplace_cdf(alpha, x)).abs() < 1e-8, "alpha={alpha} x={x}");
            assert!((m.pdf(x) - asymmetric_laplace_pdf(alpha, x)).abs() < 1e-6, "alpha={alpha} x={x}");
        }
    }
}

#[test]
fn cdf_matches_direct_integration() {
    for law in catalog() {
        for &(alpha, beta) in &[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.5), (2.0, -1.0)] {
            let m = NVMixture::new(law, alpha, beta).unwrap();
            for &x in &[-6.0, -2.2, -0.3, 0.4, 1.1, 3.7, 9.0] {
                let want = cdf_oracle(&law, alpha, beta, x);
                assert!((m.cdf(x) - want).abs() < 1e-8, "{law} alpha={alpha} beta={beta} x={x}: {} vs {want}", m.cdf(x));
            }
        }
    }
}

#[test]
fn doubling_panel_order_changes_little() {
    for law in catalog().into_iter().skip(1) {
        let a = NVMixture::new(law, 1.0, 0.0).unwrap();
        let b = NVMixture::with_nodes_per_panel(law, 1.0, 0.0, 32).unwrap();
        for i in 0..40 {
            let x = -5.0 + 0.3 * i as f64;
            assert!((a.cdf(x) - b.cdf(x)).abs() < 1e-10, "{law} x={x}");
        }
    }
}

#[test]
fn pdf_is_derivative_of_cdf() {
    for law in catalog() {
        let m = NVMixture::new(law, 1.0, 0.2).unwrap();
        for &x in &[-3.0, -0.7, 0.5, 1.3, 4.0] {
            let h = 1e-4;
            let numeric = (m.cdf(x + h) - m.cdf(x - h)) / (2.0 * h);
            assert!((numeric - m.pdf(x)).abs() < 1e-5, "{law} x={x}");
        }
    }
}

#[test]
fn tails_vanish() {
    for law in catalog() {
        for &alpha in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
            let m = NVMixture::new(law, alpha, 0.0).unwrap();
            // the inverse gamma law has a polynomial tail, so probe far out
            let far = if matches!(law, MixingLaw::InverseGamma { .. }) { 1e5 } else { 200.0 };
            assert!(m.cdf(-far) < 1e-8, "{law} alpha={alpha}: {}", m.cdf(-far));
            assert!(m.cdf(far) > 1.0 - 1e-8, "{law} alpha={alpha}: {}", m.cdf(far));
        }
    }
}

#[test]
fn mixing_quantiles_invert_cdf() {
    for law in catalog().into_iter().skip(1) {
        for &u in &[1e-10, 1e-6, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let w = law.quantile(u);
            assert!((law.cdf(w) - u).abs() < 1e-12 + 1e-9 * u, "{law} u={u}: {}", law.cdf(w));
            let v = law.upper_quantile(u);
            assert!((law.sf(v) - u).abs() < 1e-12 + 1e-9 * u, "{law} v={u}: {}", law.sf(v));
        }
        // cdf is the integral of the density
        let w = law.quantile(0.6);
        let integral = adaptive_simpson(&|s| mixing_density(&law, s), f64::MIN_POSITIVE, w, 1e-13);
        assert!((integral - 0.6).abs() < 1e-8, "{law}: {integral}");
        assert!((law.pdf(w) - mixing_density(&law, w)).abs() < 1e-12);
    }
}

#[test]
fn sampler_matches_cdf() {
    let n = 40_000;
    for law in catalog() {
        for &alpha in &[0.0, 1.0] {
            let m = NVMixture::new(law, alpha, 0.3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(99);
            let draws = EmpiricalDistribution::from_samples((0..n).map(|_| m.sample(&mut rng)).collect()).unwrap();
            let d = ks(&draws, &m.tabulate(8192));
            assert!(d < 1.63 / (n as f64).sqrt(), "{law} alpha={alpha}: {d}");
            let (mean, se) = standard_error(draws.values());
            assert!((mean - m.mean()).abs() < 4.5 * se, "{law} alpha={alpha}");
        }
    }
    // Normal(3, 4)
    let m = NVMixture::new(MixingLaw::Dirac { w: 4.0 }, 0.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = EmpiricalDistribution::from_samples((0..n).map(|_| m.sample(&mut rng)).collect()).unwrap();
    assert!((draws.mean() - 3.0).abs() < 0.05);
    assert!((draws.variance() - 4.0).abs() < 0.15);
}

#[test]
fn tabulated_cdf_tracks_direct_cdf() {
    for law in catalog() {
        let m = NVMixture::new(law, 1.0, -0.5).unwrap();
        let t = m.tabulate(8192);
        for i in 0..500 {
            let x = -12.0 + 0.0473 * i as f64;
            assert!((t.cdf(x) - m.cdf(x)).abs() < 1e-8, "{law} x={x}: {} vs {}", t.cdf(x), m.cdf(x));
        }
    }
}

#[test]
fn point_mass_mixture() {
    let m = NVMixture::new(MixingLaw::Dirac { w: 0.0 }, 1.0, 2.0).unwrap();
    assert_eq!(m.cdf(2.0), 0.0);
    assert_eq!(m.cdf(2.0 + 1e-12), 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert_eq!(m.sample(&mut rng), 2.0);
    let e = EmpiricalDistribution::from_samples(vec![2.0; 10]).unwrap();
    assert_eq!(levy(&e, &m), 0.0);
    assert_eq!(levy(&e, &m.tabulate(100)), 0.0);
}

#[test]
fn mixtures_are_identifiable() {
    let base = NVMixture::new(MixingLaw::Exponential { rate: 1.0 }, 1.0, 0.0).unwrap();
    let same = NVMixture::new(MixingLaw::Gamma { shape: 1.0, rate: 1.0 }, 1.0, 0.0).unwrap();
    let others = [
        NVMixture::new(MixingLaw::Exponential { rate: 1.0 }, 0.9, 0.0).unwrap(),
        NVMixture::new(MixingLaw::Gamma { shape: 2.0, rate: 2.0 }, 1.0, 0.0).unwrap(),
        NVMixture::new(MixingLaw::Exponential { rate: 1.2 }, 1.2, 0.0).unwrap(),
    ];
    let xs: Vec<f64> = (0..200).map(|i| -6.0 + 0.06 * i as f64).collect();
    let sup = |a: &NVMixture, b: &NVMixture| xs.iter().map(|&x| (a.cdf(x) - b.cdf(x)).abs()).fold(0.0, f64::max);
    assert!(sup(&base, &same) < 1e-10);
    for o in &others {
        assert!(sup(&base, o) > 1e-3, "{o}");
    }
}

#[test]
fn pair_law_matches_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for law in catalog() {
        for &alpha in &[1.0, -0.5, 0.0] {
            let pair = VarianceMeanPair { mixing: law, alpha, beta: 0.25 };
            let pairs: Vec<(f64, f64)> = (0..50_000)
                .map(|_| {
                    let w = law.sample(&mut rng);
                    (w.sqrt(), alpha * w + 0.25)
                })
                .collect();
            let d = weak2d_law(&PairedSample::new(&pairs).unwrap(), &pair);
            assert!(d < 0.02, "{law} alpha={alpha}: {d}");
        }
    }
}

#[test]
fn config_round_trip_and_validation() {
    let text = r#"{"mixing": {"law": "exponential", "rate": 1.0}, "alpha": 1.0, "beta": 0.0}"#;
    let m: NVMixture = serde_json::from_str(text).unwrap();
    assert_eq!(m.mixing(), &MixingLaw::Exponential { rate: 1.0 });
    let back: MixtureConfig = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m.config());
    assert!(serde_json::from_str::<NVMixture>(r#"{"mixing": {"law": "gamma", "shape": -1, "rate": 1}, "alpha": 0}"#).is_err());
    assert!(serde_json::from_str::<NVMixture>(r#"{"mixing": {"law": "cauchy"}, "alpha": 0}"#).is_err());
    assert!(NVMixture::new(MixingLaw::InverseGaussian { mean: 0.0, shape: 1.0 }, 0.0, 0.0).is_err());
    assert!(NVMixture::new(MixingLaw::Dirac { w: 1.0 }, f64::NAN, 0.0).is_err());
}
