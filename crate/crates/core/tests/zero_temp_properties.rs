use bose_mi::analysis::fit_log_scaling;
use bose_mi::zero_temp::{
    entanglement_entropy_exact, entropy_gaussian_asymptotic, entropy_poisson_asymptotic,
    poisson_spectrum, schmidt_spectrum, total_variation, weights_entropy,
};
use proptest::prelude::*;
use std::time::Instant;

#[test]
fn half_log_slope_over_three_decades() {
    let points: Vec<(f64, f64)> = (0..=12)
        .map(|i| {
            let n = 10f64.powf(2.0 + 0.25 * i as f64).round() as u64;
            let e = entanglement_entropy_exact(&schmidt_spectrum(n, 8, 16).unwrap());
            (n as f64, e)
        })
        .collect();
    let fit = fit_log_scaling(&points, Some((1e2, 1e5))).unwrap();
    assert!((fit.slope - 0.5).abs() < 0.005, "slope {}", fit.slope);
}

#[test]
fn gaussian_and_poisson_limits() {
    let e = entanglement_entropy_exact(&schmidt_spectrum(1000, 4, 8).unwrap());
    assert!((e - entropy_gaussian_asymptotic(1000.0).unwrap()).abs() < 1e-3);
    let w = poisson_spectrum(100.0, 1000).unwrap();
    assert!((weights_entropy(&w) - entropy_poisson_asymptotic(100.0).unwrap()).abs() < 1e-4);
}

#[test]
fn small_block_approaches_poisson() {
    // N = 100 r particles with L_A / L = 1 / r keeps N_A = 100
    let mut last = f64::INFINITY;
    for r in [10usize, 100, 1000] {
        let binom = schmidt_spectrum(100 * r as u64, 1, r).unwrap();
        let pois = poisson_spectrum(100.0, 1000).unwrap();
        let tv = total_variation(&binom.lambdas, &pois);
        assert!(tv < last, "ratio {r}: {tv}");
        last = tv;
    }
    assert!(last < 1e-3);
}

#[test]
fn million_particles_is_fast_and_finite() {
    let start = Instant::now();
    let spec = schmidt_spectrum(1_000_000, 1, 2).unwrap();
    let e = entanglement_entropy_exact(&spec);
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert!((e - entropy_gaussian_asymptotic(1e6).unwrap()).abs() < 1e-6);
}

proptest! {
    #[test]
    fn schmidt_weights_are_normalised(n in 1u64..5000, l in 2usize..500, frac in 0.0f64..1.0) {
        let la = 1 + ((l - 2) as f64 * frac) as usize;
        let spec = schmidt_spectrum(n, la, l).unwrap();
        let total: f64 = spec.lambdas.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let mirror = schmidt_spectrum(n, l - la, l).unwrap();
        prop_assert_eq!(entanglement_entropy_exact(&spec), entanglement_entropy_exact(&mirror));
    }
}
