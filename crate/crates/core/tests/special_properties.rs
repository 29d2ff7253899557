use bose_mi::special::{
    bose_einstein_f, bose_einstein_f_expansion, bose_einstein_f_series, gamma_fn, ln_gamma,
    polylog_g, sin_pi, zeta, SeriesControl,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn direct_polylog(v: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zn = 1.0;
    for n in 1..=20_000u32 {
        zn *= z;
        if zn < 1e-300 {
            break;
        }
        sum += zn / (n as f64).powf(v);
    }
    sum
}

proptest! {
    #[test]
    fn polylog_matches_direct_sum(v in 0.3f64..4.0, z in 0.01f64..0.97) {
        let got = polylog_g(v, z, &SeriesControl::default()).unwrap();
        let want = direct_polylog(v, z);
        prop_assert!((got / want - 1.0).abs() < 1e-10, "{} vs {}", got, want);
    }

    #[test]
    fn gamma_reflection(x in -4.5f64..4.5) {
        prop_assume!((x - x.round()).abs() > 1e-3);
        let lhs = gamma_fn(x).unwrap() * gamma_fn(1.0 - x).unwrap();
        let rhs = PI / (PI * x).sin();
        prop_assert!((lhs / rhs - 1.0).abs() < 1e-12);
        prop_assert!((sin_pi(x) - (PI * x).sin()).abs() < 1e-13);
    }

    #[test]
    fn ln_gamma_is_log_of_gamma(x in 0.05f64..150.0) {
        let g = gamma_fn(x).unwrap();
        prop_assert!((ln_gamma(x).unwrap() - g.abs().ln()).abs() < 1e-12 * (1.0 + g.abs().ln().abs()));
    }

    #[test]
    fn routes_agree_near_switch(gamma in 1.05f64..3.9, k in 0.05f64..0.2) {
        let ctl = SeriesControl::default();
        let v = Complex64::new(0.0, k);
        let a = bose_einstein_f_series(gamma, v, &ctl).unwrap();
        let b = bose_einstein_f_expansion(gamma, v, &ctl).unwrap();
        prop_assert!((a - b).norm() < 1e-8 * a.norm());
    }
}

#[test]
fn zeta_against_partial_sums() {
    for s in [1.5, 2.5, 4.0, 7.0] {
        // sum to N plus the integral tail N^{1-s} / (s - 1) - N^{-s} / 2
        let n = 100_000u32;
        let partial: f64 = (1..=n).map(|k| (k as f64).powf(-s)).sum();
        let nf = n as f64;
        let oracle = partial + nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s);
        assert!((zeta(s).unwrap() / oracle - 1.0).abs() < 1e-12, "s = {s}");
    }
}

#[test]
fn f_on_imaginary_axis_is_a_cosine_sum() {
    // Re F(gamma, i k) = sum cos(n k) / n^gamma, alternating at k = pi
    let gamma = 2.5;
    let direct: f64 = (1..=200_000u32)
        .map(|n| if n % 2 == 0 { 1.0 } else { -1.0 } / (n as f64).powf(gamma))
        .sum();
    let f = bose_einstein_f(gamma, Complex64::new(0.0, PI), &SeriesControl::default()).unwrap();
    assert!((f.re - direct).abs() < 1e-12);
}
