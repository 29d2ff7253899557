//! Ground state of `N` condensed bosons split between two blocks.
//!
//! The Schmidt weights are binomial, `lambda_l = C(N, l) p^l q^{N-l}` with
//! `p = L_A / L`, evaluated with the saddle-point form of the binomial and
//! Poisson densities (Stirling error plus a deviance term).

use std::f64::consts::PI;

use crate::numeric::{shannon_term, CompensatedSum};
use crate::{Error, Result};

/// Largest tail mass [`poisson_spectrum`] may drop.
pub const POISSON_TAIL_LIMIT: f64 = 1e-12;

// ln(n!) - ln(sqrt(2 pi n) (n/e)^n) for n = 0..=15
const STIRLERR_TABLE: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_219_670_26,
    0.041_340_695_955_409_294_093_822_08,
    0.027_677_925_684_998_339_148_789_29,
    0.020_790_672_103_765_093_111_522_77,
    0.016_644_691_189_821_192_163_194_87,
    0.013_876_128_823_070_747_998_745_73,
    0.011_896_709_945_891_770_095_055_72,
    0.010_411_265_261_972_096_497_478_57,
    0.009_255_462_182_712_732_917_728_637,
    0.008_330_563_433_362_871_256_469_319,
    0.007_573_675_487_951_840_794_972_024,
    0.006_942_840_107_209_529_865_664_153,
    0.006_408_994_188_004_207_068_439_631,
    0.005_951_370_112_758_847_735_624_416,
    0.005_554_733_551_962_801_371_038_690,
];

/// Stirling-series remainder `ln(n!) - ln(sqrt(2 pi n) (n/e)^n)`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return STIRLERR_TABLE[n as usize];
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance `x ln(x / m) + m - x`, accurate when `x` is close to `m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// Binomial probability `C(n, x) p^x q^{n-x}`, with `q = 1 - p` passed in.
fn dbinom(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if x == 0 {
        return if p < 0.1 {
            (n as f64 * (-p).ln_1p()).exp()
        } else {
            q.powf(n as f64)
        };
    }
    if x == n {
        return if q < 0.1 {
            (n as f64 * (-q).ln_1p()).exp()
        } else {
            p.powf(n as f64)
        };
    }
    let (xf, nf) = (x as f64, n as f64);
    let lc =
        stirlerr(n) - (stirlerr(x) + stirlerr(n - x)) - (bd0(xf, nf * p) + bd0(nf - xf, nf * q));
    // symmetric under (x, p) <-> (n - x, q), bit for bit
    let lf = (2.0 * PI).ln() + (xf.ln() + (nf - xf).ln()) - nf.ln();
    (lc - 0.5 * lf).exp()
}

/// Poisson probability `m^x e^{-m} / x!`.
fn dpois(x: u64, m: f64) -> f64 {
    if x == 0 {
        return (-m).exp();
    }
    let xf = x as f64;
    (-stirlerr(x) - bd0(xf, m)).exp() / (2.0 * PI * xf).sqrt()
}

/// Schmidt weights of the `N`-particle condensate for a block of `LA` sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub lambdas: Vec<f64>,
    pub particles: u64,
    pub la: usize,
    pub l: usize,
}

/// Binomial Schmidt spectrum `lambda_l`, `l = 0..=N`.
pub fn schmidt_spectrum(particles: u64, la: usize, l: usize) -> Result<SchmidtSpectrum> {
    if la == 0 || la >= l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    if particles == 0 {
        return Err(Error::domain("the condensate needs at least one particle"));
    }
    let p = la as f64 / l as f64;
    let q = (l - la) as f64 / l as f64;
    let lambdas = (0..=particles)
        .map(|x| dbinom(x, particles, p, q))
        .collect();
    Ok(SchmidtSpectrum {
        lambdas,
        particles,
        la,
        l,
    })
}

/// Shannon entropy `-sum p ln p` of a weight list, compensated.
pub fn weights_entropy(weights: &[f64]) -> f64 {
    weights
        .iter()
        .map(|&p| shannon_term(p))
        .collect::<CompensatedSum>()
        .value()
}

/// Exact entanglement entropy `-sum_l lambda_l ln lambda_l`.
///
/// Terms `l` and `N - l` are added in pairs so that `L_A` and `L - L_A` give
/// bitwise identical results.
pub fn entanglement_entropy_exact(spec: &SchmidtSpectrum) -> f64 {
    let w = &spec.lambdas;
    let n = w.len();
    let mut acc = CompensatedSum::new();
    for i in 0..n / 2 {
        acc.add(shannon_term(w[i]) + shannon_term(w[n - 1 - i]));
    }
    if n % 2 == 1 {
        acc.add(shannon_term(w[n / 2]));
    }
    acc.value()
}

/// Large-`N` equal-partition entropy `(1 + ln(N pi / 2)) / 2`.
pub fn entropy_gaussian_asymptotic(particles: f64) -> Result<f64> {
    if !(particles >= 1.0 && particles.is_finite()) {
        return Err(Error::domain(format!(
            "particle number must be at least 1, got {particles}"
        )));
    }
    Ok(0.5 * (1.0 + (particles * PI / 2.0).ln()))
}

/// Large-`N` entropy for a general split, `(1 + ln(2 pi N p q)) / 2`.
pub fn entropy_binomial_asymptotic(particles: f64, la: usize, l: usize) -> Result<f64> {
    if la == 0 || la >= l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    if !(particles >= 1.0 && particles.is_finite()) {
        return Err(Error::domain(format!(
            "particle number must be at least 1, got {particles}"
        )));
    }
    let (p, q) = (la as f64 / l as f64, (l - la) as f64 / l as f64);
    Ok(0.5 * (1.0 + (2.0 * PI * particles * p * q).ln()))
}

/// Poisson entropy through first order,
/// `(1 + ln(2 pi N_A)) / 2 - 1 / (12 N_A)`.
pub fn entropy_poisson_asymptotic(mean: f64) -> Result<f64> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::domain(format!(
            "mean particle number must be positive, got {mean}"
        )));
    }
    Ok(0.5 * (1.0 + (2.0 * PI * mean).ln()) - 1.0 / (12.0 * mean))
}

/// Poisson weights for `l = 0..=l_max`, normalised over the retained range.
/// Fails when the dropped tail exceeds [`POISSON_TAIL_LIMIT`].
pub fn poisson_spectrum(mean: f64, l_max: u64) -> Result<Vec<f64>> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::domain(format!(
            "mean particle number must be positive, got {mean}"
        )));
    }
    let mut tail = CompensatedSum::new();
    let mut l = l_max + 1;
    loop {
        let p = dpois(l, mean);
        tail.add(p);
        if tail.value() > POISSON_TAIL_LIMIT {
            return Err(Error::TailMass {
                tail: tail.value(),
                limit: POISSON_TAIL_LIMIT,
            });
        }
        let lf = l as f64;
        // past the mode the terms fall faster than a geometric series of ratio mean / (l + 1)
        if lf + 1.0 > mean && p * (lf + 1.0) / (lf + 1.0 - mean) < 1e-6 * POISSON_TAIL_LIMIT {
            break;
        }
        l += 1;
    }
    let weights: Vec<f64> = (0..=l_max).map(|x| dpois(x, mean)).collect();
    let total = weights.iter().copied().collect::<CompensatedSum>().value();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Total-variation distance `sum |p - q| / 2`; missing entries count as zero.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n)
        .map(|i| (get(p, i) - get(q, i)).abs())
        .collect::<CompensatedSum>()
        .value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    fn binomial_oracle(n: u64, k: u64, p: f64) -> f64 {
        // product form of C(n, k)
        let mut c = 1.0;
        for i in 0..k {
            c *= (n - i) as f64 / (i + 1) as f64;
        }
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    }

    #[test]
    fn stirlerr_matches_log_factorial() {
        let mut ln_fact = 0.0f64;
        for n in 1..60u64 {
            ln_fact += (n as f64).ln();
            let x = n as f64;
            let direct = ln_fact - (x + 0.5) * x.ln() + x - 0.5 * (2.0 * PI).ln();
            assert!((stirlerr(n) - direct).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn small_spectra() {
        let s = schmidt_spectrum(1, 4, 8).unwrap();
        assert_eq!(s.lambdas.len(), 2);
        assert_relative_eq!(s.lambdas[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(entanglement_entropy_exact(&s), LN_2, max_relative = 1e-15);
        let s = schmidt_spectrum(4, 8, 16).unwrap();
        for (l, c) in [1.0, 4.0, 6.0, 4.0, 1.0].iter().enumerate() {
            assert_relative_eq!(s.lambdas[l], c / 16.0, max_relative = 1e-14);
        }
        assert!((entanglement_entropy_exact(&s) - 1.40753).abs() < 1e-5);
        let s = schmidt_spectrum(4, 4, 16).unwrap();
        for l in 0..=4 {
            assert_relative_eq!(
                s.lambdas[l as usize],
                binomial_oracle(4, l, 0.25),
                max_relative = 1e-14
            );
        }
    }

    #[test]
    fn moderate_n_against_product_form() {
        for k in [0u64, 1, 17, 60, 99, 100] {
            let s = schmidt_spectrum(100, 3, 10).unwrap();
            assert_relative_eq!(
                s.lambdas[k as usize],
                binomial_oracle(100, k, 0.3),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn partition_errors() {
        assert!(matches!(
            schmidt_spectrum(4, 0, 8),
            Err(Error::Partition { .. })
        ));
        assert!(matches!(
            schmidt_spectrum(4, 8, 8),
            Err(Error::Partition { .. })
        ));
        assert!(schmidt_spectrum(0, 4, 8).is_err());
    }

    #[test]
    fn normalisation_and_symmetry() {
        for (n, la, l) in [
            (1u64, 1usize, 2usize),
            (37, 5, 13),
            (1000, 1, 1000),
            (1_000_000, 500, 1000),
        ] {
            let s = schmidt_spectrum(n, la, l).unwrap();
            let total = s
                .lambdas
                .iter()
                .copied()
                .collect::<CompensatedSum>()
                .value();
            assert!((total - 1.0).abs() < 1e-12, "N = {n}: {total}");
            let mirror = schmidt_spectrum(n, l - la, l).unwrap();
            assert_eq!(
                entanglement_entropy_exact(&s).to_bits(),
                entanglement_entropy_exact(&mirror).to_bits()
            );
        }
    }

    #[test]
    fn asymptotic_forms() {
        assert_relative_eq!(
            entropy_gaussian_asymptotic(1000.0).unwrap(),
            0.5 * (1.0 + (500.0 * PI).ln()),
            max_relative = 1e-15
        );
        assert!((entropy_gaussian_asymptotic(1000.0).unwrap() - 4.17967).abs() < 1e-5);
        assert_relative_eq!(
            entropy_gaussian_asymptotic(2.0).unwrap(),
            0.5 * (1.0 + PI.ln()),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            entropy_binomial_asymptotic(1000.0, 3, 6).unwrap(),
            entropy_gaussian_asymptotic(1000.0).unwrap(),
            max_relative = 1e-15
        );
        assert!(entropy_binomial_asymptotic(10.0, 4, 4).is_err());
        let p = entropy_poisson_asymptotic(100.0).unwrap();
        assert_relative_eq!(
            p,
            0.5 * (1.0 + (200.0 * PI).ln()) - 1.0 / 1200.0,
            max_relative = 1e-15
        );
        assert!((p - 3.7207).abs() < 1e-4);
        assert!(entropy_gaussian_asymptotic(0.5).is_err());
        assert!(entropy_poisson_asymptotic(0.0).is_err());
    }

    #[test]
    fn gaussian_error_scaling() {
        // generic split: error ~ 1/N against (1 + ln(2 pi N p q)) / 2
        let err = |n: u64, la: usize, l: usize| {
            let s = schmidt_spectrum(n, la, l).unwrap();
            (entanglement_entropy_exact(&s) - entropy_binomial_asymptotic(n as f64, la, l).unwrap())
                .abs()
        };
        let ratio = err(1000, 1, 4) / err(10_000, 1, 4);
        assert!((ratio - 10.0).abs() < 0.5, "ratio = {ratio}");
        // the 1/N term cancels at p = 1/2, leaving 1/N^2
        let ratio = err(1000, 1, 2) / err(10_000, 1, 2);
        assert!((ratio - 100.0).abs() < 5.0, "ratio = {ratio}");
        assert!(err(1000, 1, 2) < 1e-3);
    }

    #[test]
    fn poisson_weights() {
        let w = poisson_spectrum(1.0, 40).unwrap();
        assert_relative_eq!(w[0], (-1.0f64).exp(), max_relative = 1e-14);
        let w = poisson_spectrum(100.0, 1000).unwrap();
        let argmax = w
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(argmax == 99 || argmax == 100);
        let exact = weights_entropy(&w);
        assert!((exact - entropy_poisson_asymptotic(100.0).unwrap()).abs() < 1e-4);
        assert!(matches!(
            poisson_spectrum(100.0, 120),
            Err(Error::TailMass { .. })
        ));
        assert!(matches!(
            poisson_spectrum(1.0, 10),
            Err(Error::TailMass { .. })
        ));
    }

    #[test]
    fn binomial_approaches_poisson() {
        let poisson = poisson_spectrum(100.0, 1000).unwrap();
        let mut last = f64::INFINITY;
        // fixed mean N p = 100 with L / L_A = ratio
        for ratio in [10usize, 100, 1000] {
            let s = schmidt_spectrum(100 * ratio as u64, 1, ratio).unwrap();
            let tv = total_variation(&s.lambdas, &poisson);
            assert!(tv < last);
            last = tv;
        }
        let s = schmidt_spectrum(100_000, 1, 1000).unwrap();
        assert!(total_variation(&s.lambdas, &poisson) < 1e-3);
    }
}
