//! Small numerical helpers shared across modules.

use num_complex::Complex64;

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Compensated accumulator for complex values (componentwise).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Entropy of a single bosonic mode with mean occupation `g`:
/// `(1 + g) ln(1 + g) - g ln g`, with `0 ln 0 = 0`.
///
/// Evaluated as `ln(1 + g) + g ln(1 + 1/g)`, which stays accurate for both
/// tiny and huge occupations.
#[inline]
pub fn mode_entropy(g: f64) -> f64 {
    if g <= 0.0 {
        return 0.0;
    }
    if g.is_infinite() {
        return f64::INFINITY;
    }
    g.ln_1p() + g * (1.0 / g).ln_1p()
}

/// `-p ln p` with `0 ln 0 = 0`.
#[inline]
pub fn shannon_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.ln()
    } else {
        0.0
    }
}

/// Cosine of `2 pi j / n`, folded so that `j` and `n - j` give bitwise
/// identical results.
#[inline]
pub fn cos_two_pi_frac(j: usize, n: usize) -> f64 {
    let r = j % n;
    let r = r.min(n - r);
    (std::f64::consts::TAU * r as f64 / n as f64).cos()
}

/// Table of `cos(2 pi j / n)` for `j = 0..n`, exactly even under `j -> n - j`.
pub fn cos_table(n: usize) -> Vec<f64> {
    (0..n).map(|j| cos_two_pi_frac(j, n)).collect()
}
