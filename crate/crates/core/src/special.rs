//! Special functions: gamma, Riemann zeta, the Bose-Einstein integral
//! function `F(gamma, v) = sum_{n>=1} e^{-n v} / n^gamma` and the
//! polylogarithm `g_v(z) = sum_{n>=1} z^n / n^v`.
//!
//! `F` has two evaluation routes:
//!
//! - [`bose_einstein_f_series`]: the defining series summed directly up to a
//!   cutoff `N` with the remainder `sum_{n>=N}` replaced by an
//!   Euler-type expansion in derivatives of `n^-gamma` (repeated summation
//!   by parts). Needs `N |v|` of order 50, so it is used away from `v = 0`.
//! - [`bose_einstein_f_expansion`]: the expansion around `v = 0`,
//!   `Gamma(1 - gamma) v^(gamma - 1) + sum_n zeta(gamma - n) (-v)^n / n!`,
//!   convergent for `|v| < 2 pi` and non-integer `gamma`.
//!
//! [`bose_einstein_f`] dispatches between them at `|v| = 0.1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numeric::{CompensatedSum, ComplexSum};
use crate::{Error, Result};

/// Below this `|v|` the small-`v` expansion is used.
pub const EXPANSION_SWITCH: f64 = 0.1;

/// Product `N |v|` targeted by the direct-series cutoff.
const SERIES_CUTOFF_SCALE: f64 = 48.0;

/// Tolerance and term budget for series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000_000,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol.is_finite()) {
            return Err(Error::domain(format!(
                "rel_tol must be positive, got {rel_tol}"
            )));
        }
        if max_terms < 10 {
            return Err(Error::domain(format!(
                "max_terms must be at least 10, got {max_terms}"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

// Lanczos approximation, g = 7, n = 9. Coefficients from Godfrey's table as
// reproduced in Numerical Recipes (3rd ed.) and the Wikipedia Lanczos article;
// relative error below 2e-15 on the positive real axis.
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    // r in [0, 2)
    let (r, sign) = if r >= 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

fn lanczos_sum(x: f64) -> f64 {
    let z = x - 1.0;
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    a
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Gamma function on the real line, excluding the poles at `0, -1, -2, ...`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma of non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    let value = if x < 0.5 {
        let s = sin_pi(x);
        PI / (s * gamma_fn(1.0 - x)?)
    } else {
        let z = x - 1.0;
        let t = z + LANCZOS_G + 0.5;
        let a = lanczos_sum(x);
        // Split the power to postpone overflow.
        let half = t.powf(0.5 * (z + 0.5));
        (2.0 * PI).sqrt() * half * (half * (-t).exp()) * a
    };
    if !value.is_finite() {
        return Err(Error::domain(format!("gamma({x}) overflows")));
    }
    Ok(value)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        return Ok(PI.ln() - sin_pi(x).ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(x).ln())
}

// B_{2j} / (2j)! for j = 1..=8.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30_240.0,
    -1.0 / 1_209_600.0,
    1.0 / 47_900_160.0,
    -691.0 / 1_307_674_368_000.0,
    1.0 / 74_724_249_600.0,
    -3617.0 / 10_670_622_842_880_000.0,
];

const ZETA_EM_CUTOFF: usize = 20;

/// Euler-Maclaurin evaluation of `zeta(s)` for `s >= 0`, `s != 1`.
fn zeta_euler_maclaurin(s: f64) -> f64 {
    let n = ZETA_EM_CUTOFF as f64;
    let mut acc = CompensatedSum::new();
    for k in (1..ZETA_EM_CUTOFF).rev() {
        acc.add((k as f64).powf(-s));
    }
    let n_pow = n.powf(-s);
    acc.add(n * n_pow / (s - 1.0));
    acc.add(0.5 * n_pow);
    // term_j = B_2j/(2j)! * s (s+1) ... (s+2j-2) * N^{-s-2j+1}
    let mut poch = s / n * n_pow;
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            poch *= (s + m - 1.0) * (s + m) / (n * n);
        }
        acc.add(c * poch);
    }
    acc.value()
}

/// Riemann zeta function for real `s != 1`.
///
/// `s >= 0` uses Euler-Maclaurin with eight Bernoulli corrections; `s < 0`
/// goes through the functional equation.
pub fn zeta(s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::domain(format!("zeta of non-finite argument {s}")));
    }
    if s == 1.0 {
        return Err(Error::domain("zeta has a pole at s = 1"));
    }
    if s >= 0.0 {
        return Ok(zeta_euler_maclaurin(s));
    }
    // zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1 - s) zeta(1 - s)
    let sin_term = sin_pi(0.5 * s);
    if sin_term == 0.0 {
        return Ok(0.0);
    }
    let log_mag = s * 2f64.ln() + (s - 1.0) * PI.ln() + ln_gamma(1.0 - s)?;
    let value = sin_term * log_mag.exp() * zeta_euler_maclaurin(1.0 - s);
    if !value.is_finite() {
        return Err(Error::domain(format!("zeta({s}) overflows")));
    }
    Ok(value)
}

fn validate_f_args(gamma: f64, v: Complex64) -> Result<()> {
    if !(gamma.is_finite() && v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::domain("F(gamma, v) requires finite arguments"));
    }
    if v.re < 0.0 {
        return Err(Error::domain(format!(
            "F(gamma, v) requires Re v >= 0, got {}",
            v.re
        )));
    }
    if v.re == 0.0 && gamma <= 1.0 {
        return Err(Error::domain(format!(
            "F(gamma, v) on the imaginary axis requires gamma > 1, got {gamma}"
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::domain(format!(
            "F(gamma, v) requires gamma > 0, got {gamma}"
        )));
    }
    Ok(())
}

/// Map `Im v` into `(-pi, pi]`; `F` is `2 pi i`-periodic in `v`.
fn reduce_imaginary(v: Complex64) -> Complex64 {
    let turns = (v.im / (2.0 * PI)).round();
    let mut im = v.im - turns * 2.0 * PI;
    if im <= -PI {
        im += 2.0 * PI;
    }
    Complex64::new(v.re, im)
}

/// Bose-Einstein integral function `F(gamma, v) = sum_{n>=1} e^{-n v} / n^gamma`.
///
/// Requires `Re v >= 0`, with `gamma > 1` on the imaginary axis and
/// `gamma > 0` otherwise.
pub fn bose_einstein_f(gamma: f64, v: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    validate_f_args(gamma, v)?;
    let v = reduce_imaginary(v);
    if v == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(zeta(gamma)?, 0.0));
    }
    if gamma == 1.0 {
        // -ln(1 - e^{-v})
        let one_minus_z = -(-v).exp_m1();
        return Ok(-one_minus_z.ln());
    }
    if v.norm() < EXPANSION_SWITCH && gamma.fract() != 0.0 {
        bose_einstein_f_expansion(gamma, v, ctl)
    } else {
        bose_einstein_f_series(gamma, v, ctl)
    }
}

trait ExpM1 {
    fn exp_m1(self) -> Self;
}

impl ExpM1 for Complex64 {
    /// `e^z - 1` without cancellation for small `|z|`.
    fn exp_m1(self) -> Self {
        // e^{a+ib} - 1 = (e^a cos b - 1) + i e^a sin b
        //             = expm1(a) cos b - 2 sin^2(b/2) + i e^a sin b
        let (a, b) = (self.re, self.im);
        let half = (0.5 * b).sin();
        Complex64::new(a.exp_m1() * b.cos() - 2.0 * half * half, a.exp() * b.sin())
    }
}

/// Direct series for `F(gamma, v)` with an asymptotic remainder.
///
/// `sum_{n>=N} z^n f(n) = z^N sum_j c_j f^{(j)}(N)` with `z = e^{-v}`,
/// `f(x) = x^-gamma` and `1 / (1 - z e^t) = sum_j c_j t^j`. The coefficients
/// grow like `|v|^-j` while the derivatives shrink like `N^-j`, so the
/// remainder converges quickly once `N |v| >> 1`.
pub fn bose_einstein_f_series(gamma: f64, v: Complex64, ctl: &SeriesControl) -> Result<Complex64> {
    validate_f_args(gamma, v)?;
    let v = reduce_imaginary(v);
    let scale = v.norm();
    if scale == 0.0 {
        return Err(Error::domain("direct series for F needs v != 0 (use zeta)"));
    }
    let cutoff = (SERIES_CUTOFF_SCALE / scale).ceil().max(16.0);
    if cutoff > ctl.max_terms as f64 {
        return Err(Error::Convergence {
            iterations: ctl.max_terms,
            estimate: f64::NAN,
        });
    }
    let cutoff = cutoff as usize;

    let mut head = ComplexSum::new();
    for n in 1..cutoff {
        let nf = n as f64;
        head.add((-v * nf).exp() * nf.powf(-gamma));
    }

    let z = (-v).exp();
    let one_minus_z = -(-v).exp_m1();
    let ratio = z / one_minus_z;
    let nf = cutoff as f64;
    let lead = (-v * nf).exp();

    // c_j and the running factor (-1)^j (gamma)_j N^{-gamma-j}
    let mut coeffs: Vec<Complex64> = vec![Complex64::new(1.0, 0.0) / one_minus_z];
    let mut deriv = nf.powf(-gamma);
    let mut tail = ComplexSum::new();
    let mut recent = [f64::INFINITY; 3];
    let mut total = head.value();
    // Terms shrink roughly like prod (gamma + i) / (N |v|); stop well before
    // the asymptotic remainder turns around.
    let max_order = ((nf * scale - gamma - 2.0).floor().max(3.0) as usize).min(64);
    for j in 0..=max_order {
        if j > 0 {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut inv_fact = 1.0;
            for i in 1..=j {
                inv_fact /= i as f64;
                acc += coeffs[j - i] * inv_fact;
            }
            coeffs.push(ratio * acc);
            deriv *= -(gamma + (j - 1) as f64) / nf;
        }
        let term = lead * coeffs[j] * deriv;
        tail.add(term);
        recent.rotate_left(1);
        recent[2] = term.norm();
        total = head.value() + tail.value();
        let err = recent.iter().cloned().fold(0.0, f64::max);
        if j >= 3 && err <= ctl.rel_tol * 1e-2 * total.norm() {
            return Ok(total);
        }
    }
    let err = recent.iter().cloned().fold(0.0, f64::max);
    if err <= ctl.rel_tol * total.norm() {
        Ok(total)
    } else {
        Err(Error::Convergence {
            iterations: cutoff,
            estimate: total.re,
        })
    }
}

/// Small-`v` expansion of `F(gamma, v)` for non-integer `gamma`, `|v| < 2 pi`.
pub fn bose_einstein_f_expansion(
    gamma: f64,
    v: Complex64,
    ctl: &SeriesControl,
) -> Result<Complex64> {
    validate_f_args(gamma, v)?;
    if gamma.fract() == 0.0 {
        return Err(Error::Unsupported(format!(
            "small-v expansion of F for integer gamma = {gamma}"
        )));
    }
    let v = reduce_imaginary(v);
    let r = v.norm();
    if r == 0.0 {
        return Err(Error::domain(
            "expansion of F needs v != 0 when gamma is non-integer",
        ));
    }
    if r >= 2.0 * PI {
        return Err(Error::domain(format!(
            "expansion of F diverges for |v| = {r} >= 2 pi"
        )));
    }
    let singular = gamma_fn(1.0 - gamma)? * ((gamma - 1.0) * v.ln()).exp();
    let mut sum = ComplexSum::new();
    sum.add(singular);
    let minus_v = -v;
    let mut power = Complex64::new(1.0, 0.0); // (-v)^n / n!
    let mut recent = [f64::INFINITY; 3];
    let max_terms = ctl.max_terms.min(160);
    for n in 0..max_terms {
        if n > 0 {
            power = power * minus_v / n as f64;
        }
        let term = power * zeta(gamma - n as f64)?;
        sum.add(term);
        recent.rotate_left(1);
        recent[2] = term.norm();
        let err = recent.iter().cloned().fold(0.0, f64::max);
        if n >= 3 && err <= ctl.rel_tol * sum.value().norm() * 1e-2 {
            return Ok(sum.value());
        }
    }
    Err(Error::Convergence {
        iterations: max_terms,
        estimate: sum.value().re,
    })
}

/// `g_v(z) = sum_{n>=1} z^n / n^v` for `z in (0, 1]`.
pub fn polylog_g(v: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::domain(format!(
            "g_v(z) requires z in (0, 1], got {z}"
        )));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::domain(format!("g_v(z) requires v > 0, got {v}")));
    }
    if z == 1.0 {
        if v <= 1.0 {
            return Err(Error::Divergent(format!(
                "g_v(1) diverges for v = {v} <= 1"
            )));
        }
        return zeta(v);
    }
    let f = bose_einstein_f(v, Complex64::new(-z.ln(), 0.0), ctl)?;
    Ok(f.re)
}
