//! Hopping models on a ring of `L` sites and their single-particle spectra.
//!
//! Momenta follow periodic boundary conditions, `k_m = 2 pi m / L` for
//! `m = 0..L`. The power-law model uses the lattice sum
//! `eps(k) = -2t sum_{n=1}^{L-1} cos(n k) / n^gamma` exactly as written, so
//! ring separations `n` and `L - n` both contribute.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::numeric::{cos_table, cos_two_pi_frac, CompensatedSum};
use crate::special::{self, SeriesControl};
use crate::{Error, Result};

/// Shape of the hopping amplitudes `t_ij`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoppingKind {
    /// `t_ij = t` for nearest neighbours on the ring.
    NearestNeighbor,
    /// `t_ij = t / L` between every pair of sites.
    InfiniteRange,
    /// `t_ij = t / |i - j|^gamma`.
    PowerLaw { gamma: f64 },
}

impl HoppingKind {
    pub fn power_law(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::domain(format!(
                "power-law hopping needs gamma > 1 for a well-defined thermodynamic limit, got {gamma}"
            )));
        }
        Ok(HoppingKind::PowerLaw { gamma })
    }

    pub fn gamma(&self) -> Option<f64> {
        match *self {
            HoppingKind::PowerLaw { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HoppingKind::NearestNeighbor => "nearest-neighbor",
            HoppingKind::InfiniteRange => "infinite-range",
            HoppingKind::PowerLaw { .. } => "power-law",
        }
    }
}

/// Translation-invariant hopping model on a ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingModel {
    kind: HoppingKind,
    t: f64,
    sites: usize,
}

impl HoppingModel {
    pub fn new(kind: HoppingKind, t: f64, sites: usize) -> Result<Self> {
        if sites < 2 {
            return Err(Error::domain(format!(
                "lattice needs at least 2 sites, got {sites}"
            )));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!(
                "hopping energy must be positive, got {t}"
            )));
        }
        if let HoppingKind::PowerLaw { gamma } = kind {
            HoppingKind::power_law(gamma)?;
        }
        Ok(Self { kind, t, sites })
    }

    pub fn nearest_neighbor(t: f64, sites: usize) -> Result<Self> {
        Self::new(HoppingKind::NearestNeighbor, t, sites)
    }

    pub fn infinite_range(t: f64, sites: usize) -> Result<Self> {
        Self::new(HoppingKind::InfiniteRange, t, sites)
    }

    pub fn power_law(gamma: f64, t: f64, sites: usize) -> Result<Self> {
        Self::new(HoppingKind::power_law(gamma)?, t, sites)
    }

    pub fn kind(&self) -> HoppingKind {
        self.kind
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Same model on a different ring size.
    pub fn with_sites(&self, sites: usize) -> Result<Self> {
        Self::new(self.kind, self.t, sites)
    }

    /// Momentum of mode `m`.
    pub fn momentum(&self, m: usize) -> f64 {
        2.0 * PI * m as f64 / self.sites as f64
    }
}

/// Where the power-law dispersion comes from when tabulating a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispersionSource {
    /// The finite lattice sum over separations `1..L`.
    #[default]
    FiniteLattice,
    /// The `L -> infinity` dispersion sampled on the ring's momenta.
    ThermodynamicLimit,
}

/// Energy of mode `m` on the finite ring.
pub fn dispersion_at(model: &HoppingModel, m: usize) -> Result<f64> {
    let l = model.sites;
    if m >= l {
        return Err(Error::Index { index: m, sites: l });
    }
    let t = model.t;
    Ok(match model.kind {
        HoppingKind::NearestNeighbor => -2.0 * t * cos_two_pi_frac(m, l),
        HoppingKind::InfiniteRange => {
            if m == 0 {
                -t
            } else {
                0.0
            }
        }
        HoppingKind::PowerLaw { gamma } => {
            let mut acc = CompensatedSum::new();
            for n in (1..l).rev() {
                acc.add(cos_two_pi_frac(n * m, l) * (n as f64).powf(-gamma));
            }
            -2.0 * t * acc.value()
        }
    })
}

/// Dispersion tabulated over the ring's momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionTable {
    pub k: Vec<f64>,
    pub eps: Vec<f64>,
}

impl DispersionTable {
    pub fn len(&self) -> usize {
        self.eps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eps.is_empty()
    }

    /// Lowest energy in the table.
    pub fn min_energy(&self) -> f64 {
        self.eps.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

/// Tabulate the finite-lattice dispersion.
pub fn dispersion_table(model: &HoppingModel) -> DispersionTable {
    dispersion_table_with(model, DispersionSource::FiniteLattice)
        .expect("finite-lattice tabulation of a validated model cannot fail")
}

/// Tabulate the dispersion from the chosen source. Only power-law hopping
/// distinguishes the two sources.
pub fn dispersion_table_with(
    model: &HoppingModel,
    source: DispersionSource,
) -> Result<DispersionTable> {
    let l = model.sites;
    let k: Vec<f64> = (0..l).map(|m| model.momentum(m)).collect();
    let mut eps = vec![0.0; l];
    let half = l / 2;
    match (model.kind, source) {
        (HoppingKind::PowerLaw { gamma }, DispersionSource::FiniteLattice) => {
            let cos = cos_table(l);
            let weights: Vec<f64> = (1..l).map(|n| (n as f64).powf(-gamma)).collect();
            for m in 0..=half {
                let mut acc = CompensatedSum::new();
                // smallest terms first
                for n in (1..l).rev() {
                    acc.add(cos[(n * m) % l] * weights[n - 1]);
                }
                eps[m] = -2.0 * model.t * acc.value();
            }
        }
        (HoppingKind::PowerLaw { gamma }, DispersionSource::ThermodynamicLimit) => {
            for (m, e) in eps.iter_mut().enumerate().take(half + 1) {
                // fold onto [0, pi] with the same rounding as the finite table
                let r = m.min(l - m);
                let km = 2.0 * PI * r as f64 / l as f64;
                *e = dispersion_thermo_limit(gamma, model.t, km)?;
            }
        }
        _ => {
            for (m, e) in eps.iter_mut().enumerate().take(half + 1) {
                *e = dispersion_at(model, m)?;
            }
        }
    }
    for m in half + 1..l {
        eps[m] = eps[l - m];
    }
    Ok(DispersionTable { k, eps })
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0 && gamma.is_finite()) {
        return Err(Error::domain(format!(
            "thermodynamic-limit dispersion needs gamma > 1, got {gamma}"
        )));
    }
    Ok(())
}

/// Thermodynamic-limit power-law dispersion `-2t Re F(gamma, i k)`.
///
/// Even and `2 pi`-periodic in `k`.
pub fn dispersion_thermo_limit(gamma: f64, t: f64, k: f64) -> Result<f64> {
    validate_gamma(gamma)?;
    if !k.is_finite() {
        return Err(Error::domain("momentum must be finite"));
    }
    let f = special::bose_einstein_f(
        gamma,
        Complex64::new(0.0, k.abs()),
        &SeriesControl::default(),
    )?;
    Ok(-2.0 * t * f.re)
}

/// `eps(k) - eps(0)` in the thermodynamic limit, computed without the
/// cancellation of subtracting `-2t zeta(gamma)` at small `k`.
pub fn dispersion_gap_thermo_limit(gamma: f64, t: f64, k: f64) -> Result<f64> {
    validate_gamma(gamma)?;
    let k = k.abs();
    if k == 0.0 {
        return Ok(0.0);
    }
    if k < special::EXPANSION_SWITCH && gamma.fract() != 0.0 {
        return SmallKExpansion::unchecked(gamma, t)?.gap(k);
    }
    let e0 = -2.0 * t * special::zeta(gamma)?;
    Ok(dispersion_thermo_limit(gamma, t, k)? - e0)
}

/// Leading small-`k` behaviour of the power-law dispersion for `1 < gamma < 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallKExpansion {
    pub gamma: f64,
    pub t: f64,
    /// `sigma = -2 t Gamma(1 - gamma)`.
    pub sigma: f64,
    /// `gamma - 1`.
    pub exponent: f64,
    /// Coefficient of `k^(gamma - 1)` in `eps(k) - eps(0)`:
    /// `sigma cos(pi (gamma - 1) / 2)`, which is positive on `(1, 3)`.
    pub coefficient: f64,
    /// `zeta(gamma - n) / n!` for `n = 0, 1, 2`.
    pub zeta_terms: [f64; 3],
}

impl SmallKExpansion {
    pub fn new(gamma: f64, t: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma < 3.0) {
            return Err(Error::domain(format!(
                "small-k expansion is defined for 1 < gamma < 3, got {gamma}"
            )));
        }
        Self::unchecked(gamma, t)
    }

    /// Any non-integer `gamma > 1`; above 3 the `k^2` term dominates the gap.
    fn unchecked(gamma: f64, t: f64) -> Result<Self> {
        if gamma.fract() == 0.0 {
            return Err(Error::Unsupported(format!(
                "logarithmic small-k branch for integer gamma = {gamma}"
            )));
        }
        let sigma = -2.0 * t * special::gamma_fn(1.0 - gamma)?;
        let exponent = gamma - 1.0;
        let coefficient = sigma * (0.5 * PI * exponent).cos();
        let zeta_terms = [
            special::zeta(gamma)?,
            special::zeta(gamma - 1.0)?,
            special::zeta(gamma - 2.0)? / 2.0,
        ];
        Ok(Self {
            gamma,
            t,
            sigma,
            exponent,
            coefficient,
            zeta_terms,
        })
    }

    /// `eps(k) - eps(0)` from the full expansion, summed until converged.
    pub fn gap(&self, k: f64) -> Result<f64> {
        let k = k.abs();
        if k >= 2.0 * PI {
            return Err(Error::domain("small-k expansion diverges for k >= 2 pi"));
        }
        let ctl = SeriesControl::default();
        let mut acc = CompensatedSum::new();
        acc.add(self.coefficient * k.powf(self.exponent));
        // Re[(-ik)^n] vanishes for odd n; n = 2j gives (-1)^j k^{2j}.
        let mut power = 1.0; // (-1)^j k^{2j} / (2j)!
        let mut recent = [f64::INFINITY; 3];
        for j in 1..80 {
            let n = 2 * j;
            power *= -k * k / ((n - 1) * n) as f64;
            let term = -2.0 * self.t * power * special::zeta(self.gamma - n as f64)?;
            acc.add(term);
            recent.rotate_left(1);
            recent[2] = term.abs();
            let err = recent.iter().cloned().fold(0.0, f64::max);
            if j >= 3 && err <= ctl.rel_tol * 1e-2 * acc.value().abs() {
                return Ok(acc.value());
            }
        }
        Err(Error::Convergence {
            iterations: 80,
            estimate: acc.value(),
        })
    }

    /// Leading singular term plus the first analytic correction,
    /// `coefficient k^(gamma-1) + t zeta(gamma - 2) k^2`.
    pub fn leading(&self, k: f64) -> f64 {
        let k = k.abs();
        self.coefficient * k.powf(self.exponent) + 2.0 * self.t * self.zeta_terms[2] * k * k
    }
}

/// Small-`k` expansion of the thermodynamic-limit power-law dispersion.
pub fn small_k_expansion(gamma: f64, t: f64) -> Result<SmallKExpansion> {
    SmallKExpansion::new(gamma, t)
}
