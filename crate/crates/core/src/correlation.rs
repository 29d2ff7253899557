//! Two-point functions of grand-canonical states, their block spectra and
//! the resulting entropies.
//!
//! For a translation-invariant Gaussian state the block correlation matrix
//! `G_ij = <a_i^dag a_j>` is symmetric Toeplitz with first row
//! `G(d) = (1/L) sum_m cos(k_m d) <N_{k_m}>`, and the block entropy is
//! `sum_l s(g_l)` over its eigenvalues, `s(g) = (1 + g) ln(1 + g) - g ln g`.

use crate::dispersion::DispersionSource;
use crate::dispersion::HoppingModel;
use crate::linalg::{toeplitz_eigenvalues, SymMatrix};
use crate::numeric::{cos_table, mode_entropy, CompensatedSum};
use crate::thermo::{solve_mu_with, thermal_entropy, GrandCanonicalState, DEFAULT_MU_TOL};
use crate::{Error, Result};

/// Eigenvalues in `[-CLIP_THRESHOLD, 0)` are rounded to zero; anything lower
/// is a positivity violation.
pub const CLIP_THRESHOLD: f64 = 1e-8;

/// Contiguous `L_A x L_A` block of the two-point function, stored by its
/// first row.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    first_row: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn from_first_row(first_row: Vec<f64>) -> Result<Self> {
        if first_row.is_empty() {
            return Err(Error::domain("correlation matrix needs at least one site"));
        }
        if first_row.iter().any(|x| !x.is_finite()) {
            return Err(Error::domain("correlation matrix entries must be finite"));
        }
        Ok(Self { first_row })
    }

    pub fn size(&self) -> usize {
        self.first_row.len()
    }

    /// `G(d)` for `d = 0..L_A`.
    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    /// Leading `size x size` block.
    pub fn truncate(&self, size: usize) -> Result<Self> {
        if size == 0 || size > self.size() {
            return Err(Error::Partition {
                subsystem: size,
                sites: self.size(),
            });
        }
        Ok(Self {
            first_row: self.first_row[..size].to_vec(),
        })
    }

    pub fn to_dense(&self) -> SymMatrix {
        SymMatrix::toeplitz(&self.first_row)
    }

    /// `sum_i G_ii`.
    pub fn trace(&self) -> f64 {
        self.first_row[0] * self.size() as f64
    }
}

/// Block correlation matrix of `la` contiguous sites.
pub fn correlation_matrix(state: &GrandCanonicalState, la: usize) -> Result<CorrelationMatrix> {
    let l = state.sites();
    if la == 0 || la > l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    let occ = state.occupations();
    let cos = cos_table(l);
    let half = l / 2;
    let first_row = (0..la)
        .map(|d| {
            // occupations are even in m, so pair m with L - m
            let mut acc = CompensatedSum::new();
            let top = if l.is_multiple_of(2) { half } else { half + 1 };
            for m in (1..top).rev() {
                acc.add(2.0 * cos[(m * d) % l] * occ[m]);
            }
            if l.is_multiple_of(2) {
                acc.add(cos[(half * d) % l] * occ[half]);
            }
            acc.add(occ[0]);
            acc.value() / l as f64
        })
        .collect();
    Ok(CorrelationMatrix { first_row })
}

/// Eigenvalues of `G` in descending order, with roundoff negatives clipped.
pub fn spectrum(g: &CorrelationMatrix) -> Result<Vec<f64>> {
    let mut values = toeplitz_eigenvalues(&g.first_row)?;
    for v in &mut values {
        if *v < -CLIP_THRESHOLD {
            return Err(Error::Positivity(*v));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(values)
}

/// `sum_l [(1 + g_l) ln(1 + g_l) - g_l ln g_l]`.
pub fn entropy_from_spectrum(gs: &[f64]) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    // ascending order: small contributions first
    for &g in gs.iter().rev() {
        if !(g >= 0.0) || !g.is_finite() {
            return Err(Error::domain(format!(
                "occupation eigenvalue must be finite and non-negative, got {g}"
            )));
        }
        acc.add(mode_entropy(g));
    }
    Ok(acc.value())
}

/// Entropies of one bipartition of a ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyReport {
    pub e_a: f64,
    pub e_b: f64,
    pub s: f64,
    pub e_m: f64,
    pub la: usize,
    pub lb: usize,
    pub l: usize,
    pub beta: f64,
    pub mu: f64,
    pub density: f64,
    pub condensate: f64,
}

/// Subsystem entropies and mutual information of `state` for `A = [0, la)`.
pub fn entropy_report(state: &GrandCanonicalState, la: usize) -> Result<EntropyReport> {
    let l = state.sites();
    if la == 0 || la >= l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    let lb = l - la;
    let g = correlation_matrix(state, la.max(lb))?;
    let (g_a, g_b) = (g.truncate(la)?, g.truncate(lb)?);
    let (e_a, e_b) = rayon::join(
        || spectrum(&g_a).and_then(|v| entropy_from_spectrum(&v)),
        || spectrum(&g_b).and_then(|v| entropy_from_spectrum(&v)),
    );
    let (e_a, e_b) = (e_a?, e_b?);
    let s = thermal_entropy(state);
    Ok(EntropyReport {
        e_a,
        e_b,
        s,
        e_m: 0.5 * (e_a + e_b - s),
        la,
        lb,
        l,
        beta: state.beta(),
        mu: state.mu(),
        density: state.density(),
        condensate: state.condensate(),
    })
}

/// Solve for `mu` at density `n_target`, then report entropies for `A = [0, la)`.
pub fn mutual_information(
    model: &HoppingModel,
    beta: f64,
    n_target: f64,
    la: usize,
) -> Result<EntropyReport> {
    mutual_information_with(
        model,
        beta,
        n_target,
        la,
        DEFAULT_MU_TOL,
        DispersionSource::FiniteLattice,
    )
}

/// [`mutual_information`] with explicit solver tolerance and dispersion source.
pub fn mutual_information_with(
    model: &HoppingModel,
    beta: f64,
    n_target: f64,
    la: usize,
    tol: f64,
    source: DispersionSource,
) -> Result<EntropyReport> {
    let l = model.sites();
    if la == 0 || la >= l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    let state = solve_mu_with(model, beta, n_target, tol, source)?;
    entropy_report(&state, la)
}

/// Closed-form mutual information of the infinite-range model from the
/// condensate occupation `n0` and the common excited occupation `nk`.
pub fn analytic_mi_infinite_range(l: usize, la: usize, n0: f64, nk: f64) -> Result<f64> {
    if la == 0 || la >= l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    if !(n0 >= 0.0 && nk >= 0.0) || !n0.is_finite() || !nk.is_finite() {
        return Err(Error::domain(format!(
            "occupations must be finite and non-negative, got {n0}, {nk}"
        )));
    }
    let (lf, laf, lbf) = (l as f64, la as f64, (l - la) as f64);
    let g_a = laf * n0 / lf + lbf * nk / lf;
    let g_b = lbf * n0 / lf + laf * nk / lf;
    let s = mode_entropy;
    Ok(0.5 * (s(g_a) + s(g_b) - s(nk) - s(n0)))
}

/// Temperature side and partition shape of the infinite-range asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `L_A << L`, `T > T_C`.
    SmallAbove,
    /// `L_A = L/2`, `T > T_C`.
    EqualAbove,
    /// `L_A << L`, `T < T_C`.
    SmallBelow,
    /// `L_A = L/2`, `T < T_C`.
    EqualBelow,
    /// `L_A << L`, `T = T_C`.
    SmallAt,
    /// `L_A = L/2`, `T = T_C`.
    EqualAt,
}

impl Regime {
    /// Case number, 1 to 6.
    pub fn case(&self) -> u8 {
        match self {
            Regime::SmallAbove => 1,
            Regime::EqualAbove => 2,
            Regime::SmallBelow => 3,
            Regime::EqualBelow => 4,
            Regime::SmallAt => 5,
            Regime::EqualAt => 6,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Regime::SmallAbove => "small-above",
            Regime::EqualAbove => "equal-above",
            Regime::SmallBelow => "small-below",
            Regime::EqualBelow => "equal-below",
            Regime::SmallAt => "small-at",
            Regime::EqualAt => "equal-at",
        }
    }
}

/// `|T/T_C - 1|` at or below this counts as `T = T_C`.
pub const AT_TC_TOL: f64 = 1e-9;
/// Between [`AT_TC_TOL`] and this, the temperature side is ambiguous.
pub const AMBIGUOUS_TC_TOL: f64 = 1e-6;
/// `L_A / L` at or below this counts as a small block.
pub const SMALL_BLOCK_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimePrediction {
    pub regime: Regime,
    /// Leading-order `E_M`.
    pub leading: f64,
}

/// Leading asymptotic mutual information of the infinite-range model.
///
/// The hopping energy is recovered from `T_C = t / ln(1 + 1/n)`; below `T_C`
/// the condensate holds `L (n - n_k(T))` particles.
pub fn asymptotic_regime_mi(
    l: usize,
    la: usize,
    n: f64,
    temperature: f64,
    tc: f64,
) -> Result<RegimePrediction> {
    if la == 0 || la >= l {
        return Err(Error::Partition {
            subsystem: la,
            sites: l,
        });
    }
    for (name, x) in [("density", n), ("temperature", temperature), ("T_C", tc)] {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain(format!(
                "{name} must be positive and finite, got {x}"
            )));
        }
    }
    let rel = temperature / tc - 1.0;
    #[derive(PartialEq)]
    enum Side {
        Above,
        At,
        Below,
    }
    let side = if rel.abs() <= AT_TC_TOL {
        Side::At
    } else if rel.abs() < AMBIGUOUS_TC_TOL {
        return Err(Error::Classification(format!(
            "T/T_C - 1 = {rel:e} is neither at nor clearly away from T_C"
        )));
    } else if rel > 0.0 {
        Side::Above
    } else {
        Side::Below
    };
    let equal = 2 * la == l;
    let small = !equal && la as f64 <= SMALL_BLOCK_FRACTION * l as f64;
    if !equal && !small {
        return Err(Error::Classification(format!(
            "partition L_A = {la} of L = {l} is neither small nor equal"
        )));
    }
    let (lf, laf) = (l as f64, la as f64);
    let t = tc * (1.0 / n).ln_1p();
    let beta = 1.0 / temperature;
    let condensed_block = || laf * (n - 1.0 / (beta * t).exp_m1());
    let (regime, leading) = match (side, equal) {
        (Side::Above, false) => (Regime::SmallAbove, 0.0),
        (Side::Above, true) => {
            // thermodynamic-limit occupations above T_C: N_k = n
            let n0 = 1.0 / ((-beta * t).exp() * (1.0 + 1.0 / n) - 1.0);
            (
                Regime::EqualAbove,
                analytic_mi_infinite_range(l, la, n0, n)?,
            )
        }
        (Side::Below, false) => (Regime::SmallBelow, 0.5 * condensed_block().ln()),
        (Side::Below, true) => (Regime::EqualBelow, 0.5 * condensed_block().ln()),
        (Side::At, false) => (Regime::SmallAt, 0.5 * (n * laf / lf.sqrt()).ln()),
        (Side::At, true) => (Regime::EqualAt, 0.25 * (n * laf).ln()),
    };
    Ok(RegimePrediction { regime, leading })
}
