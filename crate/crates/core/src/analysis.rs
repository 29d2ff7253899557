//! Parameter sweeps and logarithmic scaling fits `E_M = a ln L_A + b`.

use rayon::prelude::*;

use crate::correlation::{mutual_information_with, EntropyReport};
use crate::dispersion::{DispersionSource, HoppingKind, HoppingModel};
use crate::thermo::DEFAULT_MU_TOL;
use crate::{Error, Result};

/// Fewest points accepted by [`fit_log_scaling`].
pub const MIN_FIT_POINTS: usize = 4;

/// How the subsystem size follows the ring size.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PartitionRule {
    /// `L_A = L / 2` (rounded down).
    #[default]
    Equal,
    /// Fixed `L_A`.
    Fixed(usize),
    /// `L_A = round(f L)`.
    Fraction(f64),
}

impl PartitionRule {
    pub fn subsystem(&self, l: usize) -> Result<usize> {
        let la = match *self {
            PartitionRule::Equal => l / 2,
            PartitionRule::Fixed(la) => la,
            PartitionRule::Fraction(f) => {
                if !(f > 0.0 && f < 1.0) {
                    return Err(Error::domain(format!(
                        "partition fraction must lie in (0, 1), got {f}"
                    )));
                }
                (f * l as f64).round() as usize
            }
        };
        if la == 0 || la >= l {
            return Err(Error::Partition {
                subsystem: la,
                sites: l,
            });
        }
        Ok(la)
    }
}

/// Grid of `(beta, L)` points sharing one model family.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: HoppingKind,
    pub t: f64,
    pub n_target: f64,
    pub betas: Vec<f64>,
    /// Ring sizes, strictly increasing.
    pub sizes: Vec<usize>,
    pub partition: PartitionRule,
    pub source: DispersionSource,
    pub tol: f64,
}

impl SweepSpec {
    pub fn new(kind: HoppingKind, betas: Vec<f64>, sizes: Vec<usize>) -> Self {
        Self {
            kind,
            t: 1.0,
            n_target: 1.0,
            betas,
            sizes,
            partition: PartitionRule::Equal,
            source: DispersionSource::FiniteLattice,
            tol: DEFAULT_MU_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&b) = self.betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::domain(format!(
                "every beta must be positive and finite, got {b}"
            )));
        }
        if self.sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("size ladder must be strictly increasing"));
        }
        if let Some(&l) = self.sizes.first() {
            HoppingModel::new(self.kind, self.t, l)?;
        }
        if !(self.n_target > 0.0 && self.n_target.is_finite()) {
            return Err(Error::domain(format!(
                "target density must be positive, got {}",
                self.n_target
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::domain(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }

    /// All `(beta, L)` points, sorted by `beta` then `L`.
    pub fn points(&self) -> Vec<(f64, usize)> {
        let mut betas = self.betas.clone();
        betas.sort_by(f64::total_cmp);
        betas.dedup();
        betas
            .iter()
            .flat_map(|&b| self.sizes.iter().map(move |&l| (b, l)))
            .collect()
    }
}

/// One sweep point; failures are kept as data.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub beta: f64,
    pub l: usize,
    pub la: Option<usize>,
    pub result: std::result::Result<EntropyReport, Error>,
}

/// Execution controls for [`run_sweep`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOptions {
    /// Worker threads; `0` lets the pool decide.
    pub workers: usize,
    /// Points already computed, skipped on resume.
    pub completed: Vec<(f64, usize)>,
}

fn evaluate(spec: &SweepSpec, beta: f64, l: usize) -> SweepRow {
    let la = spec.partition.subsystem(l);
    let result = la.clone().and_then(|la| {
        let model = HoppingModel::new(spec.kind, spec.t, l)?;
        mutual_information_with(&model, beta, spec.n_target, la, spec.tol, spec.source)
    });
    SweepRow {
        beta,
        l,
        la: la.ok(),
        result,
    }
}

/// Evaluate every point of `spec` not listed in `opts.completed`, using up to
/// `opts.workers` threads. Rows come back sorted by `(beta, L)`.
pub fn run_sweep(spec: &SweepSpec, opts: &SweepOptions) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let todo: Vec<(f64, usize)> = spec
        .points()
        .into_iter()
        .filter(|&(b, l)| {
            !opts
                .completed
                .iter()
                .any(|&(cb, cl)| cb.to_bits() == b.to_bits() && cl == l)
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| {
        todo.par_iter()
            .map(|&(b, l)| evaluate(spec, b, l))
            .collect()
    });
    rows.sort_by(|a, b| a.beta.total_cmp(&b.beta).then(a.l.cmp(&b.l)));
    Ok(rows)
}

/// Ordinary least-squares fit of `E_M` against `ln L_A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope; zero for two-parameter exact fits.
    pub slope_stderr: f64,
    pub points: usize,
    /// Inclusive `L_A` range actually used.
    pub window: (f64, f64),
}

/// Window covering the largest half of the distinct sizes, and at least
/// [`MIN_FIT_POINTS`] of them.
pub fn default_window(sizes: &[f64]) -> Result<(f64, f64)> {
    let mut s: Vec<f64> = sizes.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: s.len(),
        });
    }
    let take = s.len().div_ceil(2).max(MIN_FIT_POINTS);
    Ok((s[s.len() - take], s[s.len() - 1]))
}

/// Fit `y = a ln x + b` to the points with `x` inside `window` (inclusive);
/// `None` uses [`default_window`].
pub fn fit_log_scaling(points: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<ScalingFit> {
    if let Some(&(x, y)) = points
        .iter()
        .find(|(x, y)| !(*x > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::domain(format!(
            "fit points need positive finite sizes and finite values, got ({x}, {y})"
        )));
    }
    let window = match window {
        Some(w) => w,
        None => default_window(&points.iter().map(|p| p.0).collect::<Vec<_>>())?,
    };
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, _)| *x >= window.0 && *x <= window.1)
        .map(|&(x, y)| (x.ln(), y))
        .collect();
    let n = used.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: n,
        });
    }
    let nf = n as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = used.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = used.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit needs at least two distinct sizes"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = used
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    let slope_stderr = (sse / (nf - 2.0) / sxx).sqrt();
    let xs = used.iter().map(|p| p.0.exp());
    let lo = xs.clone().fold(f64::INFINITY, f64::min);
    let hi = xs.fold(f64::NEG_INFINITY, f64::max);
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        slope_stderr,
        points: n,
        window: (lo.round(), hi.round()),
    })
}

/// `(L_A, E_M)` pairs of the successful rows at one `beta`.
pub fn scaling_points(rows: &[SweepRow], beta: f64) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.beta.to_bits() == beta.to_bits())
        .filter_map(|r| r.result.as_ref().ok().map(|rep| (rep.la as f64, rep.e_m)))
        .collect()
}
