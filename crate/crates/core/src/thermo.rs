//! Grand-canonical thermodynamics of free bosons on a ring.
//!
//! Chemical potentials are parametrised by the gap `eps_min - mu > 0`.

use std::cell::Cell;

use crate::dispersion::{
    dispersion_gap_thermo_limit, dispersion_table_with, DispersionSource, DispersionTable,
    HoppingKind, HoppingModel,
};
use crate::numeric::{mode_entropy, CompensatedSum};
use crate::quadrature::{integrate, QuadControl};
use crate::{Error, Result};

/// Bisection cap shared by the chemical-potential and `beta_c` solvers.
pub const MAX_BISECTIONS: usize = 200;
/// Default relative density tolerance for [`solve_mu`].
pub const DEFAULT_MU_TOL: f64 = 1e-12;
/// Default relative density tolerance for [`tc_long_range`].
pub const DEFAULT_TC_TOL: f64 = 1e-8;

/// Above this exponent the Bose factor is `e^{-x}` to double precision.
const LARGE_EXPONENT: f64 = 700.0;

#[inline]
fn bose(x: f64) -> f64 {
    if x > LARGE_EXPONENT {
        (-x).exp()
    } else {
        1.0 / x.exp_m1()
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain(format!(
            "inverse temperature must be positive and finite, got {beta}"
        )));
    }
    Ok(())
}

fn check_density(n: f64) -> Result<()> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain(format!(
            "target density must be positive and finite, got {n}"
        )));
    }
    Ok(())
}

/// Bose-Einstein occupation `1 / (e^{beta (eps - mu)} - 1)`.
pub fn occupation(eps: f64, beta: f64, mu: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(mu < eps) {
        return Err(Error::domain(format!(
            "chemical potential {mu} must lie below the level {eps}"
        )));
    }
    Ok(bose(beta * (eps - mu)))
}

/// Distinct excitation energies `eps - eps_min` with multiplicities.
#[derive(Debug, Clone)]
struct Levels {
    offsets: Vec<f64>,
    counts: Vec<f64>,
    sites: f64,
}

impl Levels {
    fn new(table: &DispersionTable) -> Self {
        let e0 = table.min_energy();
        let mut offsets: Vec<f64> = table.eps.iter().map(|e| e - e0).collect();
        offsets.sort_by(f64::total_cmp);
        let mut grouped: Vec<f64> = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for x in offsets {
            match grouped.last() {
                Some(&last) if last == x => *counts.last_mut().expect("paired with grouped") += 1.0,
                _ => {
                    grouped.push(x);
                    counts.push(1.0);
                }
            }
        }
        // largest offsets (smallest occupations) first
        grouped.reverse();
        counts.reverse();
        Self {
            offsets: grouped,
            counts,
            sites: table.len() as f64,
        }
    }

    fn density(&self, beta: f64, gap: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (d, c) in self.offsets.iter().zip(&self.counts) {
            acc.add(c * bose(beta * (d + gap)));
        }
        acc.value() / self.sites
    }
}

/// Equilibrium state of the ring at fixed `(beta, mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrandCanonicalState {
    model: HoppingModel,
    source: DispersionSource,
    beta: f64,
    gap: f64,
    table: DispersionTable,
    occ: Vec<f64>,
    n_avg: f64,
}

impl GrandCanonicalState {
    /// State at `mu = eps_min - gap`.
    pub fn from_gap(
        model: &HoppingModel,
        beta: f64,
        gap: f64,
        source: DispersionSource,
    ) -> Result<Self> {
        check_beta(beta)?;
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::domain(format!(
                "gap eps_min - mu must be positive, got {gap}"
            )));
        }
        let table = dispersion_table_with(model, source)?;
        Ok(Self::build(*model, source, beta, gap, table))
    }

    /// State at an explicit chemical potential.
    pub fn from_mu(
        model: &HoppingModel,
        beta: f64,
        mu: f64,
        source: DispersionSource,
    ) -> Result<Self> {
        check_beta(beta)?;
        let table = dispersion_table_with(model, source)?;
        let gap = table.min_energy() - mu;
        if !(gap > 0.0 && gap.is_finite()) {
            return Err(Error::domain(format!(
                "chemical potential {mu} must lie below the band bottom {}",
                table.min_energy()
            )));
        }
        Ok(Self::build(*model, source, beta, gap, table))
    }

    fn build(
        model: HoppingModel,
        source: DispersionSource,
        beta: f64,
        gap: f64,
        table: DispersionTable,
    ) -> Self {
        let e0 = table.min_energy();
        let occ: Vec<f64> = table
            .eps
            .iter()
            .map(|e| bose(beta * ((e - e0) + gap)))
            .collect();
        let n_avg = occ
            .iter()
            .rev()
            .copied()
            .collect::<CompensatedSum>()
            .value()
            / occ.len() as f64;
        Self {
            model,
            source,
            beta,
            gap,
            table,
            occ,
            n_avg,
        }
    }

    pub fn model(&self) -> &HoppingModel {
        &self.model
    }

    pub fn source(&self) -> DispersionSource {
        self.source
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn mu(&self) -> f64 {
        self.table.min_energy() - self.gap
    }

    /// `eps_min - mu`.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn table(&self) -> &DispersionTable {
        &self.table
    }

    /// Mode occupations `<N_{k_m}>`, indexed like the dispersion table.
    pub fn occupations(&self) -> &[f64] {
        &self.occ
    }

    /// Density `(1/L) sum_m <N_{k_m}>`.
    pub fn density(&self) -> f64 {
        self.n_avg
    }

    /// Condensate occupation `<N_0>`.
    pub fn condensate(&self) -> f64 {
        self.occ[0]
    }

    pub fn sites(&self) -> usize {
        self.model.sites()
    }
}

/// Chemical potential at density `n_target` on the finite-lattice dispersion.
pub fn solve_mu(
    model: &HoppingModel,
    beta: f64,
    n_target: f64,
    tol: f64,
) -> Result<GrandCanonicalState> {
    solve_mu_with(model, beta, n_target, tol, DispersionSource::FiniteLattice)
}

/// Chemical potential at density `n_target` by bisection in `ln(eps_min - mu)`.
pub fn solve_mu_with(
    model: &HoppingModel,
    beta: f64,
    n_target: f64,
    tol: f64,
    source: DispersionSource,
) -> Result<GrandCanonicalState> {
    check_beta(beta)?;
    check_density(n_target)?;
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let table = dispersion_table_with(model, source)?;
    let levels = Levels::new(&table);
    let sites = table.len() as f64;
    let residual = |gap: f64| (levels.density(beta, gap) - n_target) / n_target;

    // The condensate alone reaches the target at this gap.
    let lo_gap = (1.0 / (sites * n_target)).ln_1p() / beta;
    let mut hi_gap = lo_gap.max(1.0 / beta);
    let mut doublings = 0;
    while residual(hi_gap) > 0.0 {
        hi_gap *= 2.0;
        doublings += 1;
        if doublings > 1100 || !hi_gap.is_finite() {
            return Err(Error::domain(format!(
                "density {n_target} too small to bracket"
            )));
        }
    }
    let finish = |gap: f64| {
        Ok(GrandCanonicalState::build(
            *model,
            source,
            beta,
            gap,
            table.clone(),
        ))
    };
    if residual(lo_gap).abs() <= tol {
        return finish(lo_gap);
    }
    if residual(hi_gap).abs() <= tol {
        return finish(hi_gap);
    }
    let (mut lo, mut hi) = (lo_gap.ln(), hi_gap.ln());
    let mut best = (f64::INFINITY, lo_gap);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gap = mid.exp();
        let r = residual(gap);
        if r.abs() < best.0 {
            best = (r.abs(), gap);
        }
        if r.abs() <= tol {
            return finish(gap);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        iterations: MAX_BISECTIONS,
        estimate: table.min_energy() - best.1,
    })
}

/// Finite-size shift of the chemical potential below the band bottom,
/// `-T ln(1 + 1/<N_0>)`.
pub fn delta_mu(temperature: f64, n0: f64) -> Result<f64> {
    if !(temperature > 0.0) || !(n0 > 0.0) || temperature.is_nan() || n0.is_nan() {
        return Err(Error::domain(format!(
            "delta_mu needs T > 0 and N0 > 0, got T = {temperature}, N0 = {n0}"
        )));
    }
    Ok(-temperature * (1.0 / n0).ln_1p())
}

/// Total entropy `sum_m [(1 + N_m) ln(1 + N_m) - N_m ln N_m]`.
pub fn thermal_entropy(state: &GrandCanonicalState) -> f64 {
    state
        .occ
        .iter()
        .map(|&g| mode_entropy(g))
        .collect::<CompensatedSum>()
        .value()
}

/// How a transition temperature was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TcMethod {
    ClosedForm,
    Quadrature,
}

impl TcMethod {
    pub fn name(&self) -> &'static str {
        match self {
            TcMethod::ClosedForm => "closed-form",
            TcMethod::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcResult {
    pub tc: f64,
    pub beta_c: f64,
    pub method: TcMethod,
}

/// `T_C = t / ln(1 + 1/n)` for infinite-range hopping.
pub fn tc_infinite_range(t: f64, n: f64) -> Result<TcResult> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "hopping energy must be positive, got {t}"
        )));
    }
    check_density(n)?;
    let beta_c = (1.0 / n).ln_1p() / t;
    Ok(TcResult {
        tc: t / (1.0 / n).ln_1p(),
        beta_c,
        method: TcMethod::ClosedForm,
    })
}

fn check_bec_window(gamma: f64) -> Result<()> {
    if !(gamma > 1.0 && gamma < 2.0) {
        return Err(Error::domain(format!(
            "finite-temperature condensation requires 1 < gamma < 2, got {gamma}"
        )));
    }
    Ok(())
}

/// Thermodynamic-limit density of the power-law gas with `mu = eps(0)`,
/// `(1/pi) int_0^pi dk / (e^{beta (eps(k) - eps(0))} - 1)`.
///
/// The substitution `k = u^p`, `p = 1 / (2 - gamma)`, removes the
/// `k^{1 - gamma}` endpoint singularity.
pub fn critical_density(gamma: f64, t: f64, beta: f64, rel_tol: f64) -> Result<f64> {
    check_bec_window(gamma)?;
    check_beta(beta)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!(
            "hopping energy must be positive, got {t}"
        )));
    }
    let p = 1.0 / (2.0 - gamma);
    let failure: Cell<Option<Error>> = Cell::new(None);
    let integrand = |u: f64| {
        let k = u.powf(p);
        match dispersion_gap_thermo_limit(gamma, t, k) {
            Ok(gap) if gap > 0.0 => p * u.powf(p - 1.0) * bose(beta * gap),
            Ok(gap) => {
                failure.set(Some(Error::domain(format!(
                    "non-positive dispersion gap {gap} at k = {k}"
                ))));
                f64::NAN
            }
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        }
    };
    let ctl = QuadControl {
        abs_tol: 0.0,
        rel_tol,
        max_intervals: 4000,
    };
    let upper = std::f64::consts::PI.powf(1.0 / p);
    match integrate(integrand, 0.0, upper, &ctl) {
        Ok(r) => Ok(r.value / std::f64::consts::PI),
        Err(e) => Err(failure.take().unwrap_or(e)),
    }
}

/// Condensation temperature of power-law hopping, `1 < gamma < 2`: the `beta`
/// at which [`critical_density`] equals `n_target`.
pub fn tc_long_range(gamma: f64, t: f64, n_target: f64, tol: f64) -> Result<TcResult> {
    check_bec_window(gamma)?;
    check_density(n_target)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::domain(format!(
            "tolerance must lie in (0, 1), got {tol}"
        )));
    }
    let quad_tol = (tol * 1e-3).max(1e-13);
    let residual = |beta: f64| -> Result<f64> {
        Ok((critical_density(gamma, t, beta, quad_tol)? - n_target) / n_target)
    };

    // density decreases with beta
    let mut lo = 1.0f64;
    let mut hi = 1.0f64;
    let r0 = residual(1.0)?;
    let mut steps = 0;
    if r0 > 0.0 {
        while residual(hi)? > 0.0 {
            lo = hi;
            hi *= 2.0;
            steps += 1;
            if steps > 200 {
                return Err(Error::Convergence {
                    iterations: steps,
                    estimate: hi,
                });
            }
        }
    } else {
        while residual(lo)? < 0.0 {
            hi = lo;
            lo *= 0.5;
            steps += 1;
            if steps > 200 {
                return Err(Error::Convergence {
                    iterations: steps,
                    estimate: lo,
                });
            }
        }
    }
    let (mut a, mut b) = (lo.ln(), hi.ln());
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        let beta = mid.exp();
        let r = residual(beta)?;
        if r.abs() <= tol {
            return Ok(TcResult {
                tc: 1.0 / beta,
                beta_c: beta,
                method: TcMethod::Quadrature,
            });
        }
        if mid <= a || mid >= b {
            break;
        }
        if r > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Err(Error::Convergence {
        iterations: MAX_BISECTIONS,
        estimate: (0.5 * (a + b)).exp(),
    })
}

/// Condensation temperature for any model, or `None` when the model has no
/// finite-temperature condensate in one dimension.
pub fn critical_temperature(kind: HoppingKind, t: f64, n: f64) -> Result<Option<TcResult>> {
    match kind {
        HoppingKind::InfiniteRange => tc_infinite_range(t, n).map(Some),
        HoppingKind::PowerLaw { gamma } if gamma < 2.0 => {
            tc_long_range(gamma, t, n, DEFAULT_TC_TOL).map(Some)
        }
        HoppingKind::PowerLaw { .. } | HoppingKind::NearestNeighbor => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain(format!(
                    "hopping energy must be positive, got {t}"
                )));
            }
            check_density(n)?;
            Ok(None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::LN_2;

    #[test]
    fn occupation_values() {
        let beta = 0.7;
        let mu = -1.0 - LN_2 / beta;
        assert_relative_eq!(
            occupation(-1.0, beta, mu).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            occupation(0.0, LN_2, -1.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        let tiny = occupation(1000.0, 1.0, 0.0).unwrap();
        assert!(tiny.is_finite() && (0.0..1e-300).contains(&tiny));
        let deep = occupation(701.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(deep, (-701.0f64).exp(), max_relative = 1e-14);
        assert!(occupation(0.0, 1.0, 0.0).is_err());
        assert!(occupation(0.0, 1.0, 1.0).is_err());
        assert!(occupation(0.0, -1.0, -1.0).is_err());
    }

    #[test]
    fn delta_mu_values() {
        assert_relative_eq!(delta_mu(1.0, 1.0).unwrap(), -LN_2, max_relative = 1e-15);
        let oracle = -(1.0 / LN_2) * (1.0 + 1.0 / 141.42f64).ln();
        assert_relative_eq!(
            delta_mu(1.0 / LN_2, 141.42).unwrap(),
            oracle,
            max_relative = 1e-12
        );
        assert!((oracle + 0.0101656).abs() < 1e-6);
        let far = delta_mu(1.0, 1e15).unwrap();
        assert!(far < 0.0 && far > -1e-14);
        assert!(delta_mu(1.0, 0.0).is_err());
    }

    #[test]
    fn tc_closed_form() {
        let r = tc_infinite_range(1.0, 1.0).unwrap();
        assert_eq!(r.method, TcMethod::ClosedForm);
        assert!((r.tc - 1.0 / LN_2).abs() < 1e-12);
        assert_relative_eq!(
            tc_infinite_range(2.0, 1.0).unwrap().tc,
            2.0 / LN_2,
            max_relative = 1e-15
        );
        let big = tc_infinite_range(1.0, 1e8).unwrap().tc;
        assert_relative_eq!(big, 1e8, max_relative = 1e-7);
        assert!(tc_infinite_range(0.0, 1.0).is_err());
        assert!(tc_infinite_range(1.0, 0.0).is_err());
    }

    #[test]
    fn solve_mu_hits_target() {
        let models = [
            HoppingModel::nearest_neighbor(1.0, 64).unwrap(),
            HoppingModel::infinite_range(1.0, 100).unwrap(),
            HoppingModel::power_law(1.7, 1.0, 128).unwrap(),
        ];
        for model in models {
            for beta in [0.05, 0.5, 5.0] {
                let s = solve_mu(&model, beta, 1.0, DEFAULT_MU_TOL).unwrap();
                assert!((s.density() - 1.0).abs() <= 1e-12);
                assert!(s.mu() < s.table().min_energy());
                for (e, n) in s.table().eps.iter().zip(s.occupations()) {
                    let oracle = 1.0 / (beta * (e - s.table().min_energy() + s.gap())).exp_m1();
                    assert_relative_eq!(*n, oracle, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn high_temperature_infinite_range_mu() {
        // L large, T = 2 > T_C: mu -> -T ln 2
        let model = HoppingModel::infinite_range(1.0, 1 << 20).unwrap();
        let s = solve_mu(&model, 0.5, 1.0, DEFAULT_MU_TOL).unwrap();
        assert!((s.mu() + 2.0 * LN_2).abs() < 1e-5, "mu = {}", s.mu());
    }

    #[test]
    fn condensate_at_tc_matches_quadratic_root() {
        // At T_C with n = 1 the particle balance reduces to N0^2 + N0 - 2L = 0.
        let l = 10_000usize;
        let model = HoppingModel::infinite_range(1.0, l).unwrap();
        let s = solve_mu(&model, LN_2, 1.0, DEFAULT_MU_TOL).unwrap();
        let root = ((1.0 + 8.0 * l as f64).sqrt() - 1.0) / 2.0;
        assert_relative_eq!(s.condensate(), root, max_relative = 1e-9);
        let closed = (l as f64).sqrt() * (2.0 + 0.25 / l as f64).sqrt();
        assert!((s.condensate() / closed - 1.0).abs() < 0.005);
    }

    #[test]
    fn dilute_limit_pushes_mu_down() {
        let model = HoppingModel::nearest_neighbor(1.0, 32).unwrap();
        let mut last = f64::INFINITY;
        for n in [1.0, 1e-2, 1e-4, 1e-8] {
            let s = solve_mu(&model, 1.0, n, DEFAULT_MU_TOL).unwrap();
            assert!(s.mu() < last);
            assert!((s.density() / n - 1.0).abs() <= 1e-12);
            last = s.mu();
        }
    }

    #[test]
    fn thermal_entropy_values() {
        let model = HoppingModel::infinite_range(1.0, 512).unwrap();
        let s = solve_mu(&model, 0.5, 1.0, DEFAULT_MU_TOL).unwrap();
        let f = |g: f64| (1.0 + g) * (1.0 + g).ln() - g * g.ln();
        let (n0, nk) = (s.condensate(), s.occupations()[1]);
        let oracle = f(n0) + 511.0 * f(nk);
        assert_relative_eq!(thermal_entropy(&s), oracle, max_relative = 1e-12);
    }

    #[test]
    fn long_range_beta_c() {
        let r = tc_long_range(1.7, 1.0, 1.0, DEFAULT_TC_TOL).unwrap();
        assert_eq!(r.method, TcMethod::Quadrature);
        assert!(
            (r.beta_c / 0.297 - 1.0).abs() < 0.01,
            "beta_c = {}",
            r.beta_c
        );
        assert!(tc_long_range(2.0, 1.0, 1.0, DEFAULT_TC_TOL).is_err());
        assert!(tc_long_range(1.0, 1.0, 1.0, DEFAULT_TC_TOL).is_err());
    }

    #[test]
    fn critical_temperature_dispatch() {
        assert!(critical_temperature(HoppingKind::NearestNeighbor, 1.0, 1.0)
            .unwrap()
            .is_none());
        assert!(
            critical_temperature(HoppingKind::PowerLaw { gamma: 2.5 }, 1.0, 1.0)
                .unwrap()
                .is_none()
        );
        let inf = critical_temperature(HoppingKind::InfiniteRange, 1.0, 1.0)
            .unwrap()
            .unwrap();
        assert_eq!(inf.method, TcMethod::ClosedForm);
    }
}
