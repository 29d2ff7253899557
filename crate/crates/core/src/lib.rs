//! Entanglement entropy and mutual information of free, non-relativistic
//! Bose gases on one-dimensional rings.
//!
//! The crate is organised bottom-up:
//!
//! - [`special`]: Riemann zeta, gamma, the Bose-Einstein integral function
//!   `F(gamma, v) = sum_n e^{-n v} / n^gamma` and the polylogarithm `g_v(z)`.
//! - [`dispersion`]: hopping models (nearest-neighbour, infinite-range,
//!   power-law) and their single-particle spectra on a ring and in the
//!   thermodynamic limit.
//! - [`thermo`]: grand-canonical states at fixed density, thermal entropy and
//!   condensation temperatures.
//! - [`zero_temp`]: the Schmidt spectrum of the `N`-particle condensate and
//!   its Gaussian / Poisson asymptotics.
//! - [`correlation`]: truncated two-point functions, their spectra and the
//!   resulting subsystem entropies and mutual information.
//! - [`analysis`]: temperature / size sweeps and logarithmic scaling fits.
//!
//! Units: `k_B = 1`, energies and temperatures in units of the hopping `t`.
//! Mutual information follows the half-normalised convention
//! `E_M = (E_A + E_B - S) / 2`, which reduces to the entanglement entropy for
//! pure states.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod correlation;
pub mod dispersion;
mod error;
pub mod linalg;
pub mod numeric;
pub mod quadrature;
pub mod special;
pub mod thermo;
pub mod zero_temp;

pub use error::{Error, Result};
