//! Pseudo-spectral simulation of the fractional Stokes-transport system
//!
//! ```text
//! ∂_t ρ + div(ρ u) = 0,     u = (−Δ)^{−α/2} P(ρ e_d)
//! ```
//!
//! on the periodic torus `[0, 2π)^d`, together with the Littlewood-Paley
//! machinery (dyadic blocks, Besov and log-Lipschitz norms, Bony
//! paraproducts) used to monitor regularity, continuation integrals and
//! blow-up proxies along a run.
//!
//! Module map:
//! - [`spectral`]: grid, fields, transforms and Fourier multipliers.
//! - [`littlewood_paley`]: dyadic filter bank and norms.
//! - [`velocity`]: the density-to-velocity law and its splittings.
//! - [`transport`]: RK4 time stepping and the run driver.
//! - [`diagnostics`]: per-sample norms, criterion integrals and the proxy.
//! - [`harness`]: configuration files, initial data presets and scans.

pub mod diagnostics;
mod error;
pub mod harness;
pub mod littlewood_paley;
pub mod numerics;
pub mod spectral;
pub mod transport;
pub mod velocity;

pub use error::{Error, Result};
