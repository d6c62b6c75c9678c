use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::fft::{forward_transform, forward_unchecked, inverse_transform};
use super::field::{RealField, SpectralField};
use super::grid::{norm_sq, Wavevector};
use crate::{Error, Result};

/// What a multiplier does to the `k = 0` coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroModeRule {
    Zero,
    Identity,
    Value(Complex64),
}

impl ZeroModeRule {
    pub fn value(self) -> Complex64 {
        match self {
            ZeroModeRule::Zero => Complex64::new(0.0, 0.0),
            ZeroModeRule::Identity => Complex64::new(1.0, 0.0),
            ZeroModeRule::Value(v) => v,
        }
    }
}

type Symbol = dyn Fn(&Wavevector) -> Complex64 + Send + Sync;

/// A scalar Fourier multiplier: a symbol on the nonzero lattice plus an
/// explicit rule for the mean mode.
#[derive(Clone)]
pub struct MultiplierSpec {
    symbol: Arc<Symbol>,
    zero_mode: ZeroModeRule,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSpec")
            .field("zero_mode", &self.zero_mode)
            .finish_non_exhaustive()
    }
}

impl MultiplierSpec {
    pub fn new(
        symbol: impl Fn(&Wavevector) -> Complex64 + Send + Sync + 'static,
        zero_mode: ZeroModeRule,
    ) -> Self {
        Self {
            symbol: Arc::new(symbol),
            zero_mode,
        }
    }

    /// `(−Δ)^{s/2}`, symbol `|k|^s`. Negative orders drop the mean; for
    /// `s > 0` the mean is annihilated since `|0|^s = 0`.
    pub fn fractional_laplacian(s: f64) -> Self {
        let zero_mode = if s == 0.0 {
            ZeroModeRule::Identity
        } else {
            ZeroModeRule::Zero
        };
        Self::new(
            move |k| Complex64::new(norm_sq(k).powf(0.5 * s), 0.0),
            zero_mode,
        )
    }

    /// `∂_axis`, symbol `i k_axis`.
    pub fn derivative(axis: usize) -> Self {
        Self::new(
            move |k| Complex64::new(0.0, k[axis] as f64),
            ZeroModeRule::Zero,
        )
    }

    /// Entry `(i, j)` of the Leray projector, `δ_ij − k_i k_j / |k|²`.
    pub fn leray_entry(i: usize, j: usize) -> Self {
        let delta = if i == j { 1.0 } else { 0.0 };
        let zero_mode = if i == j {
            ZeroModeRule::Identity
        } else {
            ZeroModeRule::Zero
        };
        Self::new(
            move |k| Complex64::new(delta - (k[i] * k[j]) as f64 / norm_sq(k), 0.0),
            zero_mode,
        )
    }

    /// The multiplier whose symbol is the product of both symbols.
    pub fn compose(&self, other: &MultiplierSpec) -> MultiplierSpec {
        let a = Arc::clone(&self.symbol);
        let b = Arc::clone(&other.symbol);
        MultiplierSpec {
            symbol: Arc::new(move |k| a(k) * b(k)),
            zero_mode: ZeroModeRule::Value(self.zero_mode.value() * other.zero_mode.value()),
        }
    }

    pub fn zero_mode(&self) -> ZeroModeRule {
        self.zero_mode
    }

    /// Symbol value at `k`, consulting the zero-mode rule at the origin.
    pub fn at(&self, k: &Wavevector) -> Complex64 {
        if k.iter().all(|&c| c == 0) {
            self.zero_mode.value()
        } else {
            (self.symbol)(k)
        }
    }
}

pub fn apply_multiplier(spec: &MultiplierSpec, f: &SpectralField) -> Result<SpectralField> {
    let grid = f.grid();
    let mut out = f.clone();
    for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
        let k = grid.wavevector(flat);
        let s = spec.at(&k);
        if !(s.re.is_finite() && s.im.is_finite()) {
            return Err(Error::NonFiniteSymbol {
                k: k[..grid.dim()].to_vec(),
            });
        }
        *c *= s;
    }
    Ok(out)
}

/// Applies `spec` to real data and synthesizes the real result.
pub fn apply_to_real(spec: &MultiplierSpec, f: &RealField) -> Result<RealField> {
    let hat = forward_transform(f)?;
    Ok(inverse_transform(&apply_multiplier(spec, &hat)?))
}

/// `(−Δ)^{s/2} f`. Orders outside `[−d, d]` are evaluated but logged.
pub fn fractional_laplacian(f: &RealField, s: f64) -> Result<RealField> {
    let d = f.grid().dim() as f64;
    if !(-d..=d).contains(&s) {
        log::warn!("fractional Laplacian order {s} outside the working range [-{d}, {d}]");
    }
    apply_to_real(&MultiplierSpec::fractional_laplacian(s), f)
}

/// Spectral `∂_axis f`.
///
/// # Panics
/// If `axis` is not below the grid dimension.
pub fn partial_derivative(f: &RealField, axis: usize) -> RealField {
    assert!(axis < f.grid().dim(), "axis {axis} out of range");
    let hat = forward_unchecked(f);
    inverse_transform(&derivative_spectral(&hat, axis))
}

pub(crate) fn derivative_spectral(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid();
    let stride = grid.n().pow((grid.dim() - 1 - axis) as u32);
    let mut out = f.clone();
    // the index along `axis` is constant on runs of `stride` coefficients
    for (run_idx, run) in out.coeffs_mut().chunks_mut(stride).enumerate() {
        let k = grid.wavenumber(run_idx % grid.n()) as f64;
        for c in run {
            *c = Complex64::new(-k * c.im, k * c.re);
        }
    }
    out
}

/// Spectral gradient of a real field, one component per axis.
pub fn gradient(f: &RealField) -> Result<Vec<RealField>> {
    let hat = forward_transform(f)?;
    Ok((0..f.grid().dim())
        .map(|axis| inverse_transform(&derivative_spectral(&hat, axis)))
        .collect())
}

/// Spectral divergence `Σ_i ∂_i u_i`.
pub fn divergence(u: &[RealField]) -> Result<RealField> {
    let grid = check_vector(u)?;
    let mut acc = SpectralField::zeros(grid);
    for (axis, comp) in u.iter().enumerate() {
        acc = acc.add(&derivative_spectral(&forward_transform(comp)?, axis));
    }
    Ok(inverse_transform(&acc))
}

fn check_vector(u: &[RealField]) -> Result<super::grid::Grid> {
    let first = u
        .first()
        .ok_or_else(|| Error::GridMismatch("empty vector field".into()))?;
    let grid = first.grid();
    if u.len() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "vector field has {} components on a {}-dimensional grid",
            u.len(),
            grid.dim()
        )));
    }
    for comp in u {
        first.ensure_same_grid(comp)?;
    }
    Ok(grid)
}

/// Leray projection of spectral components: `û − k (k·û)/|k|²`, mean
/// passed through.
fn leray_spectral(u: &mut [SpectralField]) {
    let grid = u[0].grid();
    let dim = grid.dim();
    for flat in 0..grid.len() {
        let k = grid.wavevector(flat);
        let k2 = norm_sq(&k);
        if k2 == 0.0 {
            continue;
        }
        let mut dot = Complex64::new(0.0, 0.0);
        for (axis, comp) in u.iter().enumerate() {
            dot += comp.coeffs()[flat] * k[axis] as f64;
        }
        let dot = dot / k2;
        for (axis, comp) in u.iter_mut().enumerate().take(dim) {
            comp.coeffs_mut()[flat] -= dot * k[axis] as f64;
        }
    }
}

/// Projection onto divergence-free fields.
pub fn leray_project(u: &[RealField]) -> Result<Vec<RealField>> {
    check_vector(u)?;
    let mut hats = u
        .iter()
        .map(forward_transform)
        .collect::<Result<Vec<_>>>()?;
    leray_spectral(&mut hats);
    Ok(hats.iter().map(inverse_transform).collect())
}

/// 2/3-rule truncation: zero every mode with some `|k_i| > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let (n, cut) = (grid.n(), grid.dealias_cutoff());
    let mut out = f.clone();
    for axis in 0..grid.dim() {
        let stride = n.pow((grid.dim() - 1 - axis) as u32);
        for (run_idx, run) in out.coeffs_mut().chunks_mut(stride).enumerate() {
            if grid.wavenumber(run_idx % n).abs() > cut {
                run.fill(Complex64::new(0.0, 0.0));
            }
        }
    }
    out
}

/// Dealiased product: both factors truncated, multiplied on the grid, and
/// the product truncated again. Exact on the retained modes.
pub fn dealiased_product(a: &RealField, b: &RealField) -> Result<RealField> {
    a.ensure_same_grid(b)?;
    let ta = inverse_transform(&dealias(&forward_transform(a)?));
    let tb = inverse_transform(&dealias(&forward_transform(b)?));
    Ok(inverse_transform(&dealias(&forward_unchecked(&ta.mul(&tb)))))
}
