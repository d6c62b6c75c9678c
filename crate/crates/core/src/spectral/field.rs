use num_complex::Complex64;

use super::grid::{Grid, Wavevector, MAX_DIM};
use crate::numerics::{pairwise_sum, pairwise_sum_by};
use crate::{Error, Result};

/// Real samples on a periodic grid, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` at every grid point; `x` holds coordinates in `[0, 2π)`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64; MAX_DIM]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|flat| f(&grid.coordinates(flat)))
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// First non-finite sample, reported by multi-index.
    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(flat) => Err(Error::NonFiniteSample {
                index: self.grid.unravel(flat)[..self.grid.dim()].to_vec(),
                value: self.values[flat],
            }),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Rectangle-rule `L^p` norm over the torus; `p = ∞` gives the grid max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.linf();
        }
        let w = self.grid.cell_volume();
        if p == 2.0 {
            return (w * pairwise_sum_by(&self.values, &|v| v * v)).sqrt();
        }
        (w * pairwise_sum_by(&self.values, &|v| v.abs().powf(p))).powf(1.0 / p)
    }

    pub fn l2(&self) -> f64 {
        self.lp_norm(2.0)
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Quadrature inner product `∫ f g`.
    pub fn inner(&self, other: &RealField) -> f64 {
        let prod: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        self.grid.cell_volume() * pairwise_sum(&prod)
    }

    pub fn max_abs_diff(&self, other: &RealField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn ensure_same_grid(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        debug_assert_eq!(self.grid, other.grid);
        RealField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &RealField) -> RealField {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RealField) -> RealField {
        self.zip_map(other, |a, b| a - b)
    }

    /// Raw pointwise product (no dealiasing).
    pub fn mul(&self, other: &RealField) -> RealField {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> RealField {
        self.map(|v| c * v)
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: f64, other: &RealField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += c * b;
        }
    }
}

/// Fourier coefficients `f̂(k) = n^{−d} Σ_x f(x) e^{−ik·x}`, stored in FFT
/// order on the same row-major layout as [`RealField`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: &Wavevector) -> Complex64 {
        self.coeffs[self.grid.index_of(k)]
    }

    pub fn set_coeff(&mut self, k: &Wavevector, value: Complex64) {
        let idx = self.grid.index_of(k);
        self.coeffs[idx] = value;
    }

    /// Parseval-weighted norm `((2π)^d Σ |f̂(k)|²)^{1/2}`, equal to the
    /// quadrature `L²` norm of the synthesized field.
    pub fn weighted_l2(&self) -> f64 {
        (self.grid.volume() * pairwise_sum_by(&self.coeffs, &|c| c.norm_sqr())).sqrt()
    }

    /// `max_k |f̂(−k) − conj f̂(k)|`; zero for coefficients of real data.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for flat in 0..self.coeffs.len() {
            let k = self.grid.wavevector(flat);
            let neg = [-k[0], -k[1], -k[2]];
            let d = (self.coeff(&neg) - self.coeffs[flat].conj()).norm();
            worst = worst.max(d);
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn ensure_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Pointwise multiplication by a real lattice symbol in storage order.
    pub fn scaled_by(&self, symbol: &[f64]) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(symbol)
                .map(|(c, s)| c * s)
                .collect(),
        }
    }
}
