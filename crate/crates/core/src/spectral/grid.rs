use std::f64::consts::PI;

use crate::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Integer wavevector; components past the grid dimension are zero.
pub type Wavevector = [i64; MAX_DIM];

/// Uniform periodic grid on `[0, 2π)^d` with `n` points per axis.
///
/// With period `2π` every Fourier mode has an integer wavevector, so
/// multiplier symbols are evaluated exactly on the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Self { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of grid points `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Quadrature weight `h^d` of a single cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Volume `(2π)^d` of the torus.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Largest retained wavenumber component under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Multi-index of a row-major flat index (last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize; MAX_DIM]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Signed wavenumber of FFT index `i`, in `{−n/2, …, n/2 − 1}`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavevector(&self, flat: usize) -> Wavevector {
        let idx = self.unravel(flat);
        let mut k = [0; MAX_DIM];
        for axis in 0..self.dim {
            k[axis] = self.wavenumber(idx[axis]);
        }
        k
    }

    /// Flat index holding wavevector `k` (components taken modulo `n`).
    pub fn index_of(&self, k: &Wavevector) -> usize {
        let mut idx = [0; MAX_DIM];
        for axis in 0..self.dim {
            idx[axis] = k[axis].rem_euclid(self.n as i64) as usize;
        }
        self.ravel(&idx)
    }

    pub fn coordinates(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unravel(flat);
        let h = self.spacing();
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * h;
        }
        x
    }
}

pub fn norm_sq(k: &Wavevector) -> f64 {
    k.iter().map(|&c| (c * c) as f64).sum()
}
