//! Discrete Littlewood-Paley decomposition on the torus lattice.
//!
//! The low-pass symbol `χ` equals 1 on `|k| ≤ 1`, vanishes on `|k| ≥ 2`
//! and ramps smoothly in between. Blocks are
//!
//! ```text
//! Δ_{−1} = χ(D),   Δ_j = φ(2^{−j} D),   φ(ξ) = χ(ξ/2) − χ(ξ),
//! ```
//!
//! so that `S_j = Σ_{i ≤ j−1} Δ_i = χ(2^{−j} D)` and `φ_j` lives on the
//! annulus `2^j ≤ |k| ≤ 2^{j+2}`. The block range stops at
//! `j_max = ⌈log₂(n/2)⌉`; the top block is defined as one minus all the
//! others, so the blocks sum to the identity on every represented mode.
//!
//! On zero-mean fields the homogeneous blocks `Δ̇_j` coincide with the
//! inhomogeneous ones for `j ≥ −1` (lower dyadic shells contain no lattice
//! points), so homogeneous norms differ only in the zero-mean requirement
//! and the subcriticality check.

use crate::numerics::pairwise_sum;
use crate::spectral::{
    dealias, derivative_spectral, forward_transform, forward_unchecked, inverse_transform,
    norm_sq, Grid, RealField, SpectralField,
};
use crate::{Error, Result};

/// Smooth radial cutoff: 1 on `[0, 1]`, `exp(1 − 1/(1 − t²))` with
/// `t = r − 1` on `(1, 2)`, 0 beyond.
pub fn chi(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let t = r - 1.0;
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Besov exponents `(s, p, r)`; `p` and `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Self {
        Self {
            s,
            p,
            r,
            homogeneous: false,
        }
    }

    pub fn homogeneous(s: f64, p: f64, r: f64) -> Self {
        Self {
            homogeneous: true,
            ..Self::new(s, p, r)
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidBesov(format!("s = {} is not finite", self.s)));
        }
        for (name, v) in [("p", self.p), ("r", self.r)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidBesov(format!("{name} = {v} must lie in [1, ∞]")));
            }
        }
        if self.homogeneous {
            let critical = dim as f64 / self.p;
            let ok = self.s < critical || (self.s == critical && self.r == 1.0);
            if !ok {
                return Err(Error::InvalidBesov(format!(
                    "homogeneous space needs s < d/p, or s = d/p with r = 1 (s = {}, d/p = {critical}, r = {})",
                    self.s, self.r
                )));
            }
        }
        Ok(())
    }

    /// Column label `besov:{s}_{p}_{r}`.
    pub fn label(&self) -> String {
        format!(
            "besov:{}_{}_{}",
            self.s,
            exponent_label(self.p),
            exponent_label(self.r)
        )
    }
}

pub fn exponent_label(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

/// `ℓ^r` norm of a nonnegative sequence.
fn lr_aggregate(terms: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        terms.iter().fold(0.0, |m, &t| m.max(t))
    } else if r == 1.0 {
        pairwise_sum(terms)
    } else {
        let powered: Vec<f64> = terms.iter().map(|t| t.powf(r)).collect();
        pairwise_sum(&powered).powf(1.0 / r)
    }
}

/// Pointwise Euclidean length of a vector field, maximized over the grid.
pub fn vector_linf(components: &[RealField]) -> f64 {
    let len = components[0].values().len();
    (0..len)
        .map(|i| {
            components
                .iter()
                .map(|c| c.values()[i] * c.values()[i])
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// The three pieces of `uv = T_u(v) + T_v(u) + R(u, v)`.
#[derive(Debug, Clone)]
pub struct BonyParts {
    pub t_uv: RealField,
    pub t_vu: RealField,
    pub remainder: RealField,
}

/// Precomputed block symbols on one grid. Immutable after construction.
#[derive(Debug, Clone)]
pub struct DyadicFilterBank {
    grid: Grid,
    j_max: i32,
    /// `blocks[j + 1]` holds the symbol of `Δ_j`, `j = −1 … j_max`.
    blocks: Vec<Vec<f64>>,
}

impl DyadicFilterBank {
    pub fn new(grid: Grid) -> Self {
        let j_max = (grid.n() / 2).next_power_of_two().trailing_zeros() as i32;
        let radius: Vec<f64> = (0..grid.len())
            .map(|flat| norm_sq(&grid.wavevector(flat)).sqrt())
            .collect();
        let mut blocks = Vec::with_capacity(j_max as usize + 2);
        blocks.push(radius.iter().map(|&r| chi(r)).collect::<Vec<_>>());
        for j in 0..j_max {
            let lo = 0.5f64.powi(j);
            let hi = 0.5 * lo;
            blocks.push(
                radius
                    .iter()
                    .map(|&r| chi(hi * r) - chi(lo * r))
                    .collect::<Vec<_>>(),
            );
        }
        let top: Vec<f64> = (0..grid.len())
            .map(|i| 1.0 - blocks.iter().map(|b| b[i]).sum::<f64>())
            .collect();
        blocks.push(top);
        Self {
            grid,
            j_max,
            blocks,
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Block indices `−1 ..= j_max`.
    pub fn block_range(&self) -> std::ops::RangeInclusive<i32> {
        -1..=self.j_max
    }

    pub fn block_symbol(&self, j: i32) -> Result<&[f64]> {
        if !self.block_range().contains(&j) {
            return Err(Error::BlockOutOfRange {
                j,
                j_max: self.j_max,
            });
        }
        Ok(&self.blocks[(j + 1) as usize])
    }

    /// Symbol of `S_j = Σ_{i ≤ j−1} Δ_i`: zero for `j ≤ −1`, identity for
    /// `j > j_max`.
    pub fn low_pass_symbol(&self, j: i32) -> Vec<f64> {
        let mut acc = vec![0.0; self.grid.len()];
        for i in -1..j.min(self.j_max + 1) {
            for (a, b) in acc.iter_mut().zip(&self.blocks[(i + 1) as usize]) {
                *a += b;
            }
        }
        acc
    }

    /// `T_N = Σ_{j=−N}^{N} Δ̇_j` on the lattice: the blocks up to `N`
    /// with the mean mode removed.
    pub fn bandpass_symbol(&self, n_blocks: usize) -> Vec<f64> {
        let top = (n_blocks as i32).min(self.j_max);
        let mut sym = self.low_pass_symbol(top + 1);
        sym[0] = 0.0;
        sym
    }

    fn check_grid(&self, f: &RealField) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "filter bank built for {:?}, field on {:?}",
                self.grid,
                f.grid()
            )));
        }
        Ok(())
    }

    pub fn dyadic_block(&self, j: i32, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let sym = self.block_symbol(j)?;
        Ok(inverse_transform(&forward_transform(f)?.scaled_by(sym)))
    }

    /// All blocks `Δ_{−1} f … Δ_{j_max} f`.
    pub fn blocks(&self, f: &RealField) -> Result<Vec<RealField>> {
        self.check_grid(f)?;
        Ok(self.blocks_of_spectrum(&forward_transform(f)?))
    }

    pub fn blocks_of_spectrum(&self, hat: &SpectralField) -> Vec<RealField> {
        self.blocks
            .iter()
            .map(|sym| inverse_transform(&hat.scaled_by(sym)))
            .collect()
    }

    pub fn partial_sum(&self, j: i32, f: &RealField) -> Result<RealField> {
        self.check_grid(f)?;
        let hat = forward_transform(f)?;
        Ok(inverse_transform(&hat.scaled_by(&self.low_pass_symbol(j))))
    }

    /// `‖(2^{js} ‖Δ_j f‖_{L^p})_j‖_{ℓ^r}` over `j = −1 … j_max`.
    pub fn besov_norm(&self, params: &BesovParams, f: &RealField) -> Result<f64> {
        self.check_grid(f)?;
        params.validate(self.grid.dim())?;
        if params.homogeneous {
            let mean = f.mean();
            if mean.abs() > 1e-12 * f.linf().max(1.0) {
                return Err(Error::NonZeroMean(mean));
            }
        }
        Ok(self.besov_from_blocks(params, &self.blocks(f)?))
    }

    /// Besov aggregation of precomputed blocks (no validation).
    pub fn besov_from_blocks(&self, params: &BesovParams, blocks: &[RealField]) -> f64 {
        let terms: Vec<f64> = blocks
            .iter()
            .enumerate()
            .map(|(i, b)| 2f64.powf(params.s * (i as f64 - 1.0)) * b.lp_norm(params.p))
            .collect();
        lr_aggregate(&terms, params.r)
    }

    /// `‖f‖_{L^∞} + sup_{j ≥ −1} ‖∇S_j f‖_{L^∞} / (j + 2)^α`.
    pub fn log_lipschitz_norm(&self, alpha_ll: f64, f: &RealField) -> Result<f64> {
        self.check_grid(f)?;
        let hat = forward_transform(f)?;
        let dim = self.grid.dim();
        let mut sup = 0.0f64;
        // S_{−1} = 0; S_j is the identity past j_max + 1 and the
        // denominators only grow, so the supremum is attained in range.
        for j in 0..=self.j_max + 1 {
            let low = hat.scaled_by(&self.low_pass_symbol(j));
            let grad: Vec<RealField> = (0..dim)
                .map(|axis| inverse_transform(&derivative_spectral(&low, axis)))
                .collect();
            sup = sup.max(vector_linf(&grad) / f64::from(j + 2).powf(alpha_ll));
        }
        Ok(f.linf() + sup)
    }

    /// Bony decomposition of the product of the 2/3-truncated `u` and `v`;
    /// each piece is truncated again, so the pieces sum to the dealiased
    /// product.
    pub fn bony_decompose(&self, u: &RealField, v: &RealField) -> Result<BonyParts> {
        self.check_grid(u)?;
        self.check_grid(v)?;
        let clean = |f: &RealField| inverse_transform(&dealias(&forward_unchecked(f)));
        let bu = self.blocks(&clean(u))?;
        let bv = self.blocks(&clean(v))?;
        let nb = bu.len();
        // low[i] = S_{j−1} for block index i = j + 1, i.e. Σ_{m < i−1} blocks[m]
        let prefix = |b: &[RealField]| -> Vec<RealField> {
            let mut out = Vec::with_capacity(nb);
            let mut acc = RealField::zeros(self.grid);
            for i in 0..nb {
                out.push(acc.clone());
                if i >= 1 {
                    acc = acc.add(&b[i - 1]);
                }
            }
            out
        };
        let (low_u, low_v) = (prefix(&bu), prefix(&bv));
        let mut t_uv = RealField::zeros(self.grid);
        let mut t_vu = RealField::zeros(self.grid);
        let mut rem = RealField::zeros(self.grid);
        for i in 0..nb {
            t_uv = t_uv.add(&low_u[i].mul(&bv[i]));
            t_vu = t_vu.add(&low_v[i].mul(&bu[i]));
            for i2 in i.saturating_sub(1)..(i + 2).min(nb) {
                rem = rem.add(&bu[i].mul(&bv[i2]));
            }
        }
        Ok(BonyParts {
            t_uv: clean(&t_uv),
            t_vu: clean(&t_vu),
            remainder: clean(&rem),
        })
    }
}
