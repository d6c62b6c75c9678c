//! The fractional Stokes law `u = (−Δ)^{−α/2} P(ρ e_d)` and the quantities
//! derived from it.
//!
//! Gravity points along the last axis. The mean of `ρ` never drives a
//! flow: every negative-order symbol vanishes at `k = 0`, which fixes the
//! otherwise undetermined constant in `u` (the "no mean flow" gauge).

use crate::littlewood_paley::DyadicFilterBank;
use crate::spectral::{
    dealias, derivative_spectral, forward_transform, forward_unchecked, inverse_transform,
    norm_sq, Grid, RealField, SpectralField,
};
use crate::{Error, Result};

/// Smoothing applied to the velocity law by the approximation schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    None,
    /// Spectral projector onto `|k| ≤ n_cut`.
    Friedrichs { n_cut: f64 },
    /// Keep the Littlewood-Paley blocks `−N … N` of the velocity.
    Bandpass { blocks: usize },
}

#[derive(Debug, Clone)]
pub struct StokesOperator {
    grid: Grid,
    alpha: f64,
    regularization: Regularization,
    /// Per-component real symbols `|k|^{−α}(δ_{i,d} − k_i k_d/|k|²)`,
    /// with any velocity-side regularization folded in.
    velocity_symbols: Vec<Vec<f64>>,
    /// Friedrichs projector `1_{|k| ≤ n_cut}`, if active.
    projector: Option<Vec<f64>>,
}

impl StokesOperator {
    pub fn new(grid: Grid, alpha: f64, regularization: Regularization) -> Result<Self> {
        let dim = grid.dim();
        if !(0.0..=dim as f64).contains(&alpha) {
            return Err(Error::AlphaOutOfRange { alpha, dim });
        }
        let last = dim - 1;
        let mut velocity_symbols = vec![vec![0.0; grid.len()]; dim];
        for flat in 1..grid.len() {
            let k = grid.wavevector(flat);
            let k2 = norm_sq(&k);
            let scale = k2.powf(-0.5 * alpha);
            for (i, sym) in velocity_symbols.iter_mut().enumerate() {
                let delta = if i == last { 1.0 } else { 0.0 };
                sym[flat] = scale * (delta - (k[i] * k[last]) as f64 / k2);
            }
        }
        let projector = match regularization {
            Regularization::Friedrichs { n_cut } => Some(
                (0..grid.len())
                    .map(|flat| {
                        if norm_sq(&grid.wavevector(flat)) <= n_cut * n_cut {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect::<Vec<_>>(),
            ),
            _ => None,
        };
        let filter = match regularization {
            Regularization::Friedrichs { .. } => projector.clone(),
            Regularization::Bandpass { blocks } => {
                Some(DyadicFilterBank::new(grid).bandpass_symbol(blocks))
            }
            Regularization::None => None,
        };
        if let Some(filter) = &filter {
            for sym in &mut velocity_symbols {
                for (s, f) in sym.iter_mut().zip(filter) {
                    *s *= f;
                }
            }
        }
        Ok(Self {
            grid,
            alpha,
            regularization,
            velocity_symbols,
            projector,
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    /// Applies the Friedrichs projector `A_n` when that scheme is active.
    pub fn project(&self, f: &SpectralField) -> SpectralField {
        match &self.projector {
            Some(p) => f.scaled_by(p),
            None => f.clone(),
        }
    }

    fn check_grid(&self, f: &RealField) -> Result<()> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "operator on {:?}, field on {:?}",
                self.grid,
                f.grid()
            )));
        }
        Ok(())
    }

    /// Velocity spectrum from a density spectrum.
    pub fn velocity_spectrum(&self, rho_hat: &SpectralField) -> Vec<SpectralField> {
        self.velocity_symbols
            .iter()
            .map(|sym| rho_hat.scaled_by(sym))
            .collect()
    }

    pub fn stokes_velocity(&self, rho: &RealField) -> Result<Vec<RealField>> {
        self.check_grid(rho)?;
        let hat = forward_transform(rho)?;
        Ok(self
            .velocity_spectrum(&hat)
            .iter()
            .map(inverse_transform)
            .collect())
    }

    /// `∇π = (Id − P)(ρ e_d)`, symbol `k_i k_d / |k|²`, zero mean.
    pub fn pressure_gradient(&self, rho: &RealField) -> Result<Vec<RealField>> {
        self.check_grid(rho)?;
        let hat = forward_transform(rho)?;
        let grid = self.grid;
        let last = grid.dim() - 1;
        Ok((0..grid.dim())
            .map(|i| {
                let mut out = hat.clone();
                for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
                    let k = grid.wavevector(flat);
                    let k2 = norm_sq(&k);
                    *c *= if k2 == 0.0 {
                        0.0
                    } else {
                        (k[i] * k[last]) as f64 / k2
                    };
                }
                inverse_transform(&out)
            })
            .collect())
    }

    /// Spectrum of `div(ρu)` with both factors and the product truncated by
    /// the 2/3 rule, together with the velocity of the truncated density.
    pub(crate) fn flux_divergence(&self, rho_hat: &SpectralField) -> (SpectralField, Vec<RealField>) {
        let trunc = dealias(rho_hat);
        let rho = inverse_transform(&trunc);
        let u: Vec<RealField> = self
            .velocity_spectrum(&trunc)
            .iter()
            .map(inverse_transform)
            .collect();
        let mut acc = SpectralField::zeros(self.grid);
        for (axis, comp) in u.iter().enumerate() {
            let flux = forward_unchecked(&rho.mul(comp));
            acc = acc.add(&derivative_spectral(&flux, axis));
        }
        (dealias(&acc), u)
    }

    /// `div(ρ u(ρ))`, dealiased divergence form.
    pub fn advection_term(&self, rho: &RealField) -> Result<RealField> {
        self.check_grid(rho)?;
        let (div, _) = self.flux_divergence(&forward_transform(rho)?);
        Ok(inverse_transform(&div))
    }

    /// `u·∇ρ` evaluated in gradient form, with the same truncation.
    pub fn advection_gradient_form(&self, rho: &RealField) -> Result<RealField> {
        self.check_grid(rho)?;
        let trunc = dealias(&forward_transform(rho)?);
        let u = self.velocity_spectrum(&trunc);
        let mut acc = RealField::zeros(self.grid);
        for (axis, comp) in u.iter().enumerate() {
            let grad = inverse_transform(&derivative_spectral(&trunc, axis));
            acc = acc.add(&inverse_transform(comp).mul(&grad));
        }
        Ok(inverse_transform(&dealias(&forward_unchecked(&acc))))
    }

    /// `u·∇ρ = (−Δ)^{−α/2}ρ ∂_dρ + ∇ρ·∇(−Δ)^{−1−α/2}∂_dρ`, each term
    /// dealiased.
    pub fn structure_split(&self, rho: &RealField) -> Result<(RealField, RealField)> {
        self.check_grid(rho)?;
        let grid = self.grid;
        let dim = grid.dim();
        let last = dim - 1;
        let trunc = dealias(&forward_transform(rho)?);
        let filter = self.velocity_filter();
        let frac = |order: f64, f: &SpectralField| -> SpectralField {
            let mut out = f.clone();
            for (flat, c) in out.coeffs_mut().iter_mut().enumerate() {
                let k2 = norm_sq(&grid.wavevector(flat));
                *c *= if k2 == 0.0 { 0.0 } else { k2.powf(0.5 * order) };
            }
            match &filter {
                Some(fl) => out.scaled_by(fl),
                None => out,
            }
        };
        let dd_rho = derivative_spectral(&trunc, last);
        let term1 = inverse_transform(&frac(-self.alpha, &trunc)).mul(&inverse_transform(&dd_rho));
        let potential = frac(-2.0 - self.alpha, &dd_rho);
        let mut term2 = RealField::zeros(grid);
        for axis in 0..dim {
            let a = inverse_transform(&derivative_spectral(&trunc, axis));
            let b = inverse_transform(&derivative_spectral(&potential, axis));
            term2 = term2.add(&a.mul(&b));
        }
        let clean = |f: &RealField| inverse_transform(&dealias(&forward_unchecked(f)));
        Ok((clean(&term1), clean(&term2)))
    }

    /// Scalar smoothing applied on the velocity side, if any.
    fn velocity_filter(&self) -> Option<Vec<f64>> {
        match self.regularization {
            Regularization::None => None,
            Regularization::Friedrichs { .. } => self.projector.clone(),
            Regularization::Bandpass { blocks } => {
                Some(DyadicFilterBank::new(self.grid).bandpass_symbol(blocks))
            }
        }
    }
}

/// A stratified profile `R(x_d)` with its spectral derivative `∂_d R`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    r: RealField,
    dr: RealField,
}

impl EquilibriumProfile {
    pub fn new(r: RealField) -> Result<Self> {
        let grid = r.grid();
        let n = grid.n();
        let stride_rows = grid.len() / n;
        let values = r.values();
        // row-major with x_d fastest: every row of length n must repeat the first
        let mut deviation = 0.0f64;
        for row in 1..stride_rows {
            for i in 0..n {
                deviation = deviation.max((values[row * n + i] - values[i]).abs());
            }
        }
        if deviation > 1e-12 {
            return Err(Error::NotStratified(deviation));
        }
        let hat = forward_transform(&r)?;
        let dr = inverse_transform(&derivative_spectral(&hat, grid.dim() - 1));
        Ok(Self { r, dr })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let last = grid.dim() - 1;
        Self::new(RealField::from_fn(grid, |x| f(x[last])))
    }

    pub fn profile(&self) -> &RealField {
        &self.r
    }

    pub fn derivative(&self) -> &RealField {
        &self.dr
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::presets::band_limited_noise;
    use crate::littlewood_paley::BesovParams;
    use crate::spectral::{divergence, fractional_laplacian, leray_project};

    fn grid() -> Grid {
        Grid::new(2, 32).unwrap()
    }

    fn op(alpha: f64) -> StokesOperator {
        StokesOperator::new(grid(), alpha, Regularization::None).unwrap()
    }

    #[test]
    fn alpha_range_is_enforced() {
        assert!(StokesOperator::new(grid(), -0.1, Regularization::None).is_err());
        assert!(StokesOperator::new(grid(), 2.5, Regularization::None).is_err());
        assert!(StokesOperator::new(grid(), 2.0, Regularization::None).is_ok());
        let g3 = Grid::new(3, 8).unwrap();
        assert!(StokesOperator::new(g3, 2.5, Regularization::None).is_ok());
    }

    #[test]
    fn stratified_density_drives_no_flow() {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let rho = RealField::from_fn(grid(), |x| x[1].sin());
            let u = op(alpha).stokes_velocity(&rho).unwrap();
            assert!(u.iter().all(|c| c.linf() == 0.0));
        }
    }

    #[test]
    fn shear_density_is_its_own_velocity() {
        let rho = RealField::from_fn(grid(), |x| x[0].sin());
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let u = op(alpha).stokes_velocity(&rho).unwrap();
            assert!(u[0].linf() < 1e-15);
            assert!(u[1].max_abs_diff(&rho) < 1e-14);
        }
    }

    #[test]
    fn alpha_zero_is_leray_of_buoyancy() {
        let rho = band_limited_noise(grid(), 10, 4);
        let u = op(0.0).stokes_velocity(&rho).unwrap();
        let oracle = leray_project(&[RealField::zeros(grid()), rho.clone()]).unwrap();
        for (a, b) in u.iter().zip(&oracle) {
            assert!(a.max_abs_diff(b) < 1e-14);
        }
    }

    #[test]
    fn pressure_examples() {
        let o = op(0.5);
        let shear = RealField::from_fn(grid(), |x| x[0].sin());
        assert!(o.pressure_gradient(&shear).unwrap().iter().all(|c| c.linf() < 1e-15));
        let strat = RealField::from_fn(grid(), |x| x[1].sin());
        let gp = o.pressure_gradient(&strat).unwrap();
        assert!(gp[0].linf() < 1e-15);
        assert!(gp[1].max_abs_diff(&strat) < 1e-14);
        let zero = RealField::zeros(grid());
        assert!(o.pressure_gradient(&zero).unwrap().iter().all(|c| c.linf() == 0.0));
    }

    #[test]
    fn stokes_residual_vanishes() {
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let o = op(alpha);
            let rho = band_limited_noise(grid(), 10, 17).map(|v| v + 0.4);
            let u = o.stokes_velocity(&rho).unwrap();
            let gp = o.pressure_gradient(&rho).unwrap();
            let mean = rho.mean();
            for i in 0..2 {
                let lhs = fractional_laplacian(&u[i], alpha).unwrap().add(&gp[i]);
                let rhs = if i == 1 {
                    rho.map(|v| v - mean)
                } else {
                    RealField::zeros(grid())
                };
                assert!(lhs.max_abs_diff(&rhs) < 1e-10);
            }
            assert!(divergence(&u).unwrap().linf() < 1e-12);
            assert!(u.iter().all(|c| c.mean().abs() < 1e-15));
        }
    }

    #[test]
    fn advection_examples() {
        let o = op(0.7);
        let strat = RealField::from_fn(grid(), |x| x[1].sin());
        assert!(o.advection_term(&strat).unwrap().linf() < 1e-12);
        let shear = RealField::from_fn(grid(), |x| x[0].sin());
        assert!(o.advection_term(&shear).unwrap().linf() < 1e-12);
        for seed in 0..5 {
            let rho = band_limited_noise(grid(), 10, seed);
            let div = o.advection_term(&rho).unwrap();
            let grad = o.advection_gradient_form(&rho).unwrap();
            assert!(div.max_abs_diff(&grad) < 1e-10);
        }
    }

    #[test]
    fn structure_split_examples() {
        let o = op(0.5);
        let indep = RealField::from_fn(grid(), |x| x[0].sin() + (2.0 * x[0]).cos());
        let (t1, t2) = o.structure_split(&indep).unwrap();
        assert!(t1.linf() < 1e-14 && t2.linf() < 1e-14);

        let strat = RealField::from_fn(grid(), |x| x[1].sin());
        let (t1, t2) = o.structure_split(&strat).unwrap();
        let sc = RealField::from_fn(grid(), |x| x[1].sin() * x[1].cos());
        assert!(t1.max_abs_diff(&sc) < 1e-14);
        assert!(t2.max_abs_diff(&sc.scale(-1.0)) < 1e-14);

        for seed in 0..5 {
            let rho = band_limited_noise(grid(), 10, seed + 10);
            let (t1, t2) = o.structure_split(&rho).unwrap();
            let adv = o.advection_term(&rho).unwrap();
            assert!(t1.add(&t2).max_abs_diff(&adv) < 1e-10);
        }
    }

    #[test]
    fn full_range_regularizations_are_transparent() {
        let rho = band_limited_noise(grid(), 15, 6);
        let plain = op(0.5).stokes_velocity(&rho).unwrap();
        let nyquist = (grid().n() / 2) as f64 * 2f64.sqrt();
        let bank = DyadicFilterBank::new(grid());
        for reg in [
            Regularization::Friedrichs { n_cut: nyquist },
            Regularization::Bandpass {
                blocks: bank.j_max() as usize,
            },
        ] {
            let o = StokesOperator::new(grid(), 0.5, reg).unwrap();
            let u = o.stokes_velocity(&rho).unwrap();
            for (a, b) in u.iter().zip(&plain) {
                assert!(a.max_abs_diff(b) < 1e-12);
            }
        }
    }

    #[test]
    fn friedrichs_cuts_high_modes() {
        let o = StokesOperator::new(grid(), 1.0, Regularization::Friedrichs { n_cut: 2.0 }).unwrap();
        let rho = RealField::from_fn(grid(), |x| (3.0 * x[0]).sin() + x[0].sin());
        let u = o.stokes_velocity(&rho).unwrap();
        let expected = RealField::from_fn(grid(), |x| x[0].sin());
        assert!(u[1].max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn operator_norm_ratio_is_bounded() {
        let bank = DyadicFilterBank::new(grid());
        let mut worst = 0.0f64;
        for alpha in [0.0, 0.5, 1.0, 2.0] {
            let o = op(alpha);
            for s in [0.0, 1.0 - alpha] {
                for seed in 0..5 {
                    let rho = band_limited_noise(grid(), 10, seed);
                    let u = o.stokes_velocity(&rho).unwrap();
                    let num: f64 = u
                        .iter()
                        .map(|c| bank.besov_norm(&BesovParams::new(s + alpha, f64::INFINITY, 1.0), c).unwrap())
                        .fold(0.0, f64::max);
                    let den = rho.l2()
                        + bank.besov_norm(&BesovParams::new(s, f64::INFINITY, 1.0), &rho).unwrap();
                    worst = worst.max(num / den);
                }
            }
        }
        assert!(worst <= 50.0, "ratio {worst}");
    }

    #[test]
    fn equilibrium_profile_checks_stratification() {
        let eq = EquilibriumProfile::from_fn(grid(), f64::sin).unwrap();
        let cos = RealField::from_fn(grid(), |x| x[1].cos());
        assert!(eq.derivative().max_abs_diff(&cos) < 1e-13);
        let bad = RealField::from_fn(grid(), |x| x[0].sin());
        assert!(matches!(
            EquilibriumProfile::new(bad),
            Err(Error::NotStratified(_))
        ));
    }
}
