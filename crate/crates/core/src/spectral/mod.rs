//! Periodic grid, discrete Fourier transform, and the pointwise-in-wavenumber
//! operators built on it (derivatives, fractional Laplacian, Leray
//! projection, 2/3-rule dealiasing).
//!
//! Coefficients are normalized so `f(x) = Σ_k f̂(k) e^{ik·x}`; Parseval then
//! reads `∫ |f|² = (2π)^d Σ |f̂(k)|²` with the integral taken by the
//! rectangle rule.

mod fft;
mod field;
mod grid;
mod multiplier;
pub mod snapshot;

pub use fft::{forward_transform, inverse_transform};
pub use field::{RealField, SpectralField};
pub use grid::{norm_sq, Grid, Wavevector, MAX_DIM};
pub use multiplier::{
    apply_multiplier, apply_to_real, dealias, dealiased_product, divergence, fractional_laplacian,
    gradient, leray_project, partial_derivative, MultiplierSpec, ZeroModeRule,
};

pub use snapshot::{read_snapshot, read_snapshot_checked, snapshot_name, write_snapshot};

pub(crate) use fft::forward_unchecked;
pub(crate) use multiplier::derivative_spectral;

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;
    use crate::harness::presets::band_limited_noise;

    fn grid16() -> Grid {
        Grid::new(2, 16).unwrap()
    }

    /// Direct O(N²) DFT with the library's normalization.
    fn brute_force_dft(f: &RealField) -> Vec<Complex64> {
        let grid = f.grid();
        let len = grid.len();
        (0..len)
            .map(|kf| {
                let k = grid.wavevector(kf);
                let mut acc = Complex64::new(0.0, 0.0);
                for xf in 0..len {
                    let x = grid.coordinates(xf);
                    let phase: f64 = (0..grid.dim()).map(|a| k[a] as f64 * x[a]).sum();
                    acc += f.values()[xf] * Complex64::from_polar(1.0, -phase);
                }
                acc / len as f64
            })
            .collect()
    }

    /// Direct synthesis `Σ_k c_k e^{ik·x}`, real part.
    fn brute_force_synthesis(grid: Grid, coeffs: &[Complex64]) -> RealField {
        RealField::from_fn(grid, |x| {
            let mut acc = 0.0;
            for (kf, c) in coeffs.iter().enumerate() {
                let k = grid.wavevector(kf);
                let phase: f64 = (0..grid.dim()).map(|a| k[a] as f64 * x[a]).sum();
                acc += (c * Complex64::from_polar(1.0, phase)).re;
            }
            acc
        })
    }

    #[test]
    fn constant_maps_to_dc() {
        let f = RealField::constant(grid16(), 2.5);
        let hat = forward_transform(&f).unwrap();
        assert!((hat.coeffs()[0] - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        assert!(hat.coeffs()[1..].iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn sine_single_mode() {
        let f = RealField::from_fn(grid16(), |x| x[0].sin());
        let hat = forward_transform(&f).unwrap();
        let plus = hat.coeff(&[1, 0, 0]);
        let minus = hat.coeff(&[-1, 0, 0]);
        assert!((plus - Complex64::new(0.0, -0.5)).norm() < 1e-13);
        assert!((minus - Complex64::new(0.0, 0.5)).norm() < 1e-13);
        let others: f64 = hat
            .coeffs()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != hat.grid().index_of(&[1, 0, 0]))
            .filter(|&(i, _)| i != hat.grid().index_of(&[-1, 0, 0]))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-13);
    }

    #[test]
    fn transform_matches_direct_dft() {
        let f = band_limited_noise(grid16(), 7, 3);
        let fast = forward_transform(&f).unwrap();
        let slow = brute_force_dft(&f);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn non_finite_input_is_located() {
        let mut f = RealField::zeros(grid16());
        f.values_mut()[16 * 3 + 5] = f64::NAN;
        match forward_transform(&f) {
            Err(crate::Error::NonFiniteSample { index, .. }) => assert_eq!(index, vec![3, 5]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_and_parseval_3d() {
        let grid = Grid::new(3, 8).unwrap();
        let f = band_limited_noise(grid, 3, 11);
        let hat = forward_transform(&f).unwrap();
        assert!(hat.hermitian_defect() < 1e-14);
        assert!((hat.weighted_l2() - f.l2()).abs() <= 1e-12 * f.l2());
        let back = inverse_transform(&hat);
        assert!(back.max_abs_diff(&f) <= 1e-12 * f.linf());
    }

    #[test]
    fn zero_order_laplacian_is_identity() {
        let f = band_limited_noise(grid16(), 7, 5);
        let g = fractional_laplacian(&f, 0.0).unwrap();
        assert!(g.max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn laplacian_scales_mode_3_4_by_25() {
        let grid = grid16();
        let mut hat = SpectralField::zeros(grid);
        hat.set_coeff(&[3, 4, 0], Complex64::new(1.0, 2.0));
        let out = apply_multiplier(&MultiplierSpec::fractional_laplacian(2.0), &hat).unwrap();
        assert!((out.coeff(&[3, 4, 0]) - Complex64::new(25.0, 50.0)).norm() < 1e-13);
    }

    #[test]
    fn half_orders_compose_to_mean_removal() {
        let f = band_limited_noise(grid16(), 7, 8).map(|v| v + 0.3);
        let up = fractional_laplacian(&f, 1.0).unwrap();
        let back = fractional_laplacian(&up, -1.0).unwrap();
        let expected = f.map(|v| v - f.mean());
        assert!(back.max_abs_diff(&expected) < 1e-12 * f.linf());
    }

    #[test]
    fn laplacian_single_modes() {
        let grid = grid16();
        let s1 = RealField::from_fn(grid, |x| x[0].sin());
        for s in [-2.0, -0.5, 0.0, 0.7, 2.0] {
            assert!(fractional_laplacian(&s1, s).unwrap().max_abs_diff(&s1) < 1e-13);
        }
        let c2 = RealField::from_fn(grid, |x| (2.0 * x[1]).cos());
        let out = fractional_laplacian(&c2, 1.0).unwrap();
        assert!(out.max_abs_diff(&c2.scale(2.0)) < 1e-13);
    }

    #[test]
    fn laplacian_matches_per_mode_oracle() {
        let grid = grid16();
        let raw = band_limited_noise(grid, 7, 21);
        let f = raw.map(|v| v - raw.mean());
        let mut coeffs = brute_force_dft(&f);
        for (kf, c) in coeffs.iter_mut().enumerate() {
            let k = grid.wavevector(kf);
            let k2 = norm_sq(&k);
            *c *= if k2 == 0.0 { 0.0 } else { k2.powf(0.35) };
        }
        let oracle = brute_force_synthesis(grid, &coeffs);
        let out = fractional_laplacian(&f, 0.7).unwrap();
        assert!(out.max_abs_diff(&oracle) <= 1e-12 * oracle.linf());
    }

    #[test]
    fn non_finite_symbol_names_wavevector() {
        let spec = MultiplierSpec::new(
            |k| {
                if k[0] == 2 && k[1] == 1 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            },
            ZeroModeRule::Identity,
        );
        match apply_multiplier(&spec, &SpectralField::zeros(grid16())) {
            Err(crate::Error::NonFiniteSymbol { k }) => assert_eq!(k, vec![2, 1]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn leray_annihilates_gradients_and_fixes_solenoidal() {
        let grid = grid16();
        let u = vec![
            RealField::from_fn(grid, |x| x[0].cos() * x[1].sin()),
            RealField::from_fn(grid, |x| x[0].sin() * x[1].cos()),
        ];
        let pu = leray_project(&u).unwrap();
        assert!(pu.iter().all(|c| c.linf() < 1e-14));

        let psi = band_limited_noise(grid, 6, 2);
        let v = vec![
            partial_derivative(&psi, 1).scale(-1.0),
            partial_derivative(&psi, 0),
        ];
        let pv = leray_project(&v).unwrap();
        for (a, b) in pv.iter().zip(&v) {
            assert!(a.max_abs_diff(b) < 1e-12 * b.linf());
        }
    }

    #[test]
    fn leray_rejects_mismatched_components() {
        let a = RealField::zeros(grid16());
        let b = RealField::zeros(Grid::new(2, 32).unwrap());
        assert!(leray_project(&[a.clone(), b]).is_err());
        assert!(leray_project(&[a]).is_err());
    }

    #[test]
    fn derivative_examples() {
        let grid = grid16();
        let s = RealField::from_fn(grid, |x| x[0].sin());
        let c = RealField::from_fn(grid, |x| x[0].cos());
        assert!(partial_derivative(&s, 0).max_abs_diff(&c) < 1e-13);
        let g = RealField::from_fn(grid, |x| (3.0 * x[0]).cos() + x[0].sin().powi(2));
        assert!(partial_derivative(&g, 1).linf() < 1e-13);
    }

    #[test]
    fn derivative_agrees_with_centered_differences_at_second_order() {
        // band-limited function sampled on successively finer grids
        let f = |x: &[f64; MAX_DIM]| (2.0 * x[0] + x[1]).sin() + 0.5 * (3.0 * x[0]).cos();
        let mut errors = Vec::new();
        for n in [32, 64, 128] {
            let grid = Grid::new(2, n).unwrap();
            let field = RealField::from_fn(grid, f);
            let spectral = partial_derivative(&field, 0);
            let h = grid.spacing();
            let vals = field.values();
            let mut err = 0.0f64;
            for flat in 0..grid.len() {
                let mut idx = grid.unravel(flat);
                let i = idx[0];
                idx[0] = (i + 1) % n;
                let fp = vals[grid.ravel(&idx)];
                idx[0] = (i + n - 1) % n;
                let fm = vals[grid.ravel(&idx)];
                err = err.max(((fp - fm) / (2.0 * h) - spectral.values()[flat]).abs());
            }
            errors.push(err);
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((3.8..4.2).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn dealias_examples() {
        let grid = grid16();
        let smooth = band_limited_noise(grid, 5, 4);
        let hat = forward_transform(&smooth).unwrap();
        assert!(dealias(&hat).max_abs_diff(&hat) < 1e-15);

        let mut top = SpectralField::zeros(grid);
        top.set_coeff(&[7, 0, 0], Complex64::new(1.0, 0.0));
        assert!(dealias(&top).coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn dealiased_square_is_grid_independent() {
        let coarse = Grid::new(2, 16).unwrap();
        let fine = Grid::new(2, 64).unwrap();
        let sq = |g: Grid| {
            let s = RealField::from_fn(g, |x| x[0].sin());
            forward_transform(&dealiased_product(&s, &s).unwrap()).unwrap()
        };
        let (a, b) = (sq(coarse), sq(fine));
        let cut = coarse.dealias_cutoff();
        let mut diff = 0.0f64;
        for flat in 0..coarse.len() {
            let k = coarse.wavevector(flat);
            if k[0].abs() <= cut && k[1].abs() <= cut {
                diff += (a.coeffs()[flat] - b.coeff(&k)).norm_sqr();
            }
        }
        assert!((coarse.volume() * diff).sqrt() <= 1e-12);
        assert!((a.coeff(&[0, 0, 0]).re - 0.5).abs() < 1e-15);
        assert!((a.coeff(&[2, 0, 0]).re + 0.25).abs() < 1e-15);
    }

    #[test]
    fn leray_is_orthogonal_and_divergence_free() {
        let grid = Grid::new(2, 32).unwrap();
        for seed in 0..10 {
            let u = vec![
                band_limited_noise(grid, 15, 100 + seed),
                band_limited_noise(grid, 15, 200 + seed),
            ];
            let pu = leray_project(&u).unwrap();
            let ppu = leray_project(&pu).unwrap();
            let norm2: f64 = u.iter().map(|c| c.inner(c)).sum();
            for (a, b) in ppu.iter().zip(&pu) {
                assert!(a.max_abs_diff(b) <= 1e-12 * b.linf().max(1e-300));
            }
            let cross: f64 = pu
                .iter()
                .zip(&u)
                .map(|(p, v)| p.inner(&v.sub(p)))
                .sum();
            assert!(cross.abs() <= 1e-10 * norm2);
            assert!(divergence(&pu).unwrap().linf() <= 1e-12 * pu[0].linf() * 16.0);
        }
    }

    #[test]
    fn vector_helpers_round_trip() {
        let grid = grid16();
        let phi = RealField::from_fn(grid, |x| x[0].sin() * x[1].sin());
        let lap = divergence(&gradient(&phi).unwrap()).unwrap();
        assert!(lap.max_abs_diff(&phi.scale(-2.0)) < 1e-13);
        assert!((2.0 * PI).powi(2) - grid.volume() == 0.0);
    }

    fn symbol_pool(dim: usize) -> Vec<MultiplierSpec> {
        let mut pool = vec![
            MultiplierSpec::fractional_laplacian(0.7),
            MultiplierSpec::fractional_laplacian(-1.3),
            MultiplierSpec::fractional_laplacian(2.0),
        ];
        for i in 0..dim {
            pool.push(MultiplierSpec::derivative(i));
            for j in 0..dim {
                pool.push(MultiplierSpec::leray_entry(i, j));
            }
        }
        pool
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn multiplier_composition(seed in 0u64..10_000, a in 0usize..9, b in 0usize..9) {
            let grid = grid16();
            let pool = symbol_pool(2);
            let (ma, mb) = (&pool[a % pool.len()], &pool[b % pool.len()]);
            let hat = forward_transform(&band_limited_noise(grid, 7, seed)).unwrap();
            let seq = apply_multiplier(mb, &apply_multiplier(ma, &hat).unwrap()).unwrap();
            let joint = apply_multiplier(&ma.compose(mb), &hat).unwrap();
            let scale = joint.coeffs().iter().fold(0.0f64, |m, c| m.max(c.norm()));
            prop_assert!(seq.max_abs_diff(&joint) <= 1e-12 * scale.max(1e-300));
        }

        #[test]
        fn round_trip_and_parseval(seed in 0u64..10_000, kmax in 1i64..8) {
            let f = band_limited_noise(grid16(), kmax, seed).map(|v| v + 0.1);
            let hat = forward_transform(&f).unwrap();
            prop_assert!((hat.weighted_l2() - f.l2()).abs() <= 1e-12 * f.l2());
            prop_assert!(hat.hermitian_defect() <= 1e-15 * f.linf() * 16.0);
            prop_assert!(inverse_transform(&hat).max_abs_diff(&f) <= 1e-12 * f.linf());
        }

        #[test]
        fn derivative_commutes_with_leray(seed in 0u64..10_000, axis in 0usize..2) {
            let grid = grid16();
            let u = vec![band_limited_noise(grid, 7, seed), band_limited_noise(grid, 7, seed + 1)];
            let left: Vec<_> = leray_project(&u).unwrap().iter().map(|c| partial_derivative(c, axis)).collect();
            let du: Vec<_> = u.iter().map(|c| partial_derivative(c, axis)).collect();
            let right = leray_project(&du).unwrap();
            for (a, b) in left.iter().zip(&right) {
                prop_assert!(a.max_abs_diff(b) <= 1e-12 * b.linf().max(1.0));
            }
        }
    }
}
