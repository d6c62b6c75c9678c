//! Named initial data.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::{inverse_transform, norm_sq, read_snapshot_checked, Grid, RealField, SpectralField};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// `sin(x_d)`, a stationary stratified profile.
    StratifiedSin,
    /// `sin(x_1)`, a stationary shear state.
    ShearSin,
    /// Stratified profile plus `ε` times seeded smooth noise.
    PerturbedStratification,
    /// Seeded noise with a Gaussian-decay spectrum.
    RandomSmooth,
    FromFile,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::StratifiedSin,
        Preset::ShearSin,
        Preset::PerturbedStratification,
        Preset::RandomSmooth,
        Preset::FromFile,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::StratifiedSin => "stratified_sin",
            Preset::ShearSin => "shear_sin",
            Preset::PerturbedStratification => "perturbed_stratification",
            Preset::RandomSmooth => "random_smooth",
            Preset::FromFile => "from_file",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Shape of a stratified profile `R(x_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Sin,
    Cos,
}

impl Profile {
    pub fn eval(self, xd: f64) -> f64 {
        match self {
            Profile::Sin => xd.sin(),
            Profile::Cos => xd.cos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::Sin => "sin",
            Profile::Cos => "cos",
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sin" => Ok(Profile::Sin),
            "cos" => Ok(Profile::Cos),
            other => Err(format!("unknown profile `{other}` (expected sin or cos)")),
        }
    }
}

/// Parameters of the initial datum. `amplitude` multiplies the whole
/// datum, so amplitude scans rescale one fixed shape.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialDatum {
    pub preset: Preset,
    pub amplitude: f64,
    pub epsilon: f64,
    /// Gaussian spectral width of the random presets.
    pub width: f64,
    pub profile: Profile,
    pub file: Option<PathBuf>,
}

impl Default for InitialDatum {
    fn default() -> Self {
        Self {
            preset: Preset::RandomSmooth,
            amplitude: 1.0,
            epsilon: 0.1,
            width: 3.0,
            profile: Profile::Sin,
            file: None,
        }
    }
}

fn normalize_sup(mut f: RealField) -> RealField {
    let m = f.linf();
    if m > 0.0 {
        for v in f.values_mut() {
            *v /= m;
        }
    }
    f
}

/// Seeded noise from the nonzero modes with `|k|` inside `weight`'s
/// support, normalized to unit sup norm. The Nyquist row is never filled.
fn seeded_noise(grid: Grid, seed: u64, weight: impl Fn(&[i64; 3]) -> f64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = (grid.n() / 2) as i64;
    let mut hat = SpectralField::zeros(grid);
    for (flat, c) in hat.coeffs_mut().iter_mut().enumerate() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let k = grid.wavevector(flat);
        if k.iter().all(|&ki| ki == 0) || k[..grid.dim()].iter().any(|&ki| ki == -half) {
            continue;
        }
        *c = Complex64::new(re, im) * weight(&k);
    }
    normalize_sup(inverse_transform(&hat))
}

/// Zero-mean noise on the modes with every `|k_i| ≤ k_max`, unit sup norm.
pub fn band_limited_noise(grid: Grid, k_max: i64, seed: u64) -> RealField {
    seeded_noise(grid, seed, |k| {
        if k.iter().all(|&ki| ki.abs() <= k_max) {
            1.0
        } else {
            0.0
        }
    })
}

/// Zero-mean noise with spectrum `exp(−|k|²/(2w²))`, unit sup norm.
pub fn random_smooth(grid: Grid, width: f64, seed: u64) -> RealField {
    let two_w2 = 2.0 * width * width;
    seeded_noise(grid, seed, |k| (-norm_sq(k) / two_w2).exp())
}

pub fn stratified(grid: Grid, profile: Profile) -> RealField {
    let last = grid.dim() - 1;
    RealField::from_fn(grid, |x| profile.eval(x[last]))
}

/// Deterministic initial field for `(datum, grid, seed)`.
pub fn preset_initial_datum(datum: &InitialDatum, grid: Grid, seed: u64) -> Result<RealField> {
    let shape = match datum.preset {
        Preset::StratifiedSin => stratified(grid, Profile::Sin),
        Preset::ShearSin => RealField::from_fn(grid, |x| x[0].sin()),
        Preset::PerturbedStratification => {
            let base = stratified(grid, datum.profile);
            if datum.epsilon == 0.0 {
                base
            } else {
                let mut out = base;
                out.axpy(datum.epsilon, &random_smooth(grid, datum.width, seed));
                out
            }
        }
        Preset::RandomSmooth => random_smooth(grid, datum.width, seed),
        Preset::FromFile => {
            let path = datum.file.as_ref().ok_or_else(|| {
                Error::UnknownPreset("from_file requires initial.file".to_string())
            })?;
            read_snapshot_checked(path, grid)?
        }
    };
    if datum.amplitude == 1.0 {
        Ok(shape)
    } else {
        Ok(shape.scale(datum.amplitude))
    }
}

/// Resolves a preset by name, as used on the command line.
pub fn preset_by_name(
    name: &str,
    datum: &InitialDatum,
    grid: Grid,
    seed: u64,
) -> Result<RealField> {
    let preset: Preset = name.parse()?;
    preset_initial_datum(
        &InitialDatum {
            preset,
            ..datum.clone()
        },
        grid,
        seed,
    )
}
