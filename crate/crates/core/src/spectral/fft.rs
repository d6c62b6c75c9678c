use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::Fft;

use super::field::{RealField, SpectralField};
use crate::Result;

// Lines handed to one rayon task. Every line is transformed independently,
// so the grouping does not affect the result.
const LINES_PER_TASK: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone)]
struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

fn plans(n: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut cache = cache.lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = RealFftPlanner::<f64>::new();
            let r2c = planner.plan_fft_forward(n);
            let c2r = planner.plan_fft_inverse(n);
            let mut complex = rustfft::FftPlanner::new();
            Plans {
                forward: complex.plan_fft_forward(n),
                inverse: complex.plan_fft_inverse(n),
                r2c,
                c2r,
            }
        })
        .clone()
}

/// Length-`n` transforms of the lines `chunk[i·stride + s]`, `s < stride`,
/// for every consecutive chunk of `n·stride` values.
fn strided_fft(data: &mut [Complex64], n: usize, stride: usize, plan: &Arc<dyn Fft<f64>>) {
    let block = n * stride;
    let mut lines = vec![ZERO; block];
    for chunk in data.chunks_mut(block) {
        {
            let chunk: &[Complex64] = chunk;
            lines.par_chunks_mut(n * LINES_PER_TASK).enumerate().for_each_init(
                || vec![ZERO; plan.get_inplace_scratch_len()],
                |scratch, (task, group)| {
                    let s0 = task * LINES_PER_TASK;
                    for (b, line) in group.chunks_mut(n).enumerate() {
                        for (i, v) in line.iter_mut().enumerate() {
                            *v = chunk[i * stride + s0 + b];
                        }
                    }
                    plan.process_with_scratch(group, scratch);
                },
            );
        }
        let lines = &lines;
        chunk
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(i, row)| {
                for (s, v) in row.iter_mut().enumerate() {
                    *v = lines[s * n + i];
                }
            });
    }
}

/// Flat index of the row holding `−k'` for the row holding `k'`, where
/// rows run over every axis but the last.
fn mirror_row(row: usize, n: usize, outer_dims: usize) -> usize {
    let mut rest = row;
    let mut out = 0;
    let mut place = 1;
    for _ in 0..outer_dims {
        let i = rest % n;
        rest /= n;
        out += ((n - i) % n) * place;
        place *= n;
    }
    out
}

/// Forward transform normalized so a constant field `c` maps to `f̂(0) = c`.
pub fn forward_transform(f: &RealField) -> Result<SpectralField> {
    f.check_finite()?;
    Ok(forward_unchecked(f))
}

pub(crate) fn forward_unchecked(f: &RealField) -> SpectralField {
    let grid = f.grid();
    let (n, dim) = (grid.n(), grid.dim());
    let m = n / 2 + 1;
    let rows = grid.len() / n;
    let p = plans(n);

    // real transforms along the last axis give the half spectrum
    let mut half = vec![ZERO; rows * m];
    half.par_chunks_mut(m * LINES_PER_TASK)
        .zip(f.values().par_chunks(n * LINES_PER_TASK))
        .for_each_init(
            || (vec![0.0; n], vec![ZERO; p.r2c.get_scratch_len()]),
            |(input, scratch), (out, src)| {
                for (o, s) in out.chunks_mut(m).zip(src.chunks(n)) {
                    input.copy_from_slice(s);
                    p.r2c
                        .process_with_scratch(input, o, scratch)
                        .expect("buffer lengths match the plan");
                }
            },
        );
    for axis in 0..dim - 1 {
        let stride = m * n.pow((dim - 2 - axis) as u32);
        strided_fft(&mut half, n, stride, &p.forward);
    }

    let scale = 1.0 / grid.len() as f64;
    let mut full = vec![ZERO; grid.len()];
    full.par_chunks_mut(n).enumerate().for_each(|(row, out)| {
        let src = &half[row * m..(row + 1) * m];
        for j in 0..m {
            out[j] = src[j] * scale;
        }
        let mirror = mirror_row(row, n, dim - 1);
        let msrc = &half[mirror * m..(mirror + 1) * m];
        for j in m..n {
            out[j] = msrc[n - j].conj() * scale;
        }
    });
    SpectralField::from_coeffs(grid, full).expect("length preserved")
}

/// Inverse transform of the Hermitian part of `f`. This equals the real
/// part of the complex synthesis, so non-Hermitian input is projected onto
/// real data.
pub fn inverse_transform(f: &SpectralField) -> RealField {
    let grid = f.grid();
    let (n, dim) = (grid.n(), grid.dim());
    let m = n / 2 + 1;
    let rows = grid.len() / n;
    let p = plans(n);
    let coeffs = f.coeffs();

    let mut half = vec![ZERO; rows * m];
    half.par_chunks_mut(m).enumerate().for_each(|(row, out)| {
        let src = &coeffs[row * n..(row + 1) * n];
        let mirror = mirror_row(row, n, dim - 1);
        let msrc = &coeffs[mirror * n..(mirror + 1) * n];
        for (j, o) in out.iter_mut().enumerate() {
            *o = 0.5 * (src[j] + msrc[(n - j) % n].conj());
        }
    });
    for axis in 0..dim - 1 {
        let stride = m * n.pow((dim - 2 - axis) as u32);
        strided_fft(&mut half, n, stride, &p.inverse);
    }

    let mut values = vec![0.0; grid.len()];
    values
        .par_chunks_mut(n * LINES_PER_TASK)
        .zip(half.par_chunks_mut(m * LINES_PER_TASK))
        .for_each_init(
            || vec![ZERO; p.c2r.get_scratch_len()],
            |scratch, (out, src)| {
                for (o, s) in out.chunks_mut(n).zip(src.chunks_mut(m)) {
                    // real up to rounding after the symmetrization
                    s[0].im = 0.0;
                    s[m - 1].im = 0.0;
                    p.c2r
                        .process_with_scratch(s, o, scratch)
                        .expect("buffer lengths match the plan");
                }
            },
        );
    RealField::from_values(grid, values).expect("length preserved")
}

impl SpectralField {
    pub fn to_real(&self) -> RealField {
        inverse_transform(self)
    }
}
