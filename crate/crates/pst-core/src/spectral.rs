//! Frequency grids, forward/inverse transforms, and spectral differentiation.
//!
//! Conventions used everywhere in this crate:
//! * frequencies are in cycles/sample, `u in [-0.5, 0.5)`, DC-first
//!   (unshifted) bin order;
//! * the forward transform is unnormalized (DC bin = sum of samples);
//! * the inverse carries the full `1/N` (or `1/(nx*ny)`) factor, so
//!   `inverse(forward(x)) == x` up to rounding.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{PstError, Result};

/// Spatial-frequency axis for an `n`-sample signal, in transform bin order:
/// `u[k] = k/n` for `k <= (n-1)/2`, `u[k] = (k-n)/n` otherwise.
pub fn frequency_axis(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|k| {
            if k <= (n - 1) / 2 {
                k as f64 / nf
            } else {
                (k as f64 - nf) / nf
            }
        })
        .collect()
}

/// Frequency-domain sample grid shared by kernels and transforms.
///
/// 1D grids are represented as `ny == 1` with a single `v = 0` row, so the
/// radial frequency degenerates to `|u|`.
#[derive(Debug, Clone)]
pub struct FrequencyGrid {
    nx: usize,
    ny: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FrequencyGrid {
    /// Grid for a 1D signal of `n` samples.
    pub fn one_dim(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(PstError::InvalidSize(format!(
                "frequency grid needs at least 2 samples, got {n}"
            )));
        }
        Ok(Self {
            nx: n,
            ny: 1,
            u: frequency_axis(n),
            v: vec![0.0],
        })
    }

    /// Grid for a 2D field of `nx` columns by `ny` rows.
    pub fn two_dim(nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(PstError::InvalidSize(format!(
                "frequency grid needs at least 2 samples per axis, got {nx}x{ny}"
            )));
        }
        Ok(Self {
            nx,
            ny,
            u: frequency_axis(nx),
            v: frequency_axis(ny),
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Horizontal frequency axis (cycles/sample).
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Vertical frequency axis (cycles/sample); `[0.0]` for 1D grids.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// Radial frequency `sqrt(u^2 + v^2)` at bin `(kx, ky)`.
    pub fn radius(&self, kx: usize, ky: usize) -> f64 {
        self.u[kx].hypot(self.v[ky])
    }

    /// Largest radial frequency present on the grid.
    pub fn max_radius(&self) -> f64 {
        let umax = self.u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let vmax = self.v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        umax.hypot(vmax)
    }
}

/// Complex spectrum produced by the unnormalized forward transform.
///
/// Bins are row-major, `u` along rows, in the unshifted order of
/// [`frequency_axis`]. The matching [`FrequencyGrid`] has the same dims.
#[derive(Debug, Clone)]
pub struct Spectrum {
    nx: usize,
    ny: usize,
    bins: Vec<Complex64>,
}

impl Spectrum {
    /// Unnormalized forward DFT of a real 1D signal.
    pub fn forward_1d(x: &[f64]) -> Result<Self> {
        if x.len() < 2 {
            return Err(PstError::InvalidSize(format!(
                "forward transform needs at least 2 samples, got {}",
                x.len()
            )));
        }
        let mut bins: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        fft_rows(&mut bins, x.len(), FftDirection::Forward);
        Ok(Self { nx: x.len(), ny: 1, bins })
    }

    /// Unnormalized forward DFT of a real row-major 2D field.
    pub fn forward_2d(x: &[f64], nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(PstError::InvalidSize(format!(
                "forward transform needs at least 2 samples per axis, got {nx}x{ny}"
            )));
        }
        if x.len() != nx * ny {
            return Err(PstError::InvalidSize(format!(
                "sample count {} does not match {nx}x{ny}",
                x.len()
            )));
        }
        let mut bins: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        fft_2d(&mut bins, nx, ny, FftDirection::Forward);
        Ok(Self { nx, ny, bins })
    }

    /// Inverse transform carrying the full `1/(nx*ny)` normalization.
    pub fn inverse(&self) -> Vec<Complex64> {
        let mut out = self.bins.clone();
        if self.ny == 1 {
            fft_rows(&mut out, self.nx, FftDirection::Inverse);
        } else {
            fft_2d(&mut out, self.nx, self.ny, FftDirection::Inverse);
        }
        let scale = 1.0 / (self.nx as f64 * self.ny as f64);
        out.iter_mut().for_each(|c| *c *= scale);
        out
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn bins_mut(&mut self) -> &mut [Complex64] {
        &mut self.bins
    }

    /// Grid matching this spectrum's dimensions.
    pub fn grid(&self) -> FrequencyGrid {
        if self.ny == 1 {
            FrequencyGrid::one_dim(self.nx).expect("spectrum dims already validated")
        } else {
            FrequencyGrid::two_dim(self.nx, self.ny).expect("spectrum dims already validated")
        }
    }
}

/// `m`-th order spectral derivative of a real signal:
/// `Re(IDFT{ (j 2 pi u)^m DFT{x} })`, real for even `m`.
///
/// Satisfies `(-1)^(m/2) / (2 pi)^m * spectral_derivative(x, m)
/// = IDFT{ u^m DFT{x} }`.
pub fn spectral_derivative(x: &[f64], m: usize) -> Result<Vec<f64>> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(PstError::UnsupportedOrder(m));
    }
    let mut spec = Spectrum::forward_1d(x)?;
    let u = frequency_axis(x.len());
    // (j 2 pi u)^m is real for even m: (-1)^(m/2) (2 pi u)^m.
    let sign = if (m / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    for (bin, &uk) in spec.bins_mut().iter_mut().zip(&u) {
        let factor = sign * (2.0 * std::f64::consts::PI * uk).powi(m as i32);
        *bin *= factor;
    }
    Ok(spec.inverse().iter().map(|c| c.re).collect())
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    planner()
        .lock()
        .expect("fft planner lock poisoned")
        .plan_fft(len, direction)
}

/// Transform every `width`-length row of `data` in place. Rows are
/// independent, so the parallel result is bit-identical to the serial one.
fn fft_rows(data: &mut [Complex64], width: usize, direction: FftDirection) {
    let fft = plan(width, direction);
    data.par_chunks_exact_mut(width).for_each_init(
        || vec![Complex64::default(); fft.get_inplace_scratch_len()],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

/// Cache-tiled out-of-place transpose.
fn transpose(src: &[Complex64], width: usize, height: usize, dst: &mut Vec<Complex64>) {
    const TILE: usize = 32;
    dst.clear();
    dst.resize(src.len(), Complex64::default());
    for y0 in (0..height).step_by(TILE) {
        let y1 = (y0 + TILE).min(height);
        for x0 in (0..width).step_by(TILE) {
            let x1 = (x0 + TILE).min(width);
            for y in y0..y1 {
                for x in x0..x1 {
                    dst[x * height + y] = src[y * width + x];
                }
            }
        }
    }
}

fn fft_2d(data: &mut Vec<Complex64>, nx: usize, ny: usize, direction: FftDirection) {
    fft_rows(data, nx, direction);
    let mut scratch = Vec::new();
    transpose(data, nx, ny, &mut scratch);
    fft_rows(&mut scratch, ny, direction);
    transpose(&scratch, ny, nx, data);
}

/// Forward transform, pointwise multiply by `gain`, inverse transform — with
/// the intermediate kept in transposed layout so only two transposes run.
///
/// `gain` must be laid out transposed (`[kx][ky]`, row length `ny`). The
/// returned field is in natural layout and unnormalized: the caller owns the
/// `1/(nx*ny)` factor (or may drop it where only the phase matters).
pub(crate) fn filtered_roundtrip_2d(
    x: &[f64],
    nx: usize,
    ny: usize,
    gain_transposed: &[Complex64],
) -> Vec<Complex64> {
    debug_assert_eq!(x.len(), nx * ny);
    debug_assert_eq!(gain_transposed.len(), nx * ny);
    let mut data: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
    fft_rows(&mut data, nx, FftDirection::Forward);
    let mut work = Vec::new();
    transpose(&data, nx, ny, &mut work);
    fft_rows(&mut work, ny, FftDirection::Forward);
    for (bin, &g) in work.iter_mut().zip(gain_transposed) {
        *bin *= g;
    }
    fft_rows(&mut work, ny, FftDirection::Inverse);
    transpose(&work, ny, nx, &mut data);
    fft_rows(&mut data, nx, FftDirection::Inverse);
    data
}
