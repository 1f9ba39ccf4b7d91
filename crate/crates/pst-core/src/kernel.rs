//! Warped phase kernel, localization (low-pass) kernel, and the analytic
//! Taylor coefficients of the phase profile.

use num_complex::Complex64;

use crate::error::{PstError, Result};
use crate::spectral::FrequencyGrid;

/// Profile shape `g(x) = x*atan(x) - ln(1 + x^2)/2`; `g'(x) = atan(x)`.
fn warp_profile(x: f64) -> f64 {
    x * x.atan() - 0.5 * (x * x).ln_1p()
}

/// Evaluate a radial function on every grid bin. The grid's reflection
/// symmetry (`u[n-k] = -u[k]`) makes bins mirror each other exactly, so only
/// one quarter plane is evaluated and the rest is copied.
fn radial_grid(grid: &FrequencyGrid, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let (nx, ny) = (grid.nx(), grid.ny());
    let u = grid.u();
    let v = grid.v();
    let mut values = vec![0.0; nx * ny];
    for (l, &vl) in v.iter().enumerate().take(ny / 2 + 1) {
        let row = l * nx;
        for k in 0..=nx / 2 {
            let r = (u[k] * u[k] + vl * vl).sqrt();
            values[row + k] = f(r);
        }
        for k in 1..nx.div_ceil(2) {
            values[row + nx - k] = values[row + k];
        }
        let mirrored = ny - l;
        if l != 0 && mirrored != l {
            let (head, tail) = values.split_at_mut(mirrored * nx);
            tail[..nx].copy_from_slice(&head[row..row + nx]);
        }
    }
    values
}

/// Kernel phase at radial frequency `r`: `S * g(W r) / g(W r_max)`, so the
/// applied phase peaks at exactly `strength` radians at `r = r_max`.
pub fn phase_profile(r: f64, warp: f64, strength: f64, r_max: f64) -> Result<f64> {
    if !(warp > 0.0) {
        return Err(PstError::InvalidParameter(format!("warp must be > 0, got {warp}")));
    }
    if !(r_max > 0.0) {
        return Err(PstError::InvalidParameter(format!("r_max must be > 0, got {r_max}")));
    }
    if !(strength >= 0.0) {
        return Err(PstError::InvalidParameter(format!(
            "strength must be >= 0, got {strength}"
        )));
    }
    if r < 0.0 {
        return Err(PstError::InvalidParameter(format!("radius must be >= 0, got {r}")));
    }
    Ok(strength * warp_profile(warp * r) / warp_profile(warp * r_max))
}

/// Precomputed phase grid `phi[u, v]` for `K[u, v] = e^{j phi}`.
///
/// The grid is laid out like the spectrum it multiplies (row-major,
/// unshifted). Even symmetry holds exactly because the phase depends on the
/// radial frequency only.
#[derive(Debug, Clone)]
pub struct PhaseKernel {
    nx: usize,
    ny: usize,
    phase: Vec<f64>,
    warp: f64,
    strength: f64,
    r_max: f64,
}

impl PhaseKernel {
    /// Evaluate the phase profile on every bin of `grid`, normalized to the
    /// grid's own maximum radius.
    pub fn build(grid: &FrequencyGrid, warp: f64, strength: f64) -> Result<Self> {
        let r_max = grid.max_radius();
        // Parameter check once; the per-bin loop then evaluates directly.
        phase_profile(0.0, warp, strength, r_max)?;
        let norm = strength / warp_profile(warp * r_max);
        let phase = radial_grid(grid, |r| norm * warp_profile(warp * r));
        Ok(Self {
            nx: grid.nx(),
            ny: grid.ny(),
            phase,
            warp,
            strength,
            r_max,
        })
    }

    /// Complex gain `e^{j phi} * L` per bin, in the kernel's own layout.
    pub fn complex_gain(&self, lpf: Option<&LocalizationKernel>) -> Vec<Complex64> {
        let (nx, ny) = (self.nx, self.ny);
        let mut gain = vec![Complex64::new(0.0, 0.0); nx * ny];
        // Same quarter-plane symmetry as the phase grid itself.
        for l in 0..=ny / 2 {
            let row = l * nx;
            for k in 0..=nx / 2 {
                let (sin, cos) = self.phase[row + k].sin_cos();
                let g = lpf.map_or(1.0, |l| l.gain()[row + k]);
                gain[row + k] = Complex64::new(cos * g, sin * g);
            }
            for k in 1..nx.div_ceil(2) {
                gain[row + nx - k] = gain[row + k];
            }
            let mirrored = ny - l;
            if l != 0 && mirrored != l {
                let (head, tail) = gain.split_at_mut(mirrored * nx);
                tail[..nx].copy_from_slice(&head[row..row + nx]);
            }
        }
        gain
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Phase grid in radians, row-major.
    pub fn phase(&self) -> &[f64] {
        &self.phase
    }

    pub fn warp(&self) -> f64 {
        self.warp
    }

    /// Peak applied phase in radians.
    pub fn strength(&self) -> f64 {
        self.strength
    }

    /// Radial frequency where the phase is pinned to `strength`.
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
}

/// Real low-pass gain grid `L[u, v]` in `(0, 1]`.
#[derive(Debug, Clone)]
pub struct LocalizationKernel {
    nx: usize,
    ny: usize,
    gain: Vec<f64>,
    cutoff: f64,
}

impl LocalizationKernel {
    /// Gaussian gain with half-amplitude radius `cutoff` (cycles/sample):
    /// `L(r) = exp(-(r/cutoff)^2 ln 2)`, so `L(0) = 1` and `L(cutoff) = 1/2`.
    pub fn gaussian_cutoff(grid: &FrequencyGrid, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) {
            return Err(PstError::InvalidParameter(format!(
                "low-pass cutoff must be > 0, got {cutoff}"
            )));
        }
        let ln2 = std::f64::consts::LN_2;
        Ok(Self::from_radial(grid, cutoff, |r| (-(r / cutoff).powi(2) * ln2).exp()))
    }

    /// Gain equivalent to spatial pre-smoothing with a Gaussian of `sigma`
    /// pixels: `L(r) = exp(-2 pi^2 sigma^2 r^2)`.
    pub fn spatial_sigma(grid: &FrequencyGrid, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) {
            return Err(PstError::InvalidParameter(format!(
                "smoothing sigma must be > 0, got {sigma}"
            )));
        }
        let two_pi2 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        // Half-amplitude radius of this Gaussian, recorded as the cutoff.
        let cutoff = (std::f64::consts::LN_2 / (two_pi2 * sigma * sigma)).sqrt();
        Ok(Self::from_radial(grid, cutoff, |r| {
            (-two_pi2 * sigma * sigma * r * r).exp()
        }))
    }

    fn from_radial(grid: &FrequencyGrid, cutoff: f64, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: grid.nx(),
            ny: grid.ny(),
            gain: radial_grid(grid, f),
            cutoff,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn gain(&self) -> &[f64] {
        &self.gain
    }

    /// Half-amplitude radial cutoff in cycles/sample.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }
}

/// Even-order Taylor coefficients `phi^(m)` of the phase profile at `u = 0`.
///
/// `g(x) = x^2/2 - x^4/12 + x^6/30 - ...` gives, for the normalized profile,
/// `phi^(m) = (m-2)! * (-1)^(m/2+1) * S * W^m / g(W r_max)`.
#[derive(Debug, Clone)]
pub struct TaylorCoeffs {
    coeffs: Vec<f64>,
    order: usize,
}

/// Analytic coefficients `[phi^(2), phi^(4), ..., phi^(order)]`.
pub fn taylor_coeffs(warp: f64, strength: f64, r_max: f64, order: usize) -> Result<TaylorCoeffs> {
    if order < 2 || !order.is_multiple_of(2) {
        return Err(PstError::UnsupportedOrder(order));
    }
    // Validate the kernel parameters through the same gate as the profile.
    phase_profile(0.0, warp, strength, r_max)?;
    let norm = strength / warp_profile(warp * r_max);
    let mut coeffs = Vec::with_capacity(order / 2);
    let mut factorial = 1.0; // (m-2)!
    for m in (2..=order).step_by(2) {
        if m > 2 {
            factorial *= ((m - 3) * (m - 2)) as f64;
        }
        let sign = if (m / 2) % 2 == 0 { -1.0 } else { 1.0 };
        coeffs.push(sign * factorial * norm * warp.powi(m as i32));
    }
    Ok(TaylorCoeffs { coeffs, order })
}

impl TaylorCoeffs {
    /// Truncation order `M` (largest `m` present).
    pub fn order(&self) -> usize {
        self.order
    }

    /// `phi^(m)` for even `m <= order`.
    pub fn coefficient(&self, m: usize) -> Result<f64> {
        if m < 2 || !m.is_multiple_of(2) || m > self.order {
            return Err(PstError::UnsupportedOrder(m));
        }
        Ok(self.coeffs[m / 2 - 1])
    }

    /// Iterator over `(m, phi^(m))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, &c)| (2 * (i + 1), c))
    }

    /// Truncated phase `sum_m phi^(m) u^m / m!`.
    pub fn phase_at(&self, u: f64) -> f64 {
        let mut total = 0.0;
        let mut factorial = 1.0;
        for (m, coeff) in self.iter() {
            factorial *= ((m - 1) * m) as f64;
            total += coeff * u.powi(m as i32) / factorial;
        }
        total
    }

    /// Weight `(-1)^(m/2) phi^(m) / (m! (2 pi)^m)` applied to the `m`-th
    /// spectral derivative in the small-phase transfer function.
    pub fn derivative_weight(&self, m: usize) -> Result<f64> {
        let coeff = self.coefficient(m)?;
        let sign = if (m / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut factorial = 1.0;
        for j in 2..=m {
            factorial *= j as f64;
        }
        Ok(sign * coeff / (factorial * (2.0 * std::f64::consts::PI).powi(m as i32)))
    }
}
