//! The stretch operator and PST phase extraction for 1D signals and 2D
//! images, plus boundary padding.

use num_complex::Complex64;

use crate::error::{PstError, Result};
use crate::kernel::{LocalizationKernel, PhaseKernel};
use crate::spectral::{FrequencyGrid, Spectrum};

/// Real-valued intensity field in `[0, 1]`, row-major.
#[derive(Debug, Clone)]
pub struct ImageF {
    width: usize,
    height: usize,
    samples: Vec<f64>,
    /// Declared integer maximum of the source (`2^depth - 1` for 8/14/16-bit
    /// sources); used to reverse the promotion on save.
    max_value: u16,
}

impl ImageF {
    /// Wrap samples, enforcing the `[0, 1]` range invariant.
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        Self::with_max_value(width, height, samples, 255)
    }

    /// As [`ImageF::new`] with a declared source maximum.
    pub fn with_max_value(
        width: usize,
        height: usize,
        samples: Vec<f64>,
        max_value: u16,
    ) -> Result<Self> {
        if width == 0 || height == 0 || samples.len() != width * height {
            return Err(PstError::InvalidSize(format!(
                "image dims {width}x{height} do not match {} samples",
                samples.len()
            )));
        }
        if max_value == 0 {
            return Err(PstError::InvalidParameter("max value must be positive".into()));
        }
        for &s in &samples {
            if !s.is_finite() || !(0.0..=1.0).contains(&s) {
                return Err(PstError::InvalidParameter(format!(
                    "sample {s} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            width,
            height,
            samples,
            max_value,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Declared integer maximum of the source container.
    pub fn max_value(&self) -> u16 {
        self.max_value
    }

    /// Bits needed to represent [`ImageF::max_value`].
    pub fn bit_depth(&self) -> u8 {
        (16 - self.max_value.leading_zeros()) as u8
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }
}

/// Complex output field of the stretch operator.
#[derive(Debug, Clone)]
pub struct ComplexField {
    width: usize,
    height: usize,
    samples: Vec<Complex64>,
}

impl ComplexField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }
}

/// Which detector produced a feature map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodTag {
    Pst,
    Derivative,
    Hybrid,
}

impl MethodTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodTag::Pst => "pst",
            MethodTag::Derivative => "derivative",
            MethodTag::Hybrid => "hybrid",
        }
    }
}

/// Per-pixel real detection response.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    method: MethodTag,
    value_range: (f64, f64),
}

impl FeatureMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>, method: MethodTag) -> Result<Self> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(PstError::InvalidSize(format!(
                "feature map dims {width}x{height} do not match {} values",
                values.len()
            )));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok(Self {
            width,
            height,
            values,
            method,
            value_range: (lo, hi),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn method(&self) -> MethodTag {
        self.method
    }

    /// `(min, max)` over all values.
    pub fn value_range(&self) -> (f64, f64) {
        self.value_range
    }

    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Boundary extension mode for the FFT pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadMode {
    /// Reflect without repeating the edge sample: `[1,2,3]` + width 2 gives
    /// `[3,2,1,2,3,2,1]`.
    Mirror,
    /// Wrap around the opposite edge.
    Periodic,
    /// Extend with zeros.
    Zero,
}

/// Localization (low-pass) specification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lpf {
    /// Half-amplitude radial cutoff in cycles/sample, applied in frequency
    /// domain.
    FrequencyCutoff(f64),
    /// Gaussian pre-smoothing sigma in pixels, applied through its exact
    /// frequency response.
    SpatialSigma(f64),
}

/// All transform tunables.
#[derive(Debug, Clone)]
pub struct PstConfig {
    /// Warp parameter W of the phase kernel.
    pub warp: f64,
    /// Strength S: peak applied phase in radians.
    pub strength: f64,
    /// Optional localization kernel; `None` leaves the spectrum unfiltered.
    pub lpf: Option<Lpf>,
    pub pad_mode: PadMode,
    /// Explicit pad width; `None` selects `max(16, n/8)` per axis, clamped
    /// to `n - 1`.
    pub pad_width: Option<usize>,
    /// Taylor truncation order used by the analytic oracles.
    pub taylor_order: usize,
    /// Denominator floor as a fraction of the maximum intensity.
    pub epsilon: f64,
    /// Threshold quantiles `(q_lo, q_hi)`.
    pub quantiles: (f64, f64),
}

impl PstConfig {
    pub fn new(warp: f64, strength: f64) -> Self {
        Self {
            warp,
            strength,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.warp > 0.0) {
            return Err(PstError::InvalidParameter(format!(
                "warp must be > 0, got {}",
                self.warp
            )));
        }
        if !(self.strength >= 0.0) {
            return Err(PstError::InvalidParameter(format!(
                "strength must be >= 0, got {}",
                self.strength
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(PstError::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        let (lo, hi) = self.quantiles;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo >= hi {
            return Err(PstError::InvalidParameter(format!(
                "quantiles must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})"
            )));
        }
        if self.taylor_order < 2 || !self.taylor_order.is_multiple_of(2) {
            return Err(PstError::UnsupportedOrder(self.taylor_order));
        }
        match self.lpf {
            Some(Lpf::FrequencyCutoff(c)) if !(c > 0.0) => Err(PstError::InvalidParameter(
                format!("low-pass cutoff must be > 0, got {c}"),
            )),
            Some(Lpf::SpatialSigma(s)) if !(s > 0.0) => Err(PstError::InvalidParameter(
                format!("smoothing sigma must be > 0, got {s}"),
            )),
            _ => Ok(()),
        }
    }

    /// Pad width for an axis of `n` samples.
    pub fn resolve_pad_width(&self, n: usize) -> Result<usize> {
        match self.pad_width {
            Some(w) => {
                if w >= n {
                    Err(PstError::InvalidParameter(format!(
                        "pad width {w} must be smaller than the {n}-sample axis"
                    )))
                } else {
                    Ok(w)
                }
            }
            None => Ok(16.max(n / 8).min(n - 1)),
        }
    }
}

impl Default for PstConfig {
    fn default() -> Self {
        Self {
            warp: 12.15,
            strength: 0.48,
            lpf: None,
            pad_mode: PadMode::Mirror,
            pad_width: None,
            taylor_order: 6,
            epsilon: 1e-6,
            quantiles: (0.9, 1.0),
        }
    }
}

/// Sentinel in a padding index map marking a zero-filled sample.
const ZERO_PAD: usize = usize::MAX;

/// Source index for every sample of a padded axis; `ZERO_PAD` marks zeros.
fn pad_index_map(n: usize, mode: PadMode, width: usize) -> Result<Vec<usize>> {
    if width >= n && width > 0 {
        return Err(PstError::InvalidParameter(format!(
            "pad width {width} must be smaller than the {n}-sample axis"
        )));
    }
    let mut map = Vec::with_capacity(n + 2 * width);
    for i in 0..width {
        map.push(match mode {
            PadMode::Mirror => width - i,
            PadMode::Periodic => n - width + i,
            PadMode::Zero => ZERO_PAD,
        });
    }
    map.extend(0..n);
    for i in 0..width {
        map.push(match mode {
            PadMode::Mirror => n - 2 - i,
            PadMode::Periodic => i,
            PadMode::Zero => ZERO_PAD,
        });
    }
    Ok(map)
}

/// Pad a 1D signal on both sides.
pub fn pad_1d(x: &[f64], mode: PadMode, width: usize) -> Result<Vec<f64>> {
    let map = pad_index_map(x.len(), mode, width)?;
    Ok(map
        .iter()
        .map(|&i| if i == ZERO_PAD { 0.0 } else { x[i] })
        .collect())
}

/// Undo [`pad_1d`].
pub fn crop_1d(x: &[f64], width: usize) -> Vec<f64> {
    x[width..x.len() - width].to_vec()
}

/// Pad a row-major 2D field by `wx` columns and `wy` rows.
pub fn pad_2d(
    data: &[f64],
    width: usize,
    height: usize,
    mode: PadMode,
    wx: usize,
    wy: usize,
) -> Result<Vec<f64>> {
    if data.len() != width * height {
        return Err(PstError::InvalidSize(format!(
            "field dims {width}x{height} do not match {} samples",
            data.len()
        )));
    }
    let xmap = pad_index_map(width, mode, wx)?;
    let ymap = pad_index_map(height, mode, wy)?;
    let mut out = Vec::with_capacity(xmap.len() * ymap.len());
    for &sy in &ymap {
        if sy == ZERO_PAD {
            out.extend(std::iter::repeat_n(0.0, xmap.len()));
            continue;
        }
        let row = &data[sy * width..(sy + 1) * width];
        out.extend(xmap.iter().map(|&sx| if sx == ZERO_PAD { 0.0 } else { row[sx] }));
    }
    Ok(out)
}

/// Undo [`pad_2d`].
pub fn crop_2d(data: &[f64], padded_width: usize, wx: usize, wy: usize, width: usize, height: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(width * height);
    for y in 0..height {
        let start = (y + wy) * padded_width + wx;
        out.extend_from_slice(&data[start..start + width]);
    }
    out
}

/// Apply the stretch operator: `inverse(K * L * forward(input))`, 1D.
pub fn stretch_1d(
    signal: &[f64],
    kernel: &PhaseKernel,
    lpf: Option<&LocalizationKernel>,
) -> Result<Vec<Complex64>> {
    if kernel.ny() != 1 || kernel.nx() != signal.len() {
        return Err(PstError::InvalidSize(format!(
            "kernel grid {}x{} does not match signal length {}",
            kernel.nx(),
            kernel.ny(),
            signal.len()
        )));
    }
    if let Some(l) = lpf {
        if l.nx() != kernel.nx() || l.ny() != kernel.ny() {
            return Err(PstError::InvalidSize(
                "localization kernel dims do not match phase kernel".into(),
            ));
        }
    }
    let mut spec = Spectrum::forward_1d(signal)?;
    apply_kernels(spec.bins_mut(), kernel, lpf);
    Ok(spec.inverse())
}

/// Apply the stretch operator to a row-major 2D field.
pub fn stretch_2d(
    data: &[f64],
    width: usize,
    height: usize,
    kernel: &PhaseKernel,
    lpf: Option<&LocalizationKernel>,
) -> Result<ComplexField> {
    if kernel.nx() != width || kernel.ny() != height {
        return Err(PstError::InvalidSize(format!(
            "kernel grid {}x{} does not match field {width}x{height}",
            kernel.nx(),
            kernel.ny()
        )));
    }
    if let Some(l) = lpf {
        if l.nx() != width || l.ny() != height {
            return Err(PstError::InvalidSize(
                "localization kernel dims do not match phase kernel".into(),
            ));
        }
    }
    let mut spec = Spectrum::forward_2d(data, width, height)?;
    apply_kernels(spec.bins_mut(), kernel, lpf);
    Ok(ComplexField {
        width,
        height,
        samples: spec.inverse(),
    })
}

fn apply_kernels(bins: &mut [Complex64], kernel: &PhaseKernel, lpf: Option<&LocalizationKernel>) {
    match lpf {
        Some(l) => {
            for ((bin, &phi), &gain) in bins.iter_mut().zip(kernel.phase()).zip(l.gain()) {
                let (sin, cos) = phi.sin_cos();
                *bin *= Complex64::new(cos * gain, sin * gain);
            }
        }
        None => {
            for (bin, &phi) in bins.iter_mut().zip(kernel.phase()) {
                let (sin, cos) = phi.sin_cos();
                *bin *= Complex64::new(cos, sin);
            }
        }
    }
}

/// Angle of a complex sample, with `angle(0) = 0` and range `(-pi, pi]`.
pub fn complex_angle(c: Complex64) -> f64 {
    if c.im == 0.0 && c.re == 0.0 {
        return 0.0;
    }
    let theta = c.im.atan2(c.re);
    if theta == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        theta
    }
}

fn build_lpf(grid: &FrequencyGrid, lpf: Option<Lpf>) -> Result<Option<LocalizationKernel>> {
    Ok(match lpf {
        None => None,
        Some(Lpf::FrequencyCutoff(c)) => Some(LocalizationKernel::gaussian_cutoff(grid, c)?),
        Some(Lpf::SpatialSigma(s)) => Some(LocalizationKernel::spatial_sigma(grid, s)?),
    })
}

/// PST of a 2D image: pad, stretch, take the per-pixel angle, crop.
///
/// Equivalent to composing [`pad_2d`], [`stretch_2d`], [`complex_angle`] and
/// [`crop_2d`], but fused: the spectrum is kept in transposed layout between
/// the two transform passes (saving two transposes), the kernels are built
/// directly in that layout, and angles are only taken on the cropped region.
/// The inverse normalization is skipped entirely since a positive scale
/// factor cannot change a phase angle.
pub fn pst2d(image: &ImageF, cfg: &PstConfig) -> Result<FeatureMap> {
    cfg.validate()?;
    let wx = cfg.resolve_pad_width(image.width())?;
    let wy = cfg.resolve_pad_width(image.height())?;
    let padded = pad_2d(image.samples(), image.width(), image.height(), cfg.pad_mode, wx, wy)?;
    let (pw, ph) = (image.width() + 2 * wx, image.height() + 2 * wy);
    // A grid with swapped axes evaluates to the transposed kernel: the phase
    // depends on the radius only and both axes use the same bin layout.
    let grid_t = FrequencyGrid::two_dim(ph, pw)?;
    let kernel_t = PhaseKernel::build(&grid_t, cfg.warp, cfg.strength)?;
    let lpf_t = build_lpf(&grid_t, cfg.lpf)?;
    let gain_t = kernel_t.complex_gain(lpf_t.as_ref());
    let field = crate::spectral::filtered_roundtrip_2d(&padded, pw, ph, &gain_t);

    let mut values = Vec::with_capacity(image.width() * image.height());
    for y in 0..image.height() {
        let start = (y + wy) * pw + wx;
        values.extend(field[start..start + image.width()].iter().map(|&c| complex_angle(c)));
    }
    FeatureMap::new(image.width(), image.height(), values, MethodTag::Pst)
}

/// Band-limit a 1D signal with the exact frequency response of a Gaussian of
/// `sigma` samples (no kernel truncation, periodic boundaries). `sigma = 0`
/// is the identity.
pub fn presmooth_1d(signal: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if sigma == 0.0 {
        return Ok(signal.to_vec());
    }
    let grid = FrequencyGrid::one_dim(signal.len())?;
    let lpf = LocalizationKernel::spatial_sigma(&grid, sigma)?;
    let mut spec = Spectrum::forward_1d(signal)?;
    for (bin, &g) in spec.bins_mut().iter_mut().zip(lpf.gain()) {
        *bin *= g;
    }
    Ok(spec.inverse().iter().map(|c| c.re).collect())
}

/// PST of a 1D signal.
pub fn pst1d(signal: &[f64], cfg: &PstConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let w = cfg.resolve_pad_width(signal.len())?;
    let padded = pad_1d(signal, cfg.pad_mode, w)?;
    let grid = FrequencyGrid::one_dim(padded.len())?;
    let kernel = PhaseKernel::build(&grid, cfg.warp, cfg.strength)?;
    let lpf = build_lpf(&grid, cfg.lpf)?;
    let field = stretch_1d(&padded, &kernel, lpf.as_ref())?;
    let angles: Vec<f64> = field.iter().map(|&c| complex_angle(c)).collect();
    Ok(crop_1d(&angles, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::kernel::taylor_coeffs;

    #[test]
    fn pad_mirror_matches_stated_reflection() {
        let padded = pad_1d(&[1.0, 2.0, 3.0], PadMode::Mirror, 2).unwrap();
        assert_eq!(padded, vec![3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn pad_width_zero_is_identity() {
        let x = [4.0, 5.0, 6.0];
        assert_eq!(pad_1d(&x, PadMode::Mirror, 0).unwrap(), x.to_vec());
    }

    #[test]
    fn pad_periodic_and_zero_modes() {
        assert_eq!(
            pad_1d(&[1.0, 2.0, 3.0], PadMode::Periodic, 2).unwrap(),
            vec![2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0]
        );
        assert_eq!(
            pad_1d(&[1.0, 2.0, 3.0], PadMode::Zero, 1).unwrap(),
            vec![0.0, 1.0, 2.0, 3.0, 0.0]
        );
    }

    #[test]
    fn crop_inverts_pad() {
        let x: Vec<f64> = (0..23).map(|i| (i as f64 * 0.7).sin().abs()).collect();
        for mode in [PadMode::Mirror, PadMode::Periodic, PadMode::Zero] {
            let padded = pad_1d(&x, mode, 7).unwrap();
            assert_eq!(crop_1d(&padded, 7), x);
        }
    }

    #[test]
    fn pad_rejects_width_at_least_signal_length() {
        assert!(matches!(
            pad_1d(&[1.0, 2.0, 3.0], PadMode::Mirror, 3),
            Err(PstError::InvalidParameter(_))
        ));
    }

    #[test]
    fn pad_2d_round_trip() {
        let (w, h) = (5usize, 4usize);
        let data: Vec<f64> = (0..w * h).map(|i| (i % 7) as f64 / 7.0).collect();
        for mode in [PadMode::Mirror, PadMode::Periodic] {
            let padded = pad_2d(&data, w, h, mode, 2, 3).unwrap();
            assert_eq!(padded.len(), (w + 4) * (h + 6));
            assert_eq!(crop_2d(&padded, w + 4, 2, 3, w, h), data);
        }
    }

    #[test]
    fn stretch_identity_when_strength_zero() {
        let x: Vec<f64> = (0..32).map(|i| 0.2 + 0.01 * (i % 5) as f64).collect();
        let grid = FrequencyGrid::one_dim(32).unwrap();
        let kernel = PhaseKernel::build(&grid, 3.0, 0.0).unwrap();
        let out = stretch_1d(&x, &kernel, None).unwrap();
        for (c, &xi) in out.iter().zip(&x) {
            assert!((c.re - xi).abs() <= 1e-12);
            assert!(c.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn stretch_preserves_constants() {
        let x = vec![0.7; 24];
        let grid = FrequencyGrid::one_dim(24).unwrap();
        let kernel = PhaseKernel::build(&grid, 9.0, 2.0).unwrap();
        let lpf = LocalizationKernel::gaussian_cutoff(&grid, 0.2).unwrap();
        let out = stretch_1d(&x, &kernel, Some(&lpf)).unwrap();
        for c in &out {
            assert!((c.re - 0.7).abs() <= 1e-12);
            assert!(c.im.abs() <= 1e-12);
        }
    }

    #[test]
    fn stretch_impulse_matches_linearized_oracle_for_small_strength() {
        // Direct evaluation of the small-phase expansion, term by term, as an
        // oracle for the full exponential-kernel transform. The warp stays
        // small so the Taylor series converges over the whole band.
        let n = 64;
        let mut x = vec![0.0; n];
        x[n / 2] = 1.0;
        let s = 0.01;
        let grid = FrequencyGrid::one_dim(n).unwrap();
        let kernel = PhaseKernel::build(&grid, 1.5, s).unwrap();
        let out = stretch_1d(&x, &kernel, None).unwrap();

        let coeffs = taylor_coeffs(1.5, s, grid.max_radius(), 8).unwrap();
        let mut spec = Spectrum::forward_1d(&x).unwrap();
        let u = crate::spectral::frequency_axis(n);
        for (bin, &uk) in spec.bins_mut().iter_mut().zip(&u) {
            *bin *= Complex64::new(1.0, coeffs.phase_at(uk));
        }
        let oracle = spec.inverse();

        let peak = out.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        for (a, b) in out.iter().zip(&oracle) {
            assert!((a - b).norm() <= 0.01 * peak);
        }
    }

    #[test]
    fn stretch_rejects_dim_mismatch() {
        let grid = FrequencyGrid::one_dim(16).unwrap();
        let kernel = PhaseKernel::build(&grid, 2.0, 1.0).unwrap();
        assert!(matches!(
            stretch_1d(&[0.5; 20], &kernel, None),
            Err(PstError::InvalidSize(_))
        ));
    }

    #[test]
    fn pst2d_of_constant_image_is_zero() {
        let image = ImageF::new(24, 18, vec![0.6; 24 * 18]).unwrap();
        let map = pst2d(&image, &PstConfig::default()).unwrap();
        assert!(map.values().iter().all(|&v| v.abs() <= 1e-12));
    }

    #[test]
    fn pst2d_matches_composed_pipeline() {
        // The fused implementation must agree with the plain composition of
        // pad, stretch, angle and crop.
        let (w, h) = (30usize, 22usize);
        let samples: Vec<f64> = (0..w * h)
            .map(|i| 0.1 + 0.7 * (((i * 29 + 17) % 83) as f64 / 83.0))
            .collect();
        let image = ImageF::new(w, h, samples).unwrap();
        let mut cfg = PstConfig::new(9.0, 0.7);
        cfg.lpf = Some(Lpf::SpatialSigma(1.5));
        cfg.pad_width = Some(8);
        let fused = pst2d(&image, &cfg).unwrap();

        let padded = pad_2d(image.samples(), w, h, cfg.pad_mode, 8, 8).unwrap();
        let (pw, ph) = (w + 16, h + 16);
        let grid = FrequencyGrid::two_dim(pw, ph).unwrap();
        let kernel = PhaseKernel::build(&grid, cfg.warp, cfg.strength).unwrap();
        let lpf = LocalizationKernel::spatial_sigma(&grid, 1.5).unwrap();
        let field = stretch_2d(&padded, pw, ph, &kernel, Some(&lpf)).unwrap();
        let angles: Vec<f64> = field.samples().iter().map(|&c| complex_angle(c)).collect();
        let composed = crop_2d(&angles, pw, 8, 8, w, h);
        for (a, b) in fused.values().iter().zip(&composed) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn pst2d_is_invariant_under_positive_scaling() {
        let (w, h) = (20usize, 16usize);
        let samples: Vec<f64> = (0..w * h)
            .map(|i| 0.01 + 0.08 * (((i * 37 + 11) % 64) as f64 / 64.0))
            .collect();
        let image = ImageF::new(w, h, samples.clone()).unwrap();
        let cfg = PstConfig::default();
        let base = pst2d(&image, &cfg).unwrap();
        for alpha in [0.5, 2.0, 10.0] {
            let scaled_samples: Vec<f64> = samples.iter().map(|&s| alpha * s).collect();
            let scaled = ImageF::new(w, h, scaled_samples).unwrap();
            let map = pst2d(&scaled, &cfg).unwrap();
            for (a, b) in map.values().iter().zip(base.values()) {
                assert!((a - b).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn pst2d_output_range_is_half_open_pi_interval() {
        let (w, h) = (32usize, 32usize);
        let samples: Vec<f64> = (0..w * h)
            .map(|i| 0.05 + 0.9 * (((i * 13 + 3) % 97) as f64 / 97.0))
            .collect();
        let image = ImageF::new(w, h, samples).unwrap();
        let cfg = PstConfig { strength: 50.0, ..PstConfig::default() };
        let map = pst2d(&image, &cfg).unwrap();
        for &v in map.values() {
            assert!(v > -std::f64::consts::PI && v <= std::f64::consts::PI);
        }
    }

    #[test]
    fn pst1d_of_constant_signal_is_zero() {
        let out = pst1d(&vec![0.4; 200], &PstConfig::default()).unwrap();
        assert!(out.iter().all(|&v| v.abs() <= 1e-12));
    }

    #[test]
    fn vertical_step_matches_1d_path_on_center_row() {
        // A y-constant image must reproduce the 1D result row by row. The
        // kernel pins its peak phase at the grid's own maximum radius, which
        // differs between the 2D grid (diagonal) and the 1D grid (0.5), so
        // the 1D run rescales its strength to apply the identical profile.
        let n = 128;
        let profile: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 - 64.0) / 4.0;
                0.2 + 0.4 / (1.0 + (-t).exp())
            })
            .collect();
        let rows = 48;
        let mut samples = Vec::with_capacity(n * rows);
        for _ in 0..rows {
            samples.extend_from_slice(&profile);
        }
        let image = ImageF::new(n, rows, samples).unwrap();
        let mut cfg = PstConfig::new(12.15, 0.05);
        cfg.pad_width = Some(16);
        let map2d = pst2d(&image, &cfg).unwrap();

        let r2_max = 0.5f64.hypot(0.5);
        let mut cfg1 = cfg.clone();
        cfg1.strength =
            cfg.strength * crate::kernel::phase_profile(0.5, cfg.warp, 1.0, r2_max).unwrap();
        let line = pst1d(&profile, &cfg1).unwrap();
        for (x, &expected) in line.iter().enumerate() {
            assert!((map2d.at(x, rows / 2) - expected).abs() <= 1e-6);
        }
    }

    #[test]
    fn inverted_contrast_flips_response_sign() {
        // 32-sample smoothed step and its inverted-contrast version.
        let n = 32;
        let step: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 - 16.0) / 1.5;
                0.2 + 0.3 / (1.0 + (-t).exp())
            })
            .collect();
        let max = step.iter().cloned().fold(0.0f64, f64::max);
        let flipped: Vec<f64> = step.iter().map(|&v| -v + 2.0 * max).collect();
        let mut cfg = PstConfig::new(12.15, 0.05);
        cfg.pad_width = Some(8);
        let a = pst1d(&step, &cfg).unwrap();
        let b = pst1d(&flipped, &cfg).unwrap();
        let peak_idx = a
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
            .unwrap()
            .0;
        assert!(a[peak_idx] * b[peak_idx] < 0.0);
    }

    #[test]
    fn shift_equivariance_with_periodic_processing() {
        let n = 96;
        let signal: Vec<f64> = (0..n)
            .map(|i| {
                let t = (i as f64 - 40.0) / 6.0;
                0.3 + 0.4 * (-t * t / 2.0).exp()
            })
            .collect();
        let mut cfg = PstConfig::new(10.0, 0.3);
        cfg.pad_mode = PadMode::Periodic;
        cfg.pad_width = Some(0);
        let base = pst1d(&signal, &cfg).unwrap();
        let shift = 17;
        let shifted: Vec<f64> = (0..n).map(|i| signal[(i + n - shift) % n]).collect();
        let out = pst1d(&shifted, &cfg).unwrap();
        for i in 0..n {
            assert!((out[(i + shift) % n] - base[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn lpf_frequency_and_presmoothing_paths_agree() {
        let n = 80;
        let signal: Vec<f64> = (0..n)
            .map(|i| 0.3 + 0.2 * ((i as f64) * 0.21).sin() + 0.1 * ((i as f64) * 0.77).cos())
            .collect();
        let grid = FrequencyGrid::one_dim(n).unwrap();
        let kernel = PhaseKernel::build(&grid, 8.0, 0.4).unwrap();
        let lpf = LocalizationKernel::spatial_sigma(&grid, 2.0).unwrap();

        // Canonical path: K and L in one pass.
        let combined = stretch_1d(&signal, &kernel, Some(&lpf)).unwrap();

        // Alternate path: smooth first, then apply K alone.
        let mut spec = Spectrum::forward_1d(&signal).unwrap();
        for (bin, &g) in spec.bins_mut().iter_mut().zip(lpf.gain()) {
            *bin *= g;
        }
        let smoothed: Vec<f64> = spec.inverse().iter().map(|c| c.re).collect();
        let two_pass = stretch_1d(&smoothed, &kernel, None).unwrap();

        for (a, b) in combined.iter().zip(&two_pass) {
            assert!((a - b).norm() <= 1e-9);
        }
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let bad = [
            PstConfig { warp: -1.0, ..PstConfig::default() },
            PstConfig { quantiles: (0.8, 0.8), ..PstConfig::default() },
            PstConfig { taylor_order: 5, ..PstConfig::default() },
            PstConfig { lpf: Some(Lpf::SpatialSigma(0.0)), ..PstConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn small_phase_oracle_agreement_for_bounded_inputs() {
        // max|phi| <= 0.05 rad and min intensity >= 0.1: the numerical PST
        // stays within 5% of the oracle's peak. The input is band-limited
        // (circle harmonics) so the Taylor-expanded oracle is valid over the
        // whole occupied band.
        let n = 256;
        let signal: Vec<f64> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                0.4 + 0.15 * (2.0 * t).cos() + 0.1 * (5.0 * t).sin() + 0.05 * (9.0 * t).cos()
            })
            .collect();
        let mut cfg = PstConfig::new(12.5, 0.05);
        cfg.pad_mode = PadMode::Periodic;
        cfg.pad_width = Some(0);
        let numerical = pst1d(&signal, &cfg).unwrap();
        let coeffs = taylor_coeffs(12.5, 0.05, 0.5, 6).unwrap();
        let oracle = analytic::pst_smallphase(&signal, &coeffs, 1e-6).unwrap();
        let peak = oracle.values.iter().cloned().fold(0.0f64, |m, v| m.max(v.abs()));
        for (n_v, o_v) in numerical.iter().zip(&oracle.values) {
            assert!((n_v - o_v).abs() <= 0.05 * peak);
        }
    }

    #[test]
    fn image_constructor_validates_range() {
        assert!(ImageF::new(2, 2, vec![0.0, 0.5, 1.0, 1.1]).is_err());
        assert!(ImageF::new(2, 2, vec![0.0, 0.5, 1.0, f64::NAN]).is_err());
        assert!(ImageF::new(3, 2, vec![0.0; 5]).is_err());
    }

    #[test]
    fn complex_angle_conventions() {
        // Zero magnitude (any zero signs) is defined as angle 0.
        assert_eq!(complex_angle(Complex64::new(0.0, 0.0)), 0.0);
        assert_eq!(complex_angle(Complex64::new(-0.0, 0.0)), 0.0);
        // atan2(-0, -1) would be -pi; the range is (-pi, pi].
        assert_eq!(complex_angle(Complex64::new(-1.0, -0.0)), std::f64::consts::PI);
        assert!(complex_angle(Complex64::new(0.0, 1.0)) > 0.0);
    }
}
