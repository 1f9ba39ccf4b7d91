//! Baseline smooth-derivative detector, log pre-equalization, response
//! normalization/thresholding, and the hybrid combination.

use crate::error::{PstError, Result};
use crate::filters;
use crate::transform::{FeatureMap, ImageF, MethodTag};

/// How hybrid inputs are normalized before the per-pixel max is taken.
#[derive(Debug, Clone, Copy)]
pub struct HybridPolicy {
    /// Normalization percentile over each map's magnitudes, in `(0.5, 1]`.
    pub percentile: f64,
}

impl Default for HybridPolicy {
    fn default() -> Self {
        Self { percentile: 0.99 }
    }
}

/// Binary detection mask produced by [`threshold`].
#[derive(Debug, Clone)]
pub struct BinaryMap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<bool>,
}

/// Gradient magnitude from derivative-of-Gaussian responses with the given
/// sigma (pixels).
pub fn smooth_derivative(image: &ImageF, sigma: f64) -> Result<FeatureMap> {
    if !(sigma > 0.0) {
        return Err(PstError::InvalidParameter(format!(
            "derivative sigma must be > 0, got {sigma}"
        )));
    }
    let smooth = filters::gaussian_kernel(sigma);
    let deriv = filters::gaussian_derivative_kernel(sigma);
    let (w, h) = (image.width(), image.height());
    let gx = filters::convolve_cols(
        &filters::convolve_rows(image.samples(), w, h, &deriv),
        w,
        h,
        &smooth,
    );
    let gy = filters::convolve_cols(
        &filters::convolve_rows(image.samples(), w, h, &smooth),
        w,
        h,
        &deriv,
    );
    let magnitude: Vec<f64> = gx
        .iter()
        .zip(&gy)
        .map(|(&x, &y)| x.hypot(y))
        .collect();
    FeatureMap::new(w, h, magnitude, MethodTag::Derivative)
}

/// 1D variant: absolute derivative-of-Gaussian response.
pub fn smooth_derivative_1d(signal: &[f64], sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(PstError::InvalidParameter(format!(
            "derivative sigma must be > 0, got {sigma}"
        )));
    }
    let deriv = filters::gaussian_derivative_kernel(sigma);
    Ok(filters::convolve_mirror_1d(signal, &deriv)
        .iter()
        .map(|v| v.abs())
        .collect())
}

/// Logarithmic brightness equalization `ln(1 + gain*x) / ln(1 + gain)`.
/// Strictly monotone, fixes 0 and 1, and applies the largest gain to the
/// darkest inputs.
pub fn log_equalize(image: &ImageF, gain: f64) -> ImageF {
    assert!(gain > 0.0, "log gain must be positive");
    let norm = gain.ln_1p();
    let samples: Vec<f64> = image
        .samples()
        .iter()
        .map(|&v| ((gain * v).ln_1p() / norm).clamp(0.0, 1.0))
        .collect();
    ImageF::with_max_value(image.width(), image.height(), samples, image.max_value())
        .expect("log equalization preserves the [0, 1] range")
}

/// Linear-interpolation quantile of already-sorted values.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}

/// Divide magnitudes by their `p`-quantile and clip to `[0, 1]`.
///
/// The output holds magnitudes (sign discarded) so maps with incommensurate
/// units can be combined. All-zero maps come back unchanged.
pub fn normalize_robust(map: &FeatureMap, percentile: f64) -> Result<FeatureMap> {
    if !(percentile > 0.5 && percentile <= 1.0) {
        return Err(PstError::InvalidParameter(format!(
            "normalization percentile must be in (0.5, 1], got {percentile}"
        )));
    }
    let mut magnitudes: Vec<f64> = map.values().iter().map(|v| v.abs()).collect();
    let mut sorted = magnitudes.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("feature maps hold finite values"));
    let scale = sorted_quantile(&sorted, percentile);
    if scale > 0.0 {
        magnitudes.iter_mut().for_each(|v| *v = (*v / scale).min(1.0));
    }
    FeatureMap::new(map.width(), map.height(), magnitudes, map.method())
}

/// Per-pixel max of the two robustly normalized magnitude maps.
pub fn hybrid(pst_map: &FeatureMap, deriv_map: &FeatureMap, policy: &HybridPolicy) -> Result<FeatureMap> {
    if pst_map.width() != deriv_map.width() || pst_map.height() != deriv_map.height() {
        return Err(PstError::InvalidSize(format!(
            "map dims {}x{} vs {}x{}",
            pst_map.width(),
            pst_map.height(),
            deriv_map.width(),
            deriv_map.height()
        )));
    }
    let a = normalize_robust(pst_map, policy.percentile)?;
    let b = normalize_robust(deriv_map, policy.percentile)?;
    let combined: Vec<f64> = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| x.max(y))
        .collect();
    FeatureMap::new(pst_map.width(), pst_map.height(), combined, MethodTag::Hybrid)
}

/// Keep pixels whose magnitude lies between the `q_lo` and `q_hi` quantiles
/// of the nonzero magnitudes. The upper bound discards responses from very
/// bright saturated areas.
pub fn threshold(map: &FeatureMap, q_lo: f64, q_hi: f64) -> Result<BinaryMap> {
    if !(0.0..=1.0).contains(&q_lo) || !(0.0..=1.0).contains(&q_hi) || q_lo >= q_hi {
        return Err(PstError::InvalidParameter(format!(
            "quantiles must satisfy 0 <= lo < hi <= 1, got ({q_lo}, {q_hi})"
        )));
    }
    let mut nonzero: Vec<f64> = map
        .values()
        .iter()
        .map(|v| v.abs())
        .filter(|&v| v > 0.0)
        .collect();
    if nonzero.is_empty() {
        return Ok(BinaryMap {
            width: map.width(),
            height: map.height(),
            pixels: vec![false; map.values().len()],
        });
    }
    nonzero.sort_by(|a, b| a.partial_cmp(b).expect("feature maps hold finite values"));
    let lo = sorted_quantile(&nonzero, q_lo);
    let hi = sorted_quantile(&nonzero, q_hi);
    let pixels = map
        .values()
        .iter()
        .map(|v| {
            let m = v.abs();
            m > 0.0 && m >= lo && m <= hi
        })
        .collect();
    Ok(BinaryMap {
        width: map.width(),
        height: map.height(),
        pixels,
    })
}
