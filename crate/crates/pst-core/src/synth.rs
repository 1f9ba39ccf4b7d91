//! Deterministic synthetic inputs with edge ground truth: a smooth pulse, a
//! contrast staircase, an HDR test card, and line-scan extraction.

use crate::error::{PstError, Result};
use crate::filters;
use crate::transform::ImageF;

/// Test-card region an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Dark,
    Bright,
    Ramp,
}

impl Region {
    pub fn as_str(&self) -> &'static str {
        match self {
            Region::Dark => "dark",
            Region::Bright => "bright",
            Region::Ramp => "ramp",
        }
    }
}

/// Where an edge sits: a 1D sample index or a vertical pixel segment
/// (transition column `x`, rows `y0..y1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLocation {
    Sample(usize),
    Segment { x: usize, y0: usize, y1: usize },
}

/// One known edge with its nominal contrast and base brightness.
#[derive(Debug, Clone)]
pub struct Edge {
    pub location: EdgeLocation,
    pub contrast: f64,
    pub base: f64,
    pub region: Option<Region>,
}

/// All known edges of a generated input.
#[derive(Debug, Clone, Default)]
pub struct EdgeGroundTruth {
    pub edges: Vec<Edge>,
}

impl EdgeGroundTruth {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    fn validate(&self, width: usize, height: usize) {
        for edge in &self.edges {
            debug_assert!(edge.contrast > 0.0);
            debug_assert!(edge.base + edge.contrast <= 1.0 + 1e-12);
            match edge.location {
                EdgeLocation::Sample(i) => debug_assert!(i < width),
                EdgeLocation::Segment { x, y0, y1 } => {
                    debug_assert!(x < width && y0 < y1 && y1 <= height);
                }
            }
        }
    }
}

/// Raised-cosine pulse on a constant base. Ground truth marks the two flank
/// midpoints (half-amplitude crossings).
pub fn smooth_pulse(
    n: usize,
    center: f64,
    width: f64,
    amplitude: f64,
    base: f64,
) -> Result<(Vec<f64>, EdgeGroundTruth)> {
    if n < 2 {
        return Err(PstError::InvalidSize(format!("pulse needs at least 2 samples, got {n}")));
    }
    if !(width > 0.0) || width >= n as f64 {
        return Err(PstError::InvalidParameter(format!(
            "pulse width must be in (0, {n}), got {width}"
        )));
    }
    if !(base >= 0.0) || !(amplitude >= 0.0) || base + amplitude > 1.0 {
        return Err(PstError::InvalidParameter(format!(
            "need base >= 0, amplitude >= 0, base + amplitude <= 1; got {base}, {amplitude}"
        )));
    }
    let signal: Vec<f64> = (0..n)
        .map(|k| {
            let d = k as f64 - center;
            if d.abs() <= width / 2.0 {
                base + amplitude * 0.5 * (1.0 + (2.0 * std::f64::consts::PI * d / width).cos())
            } else {
                base
            }
        })
        .collect();
    let mut gt = EdgeGroundTruth::default();
    if amplitude > 0.0 {
        for flank in [center - width / 4.0, center + width / 4.0] {
            let i = flank.round().clamp(0.0, (n - 1) as f64) as usize;
            gt.edges.push(Edge {
                location: EdgeLocation::Sample(i),
                contrast: amplitude,
                base,
                region: None,
            });
        }
    }
    gt.validate(n, 1);
    Ok((signal, gt))
}

/// Resetting staircase: each step rises from the common base to
/// `base + contrast` and returns. Edges are smoothed with a Gaussian of
/// `sigma` samples (0 disables smoothing). Ground truth lists every rising
/// and falling edge.
pub fn staircase(
    n: usize,
    contrasts: &[f64],
    base: f64,
    sigma: f64,
) -> Result<(Vec<f64>, EdgeGroundTruth)> {
    if n < 2 {
        return Err(PstError::InvalidSize(format!(
            "staircase needs at least 2 samples, got {n}"
        )));
    }
    if !(sigma >= 0.0) {
        return Err(PstError::InvalidParameter(format!("sigma must be >= 0, got {sigma}")));
    }
    let max_contrast = contrasts.iter().cloned().fold(0.0f64, f64::max);
    if contrasts.iter().any(|&c| !(c > 0.0)) {
        return Err(PstError::InvalidParameter("every contrast must be > 0".into()));
    }
    if !(base >= 0.0) || base + max_contrast > 1.0 {
        return Err(PstError::InvalidParameter(format!(
            "base {base} + max contrast {max_contrast} exceeds [0, 1]"
        )));
    }

    let mut signal = vec![base; n];
    let mut gt = EdgeGroundTruth::default();
    if !contrasts.is_empty() {
        let segments = 2 * contrasts.len() + 1;
        if n < segments * 2 {
            return Err(PstError::InvalidSize(format!(
                "{n} samples is too short for {} steps",
                contrasts.len()
            )));
        }
        let boundary = |i: usize| -> usize { (i as f64 * n as f64 / segments as f64).round() as usize };
        for (j, &c) in contrasts.iter().enumerate() {
            let rise = boundary(2 * j + 1);
            let fall = boundary(2 * j + 2);
            for s in &mut signal[rise..fall] {
                *s = base + c;
            }
            for position in [rise, fall] {
                gt.edges.push(Edge {
                    location: EdgeLocation::Sample(position),
                    contrast: c,
                    base,
                    region: None,
                });
            }
        }
    }
    if sigma > 0.0 {
        signal = filters::convolve_mirror_1d(&signal, &filters::gaussian_kernel(sigma));
        signal.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    }
    gt.validate(n, 1);
    Ok((signal, gt))
}

const CARD_DARK_BASE: f64 = 0.02;
const CARD_DARK_CONTRAST: f64 = 0.01;
const CARD_BRIGHT_BASE: f64 = 0.9;
const CARD_BRIGHT_CONTRAST: f64 = 0.05;
const CARD_RAMP_CONTRAST: f64 = 0.05;
const CARD_BLANK: f64 = 0.5;
const CARD_SMOOTH_SIGMA: f64 = 1.0;

/// Bar geometry inside one quadrant: (x0, x1, y0, y1) per bar, in image
/// coordinates.
fn quadrant_bars(ox: usize, oy: usize, qw: usize, qh: usize) -> Vec<(usize, usize, usize, usize)> {
    let bar_width = (qw / 16).max(2);
    let y0 = oy + qh / 5;
    let y1 = oy + 4 * qh / 5;
    (1..=3)
        .map(|i| {
            let cx = ox + i * qw / 4;
            let x0 = cx - bar_width / 2;
            (x0, x0 + bar_width, y0, y1)
        })
        .collect()
}

/// Four-quadrant high-dynamic-range test card:
/// dark low-contrast bars (top-left), bright bars (top-right), a brightness
/// ramp with fixed-contrast bars (bottom-left), and a blank mid-gray control
/// (bottom-right). The dark bars have a much larger *relative* contrast
/// (0.01/0.02) than the bright bars (0.05/0.9), so a brightness-equalizing
/// detector favors them while a plain derivative favors the bright ones.
pub fn hdr_testcard(width: usize, height: usize) -> Result<(ImageF, EdgeGroundTruth)> {
    if width < 64 || height < 64 {
        return Err(PstError::InvalidParameter(format!(
            "test card needs at least 64x64, got {width}x{height}"
        )));
    }
    let (qw, qh) = (width / 2, height / 2);
    let mut samples = vec![CARD_BLANK; width * height];

    // Flat bases.
    for y in 0..qh {
        for x in 0..qw {
            samples[y * width + x] = CARD_DARK_BASE;
        }
        for x in qw..width {
            samples[y * width + x] = CARD_BRIGHT_BASE;
        }
    }
    // Ramp: brightness slowly decreases left to right, with a slight
    // vertical tilt so quantized levels stay dense.
    for y in qh..height {
        let v = (y - qh) as f64 / (height - qh - 1) as f64;
        for x in 0..qw {
            let u = x as f64 / (qw - 1) as f64;
            let t = (u + 0.1 * v) / 1.1;
            samples[y * width + x] = 0.9 - 0.8 * t;
        }
    }

    let mut gt = EdgeGroundTruth::default();
    let paint = |ox: usize,
                     oy: usize,
                     contrast: f64,
                     region: Region,
                     samples: &mut Vec<f64>,
                     gt: &mut EdgeGroundTruth| {
        for (x0, x1, y0, y1) in quadrant_bars(ox, oy, qw, qh) {
            let mut base_sum = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    base_sum += samples[y * width + x];
                    samples[y * width + x] += contrast;
                }
            }
            let base = base_sum / ((y1 - y0) * (x1 - x0)) as f64;
            for x in [x0, x1] {
                gt.edges.push(Edge {
                    location: EdgeLocation::Segment { x, y0, y1 },
                    contrast,
                    base,
                    region: Some(region),
                });
            }
        }
    };
    paint(0, 0, CARD_DARK_CONTRAST, Region::Dark, &mut samples, &mut gt);
    paint(qw, 0, CARD_BRIGHT_CONTRAST, Region::Bright, &mut samples, &mut gt);
    paint(0, qh, CARD_RAMP_CONTRAST, Region::Ramp, &mut samples, &mut gt);

    let smoothed = filters::gaussian_blur_2d(&samples, width, height, CARD_SMOOTH_SIGMA);
    let clamped: Vec<f64> = smoothed.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    gt.validate(width, height);
    let image = ImageF::with_max_value(width, height, clamped, 16383)?;
    Ok((image, gt))
}

/// Copy one row of an image as a 1D signal.
pub fn line_scan(image: &ImageF, row: usize) -> Result<Vec<f64>> {
    if row >= image.height() {
        return Err(PstError::InvalidIndex(format!(
            "row {row} out of bounds for height {}",
            image.height()
        )));
    }
    Ok(image.row(row).to_vec())
}

/// Peak `|response|` in a +-`window` neighborhood of each ground-truth edge.
/// 1D responses use sample locations; 2D maps take the per-row ridge maximum
/// over the segment and return its minimum, mean or per-edge peak depending
/// on the caller's aggregation.
pub fn edge_peak_1d(response: &[f64], gt: &EdgeGroundTruth, window: usize) -> Vec<f64> {
    gt.edges
        .iter()
        .filter_map(|edge| match edge.location {
            EdgeLocation::Sample(i) => {
                let lo = i.saturating_sub(window);
                let hi = (i + window + 1).min(response.len());
                Some(
                    response[lo..hi]
                        .iter()
                        .fold(0.0f64, |m, &v| m.max(v.abs())),
                )
            }
            EdgeLocation::Segment { .. } => None,
        })
        .collect()
}
