// Parameter guards are written `!(x > 0.0)` on purpose: the negation also
// rejects NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Phase Stretch Transform (PST) feature detection.
//!
//! The transform multiplies an image's spectrum by a unit-magnitude kernel
//! with a warped, even phase profile and takes the per-pixel phase of the
//! inverse transform as the feature response. Because the phase of a complex
//! field is invariant under positive scaling, the response is brightness
//! equalized: equal-contrast features respond more strongly in darker
//! regions.
//!
//! Modules:
//! * [`spectral`] — FFT conventions, frequency grids, spectral derivatives;
//! * [`kernel`] — warped phase kernel, localization kernel, Taylor
//!   coefficients;
//! * [`transform`] — the stretch operator and 1D/2D PST with padding;
//! * [`analytic`] — closed-form small-phase oracles and oracle comparison;
//! * [`detectors`] — smooth-derivative baseline, hybrid combination,
//!   normalization and thresholding;
//! * [`synth`] — deterministic synthetic inputs with edge ground truth;
//! * [`io`] — PGM/PNG images and CSV signals.

pub mod analytic;
pub mod detectors;
pub mod error;
mod filters;
pub mod io;
pub mod kernel;
pub mod spectral;
pub mod synth;
pub mod transform;

pub use analytic::{MaskedResponse, OracleReport};
pub use error::{PstError, Result};
pub use kernel::{LocalizationKernel, PhaseKernel, TaylorCoeffs};
pub use spectral::{FrequencyGrid, Spectrum};
pub use synth::{Edge, EdgeGroundTruth, EdgeLocation, Region};
pub use transform::{ComplexField, FeatureMap, ImageF, Lpf, MethodTag, PadMode, PstConfig};
