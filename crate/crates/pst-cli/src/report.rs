//! Versioned JSON reports (schema 1). Field order is fixed by the struct
//! definitions so identical runs serialize byte-identically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use pst_core::synth::{EdgeGroundTruth, EdgeLocation};
use pst_core::transform::{Lpf, PadMode};

use crate::params::Params;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ParamsOut {
    pub preset: Option<&'static str>,
    pub warp: f64,
    pub strength: f64,
    pub lpf: Option<LpfOut>,
    pub pad: &'static str,
    pub pad_width: Option<usize>,
    pub order: usize,
    pub epsilon: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

#[derive(Debug, Serialize)]
pub struct LpfOut {
    pub domain: &'static str,
    pub value: f64,
}

impl From<&Params> for ParamsOut {
    fn from(params: &Params) -> Self {
        let cfg = &params.config;
        ParamsOut {
            preset: params.preset,
            warp: cfg.warp,
            strength: cfg.strength,
            lpf: cfg.lpf.map(|l| match l {
                Lpf::FrequencyCutoff(c) => LpfOut { domain: "freq", value: c },
                Lpf::SpatialSigma(s) => LpfOut { domain: "spatial", value: s },
            }),
            pad: match cfg.pad_mode {
                PadMode::Mirror => "mirror",
                PadMode::Periodic => "periodic",
                PadMode::Zero => "zero",
            },
            pad_width: cfg.pad_width,
            order: cfg.taylor_order,
            epsilon: cfg.epsilon,
            q_lo: cfg.quantiles.0,
            q_hi: cfg.quantiles.1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ValueStats {
    pub min: f64,
    pub max: f64,
    pub mean_abs: f64,
}

impl ValueStats {
    pub fn of(values: &[f64]) -> Self {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum_abs = 0.0;
        for &v in values {
            min = min.min(v);
            max = max.max(v);
            sum_abs += v.abs();
        }
        ValueStats {
            min,
            max,
            mean_abs: sum_abs / values.len().max(1) as f64,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct OracleOut {
    pub correlation: f64,
    pub max_abs_deviation: f64,
    pub normalized_deviation: f64,
    pub valid_count: usize,
    pub sample_count: usize,
}

#[derive(Debug, Serialize)]
pub struct EdgeStat {
    pub position: usize,
    pub contrast: f64,
    pub base: f64,
    pub region: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pst_peak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derivative_peak: Option<f64>,
}

/// Serializable ground truth (matches `pst synth --gt` output).
#[derive(Debug, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub schema: u32,
    pub edges: Vec<GtEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GtEdge {
    /// 1D sample index or 2D transition column.
    pub position: usize,
    /// Vertical segment rows for 2D edges.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y0: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y1: Option<usize>,
    pub contrast: f64,
    pub base: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
}

impl GroundTruthFile {
    pub fn from_gt(gt: &EdgeGroundTruth) -> Self {
        GroundTruthFile {
            schema: SCHEMA_VERSION,
            edges: gt
                .edges
                .iter()
                .map(|edge| {
                    let (position, y0, y1) = match edge.location {
                        EdgeLocation::Sample(i) => (i, None, None),
                        EdgeLocation::Segment { x, y0, y1 } => (x, Some(y0), Some(y1)),
                    };
                    GtEdge {
                        position,
                        y0,
                        y1,
                        contrast: edge.contrast,
                        base: edge.base,
                        region: edge.region.map(|r| r.as_str().to_string()),
                    }
                })
                .collect(),
        }
    }

    pub fn to_gt(&self) -> EdgeGroundTruth {
        use pst_core::synth::{Edge, Region};
        EdgeGroundTruth {
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    location: match (e.y0, e.y1) {
                        (Some(y0), Some(y1)) => EdgeLocation::Segment { x: e.position, y0, y1 },
                        _ => EdgeLocation::Sample(e.position),
                    },
                    contrast: e.contrast,
                    base: e.base,
                    region: e.region.as_deref().and_then(|r| match r {
                        "dark" => Some(Region::Dark),
                        "bright" => Some(Region::Bright),
                        "ramp" => Some(Region::Ramp),
                        _ => None,
                    }),
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Compute(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Compute(format!("invalid ground truth {}: {e}", path.display())))
    }
}

/// Serialize a report with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Compute(format!("report serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))
}
