//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pst_core::analytic::{self, compare_oracle};
use pst_core::detectors::{self, HybridPolicy};
use pst_core::io;
use pst_core::kernel::taylor_coeffs;
use pst_core::spectral::FrequencyGrid;
use pst_core::synth::{self, EdgeGroundTruth, EdgeLocation, Region};
use pst_core::transform::{self, pst1d, pst2d, FeatureMap, ImageF, Lpf, MethodTag};

use crate::params::{parse_contrasts, KernelArgs};
use crate::report::{
    write_json, EdgeStat, GroundTruthFile, OracleOut, ParamsOut, ValueStats, SCHEMA_VERSION,
};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Pst,
    Derivative,
    Hybrid,
}

impl MethodArg {
    fn as_str(&self) -> &'static str {
        match self {
            MethodArg::Pst => "pst",
            MethodArg::Derivative => "derivative",
            MethodArg::Hybrid => "hybrid",
        }
    }
}

/// Neighborhood half-width used when reading a peak response off an edge
/// location.
fn peak_window(sigma: f64) -> usize {
    (4.0 * sigma).ceil() as usize + 4
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn to_compute(err: pst_core::PstError) -> CliError {
    CliError::Compute(err.to_string())
}

/// Peak |response| per row of a vertical edge segment, ridge-tolerant.
fn segment_responses(map: &FeatureMap, x: usize, y0: usize, y1: usize) -> Vec<f64> {
    let lo = x.saturating_sub(2);
    let hi = (x + 3).min(map.width());
    (y0..y1)
        .map(|y| (lo..hi).map(|xx| map.at(xx, y).abs()).fold(0.0f64, f64::max))
        .collect()
}

fn edge_peak_2d(map: &FeatureMap, edge_location: EdgeLocation) -> f64 {
    match edge_location {
        EdgeLocation::Segment { x, y0, y1 } => segment_responses(map, x, y0, y1)
            .into_iter()
            .fold(0.0f64, f64::max),
        EdgeLocation::Sample(i) => {
            let lo = i.saturating_sub(2);
            let hi = (i + 3).min(map.width());
            (lo..hi).map(|xx| map.at(xx, 0).abs()).fold(0.0f64, f64::max)
        }
    }
}

fn edge_stats_1d(
    gt: &EdgeGroundTruth,
    pst: Option<&[f64]>,
    deriv: Option<&[f64]>,
    window: usize,
) -> Vec<EdgeStat> {
    let peak = |resp: &[f64], i: usize| -> f64 {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(resp.len());
        resp[lo..hi].iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    };
    gt.edges
        .iter()
        .filter_map(|edge| match edge.location {
            EdgeLocation::Sample(i) => Some(EdgeStat {
                position: i,
                contrast: edge.contrast,
                base: edge.base,
                region: edge.region.map(|r| r.as_str()),
                pst_peak: pst.map(|r| peak(r, i)),
                derivative_peak: deriv.map(|r| peak(r, i)),
            }),
            EdgeLocation::Segment { .. } => None,
        })
        .collect()
}

fn edge_stats_2d(
    gt: &EdgeGroundTruth,
    pst: Option<&FeatureMap>,
    deriv: Option<&FeatureMap>,
) -> Vec<EdgeStat> {
    gt.edges
        .iter()
        .map(|edge| {
            let position = match edge.location {
                EdgeLocation::Sample(i) => i,
                EdgeLocation::Segment { x, .. } => x,
            };
            EdgeStat {
                position,
                contrast: edge.contrast,
                base: edge.base,
                region: edge.region.map(|r| r.as_str()),
                pst_peak: pst.map(|m| edge_peak_2d(m, edge.location)),
                derivative_peak: deriv.map(|m| edge_peak_2d(m, edge.location)),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// transform

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Input: CSV signal or PGM/PNG image.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Detection method.
    #[arg(long, value_enum, default_value = "pst")]
    pub method: MethodArg,
    /// Derivative-of-Gaussian sigma for the baseline detector (pixels).
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Normalization percentile for the hybrid combination.
    #[arg(long, default_value_t = 0.99)]
    pub percentile: f64,
    /// Apply logarithmic brightness equalization before detection.
    #[arg(long)]
    pub log_equalize: bool,
    /// Feature-map output (PGM for images, CSV for signals).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Bit depth of saved PGM output.
    #[arg(long, default_value_t = 8)]
    pub depth: u8,
    /// Binary detection mask output (thresholded at --q-lo/--q-hi).
    #[arg(long)]
    pub threshold_out: Option<PathBuf>,
    /// Ground-truth JSON (from `pst synth --gt`) for per-edge statistics.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct TransformReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    params: ParamsOut,
    input: String,
    width: usize,
    height: usize,
    log_equalized: bool,
    response: ValueStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<EdgeStat>>,
}

fn hybrid_1d(pst: &[f64], deriv: &[f64], percentile: f64) -> Result<Vec<f64>, CliError> {
    let n = pst.len();
    let pst_map = FeatureMap::new(n, 1, pst.to_vec(), MethodTag::Pst).map_err(to_compute)?;
    let deriv_map =
        FeatureMap::new(n, 1, deriv.to_vec(), MethodTag::Derivative).map_err(to_compute)?;
    let combined = detectors::hybrid(&pst_map, &deriv_map, &HybridPolicy { percentile })
        .map_err(to_compute)?;
    Ok(combined.values().to_vec())
}

pub fn run_transform(args: &TransformArgs) -> Result<(), CliError> {
    let params = args.kernel.resolve()?;
    let cfg = &params.config;
    let gt = args.gt.as_deref().map(GroundTruthFile::load).transpose()?;
    let gt = gt.map(|g| g.to_gt());

    if is_csv(&args.input) {
        let signal = io::read_signal_csv(&args.input).map_err(to_compute)?;
        let (response, pst_resp, deriv_resp) = match args.method {
            MethodArg::Pst => {
                let r = pst1d(&signal, cfg).map_err(to_compute)?;
                (r.clone(), Some(r), None)
            }
            MethodArg::Derivative => {
                let r = detectors::smooth_derivative_1d(&signal, args.sigma).map_err(to_compute)?;
                (r.clone(), None, Some(r))
            }
            MethodArg::Hybrid => {
                let p = pst1d(&signal, cfg).map_err(to_compute)?;
                let d = detectors::smooth_derivative_1d(&signal, args.sigma).map_err(to_compute)?;
                (hybrid_1d(&p, &d, args.percentile)?, Some(p), Some(d))
            }
        };
        if let Some(out) = &args.out {
            io::write_signal_csv(out, &response).map_err(to_compute)?;
        }
        if let Some(report_path) = &args.report {
            let edges = gt.as_ref().map(|g| {
                edge_stats_1d(
                    g,
                    pst_resp.as_deref(),
                    deriv_resp.as_deref(),
                    peak_window(args.sigma),
                )
            });
            let report = TransformReport {
                schema: SCHEMA_VERSION,
                command: "transform",
                method: args.method.as_str(),
                params: ParamsOut::from(&params),
                input: args.input.display().to_string(),
                width: signal.len(),
                height: 1,
                log_equalized: false,
                response: ValueStats::of(&response),
                edges,
            };
            write_json(report_path, &report)?;
        }
        return Ok(());
    }

    let mut image = io::load_image(&args.input).map_err(to_compute)?;
    if args.log_equalize {
        image = detectors::log_equalize(&image, 255.0);
    }
    let (map, pst_map, deriv_map) = match args.method {
        MethodArg::Pst => {
            let m = pst2d(&image, cfg).map_err(to_compute)?;
            (m.clone(), Some(m), None)
        }
        MethodArg::Derivative => {
            let m = detectors::smooth_derivative(&image, args.sigma).map_err(to_compute)?;
            (m.clone(), None, Some(m))
        }
        MethodArg::Hybrid => {
            let mut pst_cfg = cfg.clone();
            if pst_cfg.lpf.is_none() {
                // Fair comparison: both methods see the same localization.
                pst_cfg.lpf = Some(Lpf::SpatialSigma(args.sigma));
            }
            let p = pst2d(&image, &pst_cfg).map_err(to_compute)?;
            let d = detectors::smooth_derivative(&image, args.sigma).map_err(to_compute)?;
            let h = detectors::hybrid(&p, &d, &HybridPolicy { percentile: args.percentile })
                .map_err(to_compute)?;
            (h, Some(p), Some(d))
        }
    };
    if let Some(out) = &args.out {
        io::save_feature_map(&map, out, args.depth).map_err(to_compute)?;
    }
    if let Some(threshold_out) = &args.threshold_out {
        let (q_lo, q_hi) = cfg.quantiles;
        let binary = detectors::threshold(&map, q_lo, q_hi).map_err(to_compute)?;
        let samples: Vec<f64> = binary.pixels.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let mask = ImageF::new(binary.width, binary.height, samples).map_err(to_compute)?;
        io::save_image(&mask, threshold_out, 8).map_err(to_compute)?;
    }
    if let Some(report_path) = &args.report {
        let edges = gt
            .as_ref()
            .map(|g| edge_stats_2d(g, pst_map.as_ref(), deriv_map.as_ref()));
        let report = TransformReport {
            schema: SCHEMA_VERSION,
            command: "transform",
            method: args.method.as_str(),
            params: ParamsOut::from(&params),
            input: args.input.display().to_string(),
            width: image.width(),
            height: image.height(),
            log_equalized: args.log_equalize,
            response: ValueStats::of(map.values()),
            edges,
        };
        write_json(report_path, &report)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// compare-oracle

#[derive(Debug, Args)]
pub struct CompareOracleArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// CSV signal input; omit to generate the default smooth pulse.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Pulse sample count.
    #[arg(long, default_value_t = 512)]
    pub n: usize,
    /// Pulse center (defaults to n/2).
    #[arg(long)]
    pub center: Option<f64>,
    /// Pulse width in samples.
    #[arg(long, default_value_t = 64.0)]
    pub width: f64,
    /// Pulse amplitude.
    #[arg(long, default_value_t = 0.6)]
    pub amplitude: f64,
    /// Pulse base brightness.
    #[arg(long, default_value_t = 0.2)]
    pub base: f64,
    /// Band-limiting Gaussian sigma applied to the input before both the
    /// numerical transform and the oracle (0 disables). The Taylor-expanded
    /// oracle is only meaningful on inputs confined to low frequencies.
    #[arg(long, default_value_t = 2.0)]
    pub pre_smooth: f64,
    /// Rescale the strength: "small" pins the peak phase to 0.05 rad, a
    /// number multiplies it.
    #[arg(long)]
    pub strength_scale: Option<String>,
    /// Combined CSV output: index,numerical,analytic.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CompareOracleReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    params: ParamsOut,
    input: String,
    sample_count: usize,
    pre_smooth_sigma: f64,
    strength_scale: Option<String>,
    effective_strength: f64,
    oracle: OracleOut,
}

/// Maximum applied phase for the "small" strength scale.
const SMALL_PHASE_STRENGTH: f64 = 0.05;

pub fn run_compare_oracle(args: &CompareOracleArgs) -> Result<(), CliError> {
    let params = args.kernel.resolve()?;
    let mut cfg = params.config.clone();
    match args.strength_scale.as_deref() {
        None => {}
        Some("small") => cfg.strength = SMALL_PHASE_STRENGTH,
        Some(text) => match text.parse::<f64>() {
            Ok(factor) if factor > 0.0 => cfg.strength *= factor,
            _ => {
                return Err(CliError::Usage(format!(
                    "--strength-scale must be \"small\" or a positive number, got {text:?}"
                )))
            }
        },
    }

    let (raw, input_name) = match &args.input {
        Some(path) => (
            io::read_signal_csv(path).map_err(to_compute)?,
            path.display().to_string(),
        ),
        None => {
            let center = args.center.unwrap_or(args.n as f64 / 2.0);
            let (signal, _) =
                synth::smooth_pulse(args.n, center, args.width, args.amplitude, args.base)
                    .map_err(to_compute)?;
            (signal, format!("smooth-pulse(n={})", args.n))
        }
    };
    let signal = transform::presmooth_1d(&raw, args.pre_smooth).map_err(to_compute)?;

    let numerical = pst1d(&signal, &cfg).map_err(to_compute)?;

    let pad = cfg.resolve_pad_width(signal.len()).map_err(to_compute)?;
    let grid = FrequencyGrid::one_dim(signal.len() + 2 * pad).map_err(to_compute)?;
    let coeffs = taylor_coeffs(cfg.warp, cfg.strength, grid.max_radius(), cfg.taylor_order)
        .map_err(to_compute)?;
    let floor = cfg.epsilon * signal.iter().cloned().fold(0.0f64, f64::max);
    let oracle = analytic::pst_smallphase(&signal, &coeffs, floor).map_err(to_compute)?;
    let comparison =
        compare_oracle(&numerical, &oracle.values, &oracle.mask).map_err(to_compute)?;

    if let Some(out) = &args.out {
        let mut text = String::from("index,numerical,analytic\n");
        for (i, (n_v, o_v)) in numerical.iter().zip(&oracle.values).enumerate() {
            text.push_str(&format!("{i},{n_v:.17e},{o_v:.17e}\n"));
        }
        std::fs::write(out, text)
            .map_err(|e| CliError::Compute(format!("cannot write {}: {e}", out.display())))?;
    }
    if let Some(report_path) = &args.report {
        let report = CompareOracleReport {
            schema: SCHEMA_VERSION,
            command: "compare-oracle",
            method: "pst",
            params: ParamsOut::from(&params),
            input: input_name,
            sample_count: signal.len(),
            pre_smooth_sigma: args.pre_smooth,
            strength_scale: args.strength_scale.clone(),
            effective_strength: cfg.strength,
            oracle: OracleOut {
                correlation: comparison.correlation,
                max_abs_deviation: comparison.max_abs_deviation,
                normalized_deviation: comparison.normalized_deviation,
                valid_count: comparison.valid_count(),
                sample_count: signal.len(),
            },
        };
        write_json(report_path, &report)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep-contrast

#[derive(Debug, Args)]
pub struct SweepContrastArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Comma-separated step contrasts.
    #[arg(long, default_value = "0.05,0.1,0.2")]
    pub contrasts: String,
    /// Common base brightness.
    #[arg(long, default_value_t = 0.3)]
    pub base: f64,
    /// Staircase sample count.
    #[arg(long, default_value_t = 600)]
    pub n: usize,
    /// Edge smoothing sigma of the staircase.
    #[arg(long, default_value_t = 2.0)]
    pub edge_sigma: f64,
    /// Derivative-of-Gaussian sigma of the baseline detector.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Staircase signal CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SweepContrastReport {
    schema: u32,
    command: &'static str,
    params: ParamsOut,
    base: f64,
    edge_sigma: f64,
    derivative_sigma: f64,
    edges: Vec<EdgeStat>,
    /// Largest relative deviation of peak/contrast across edges.
    derivative_proportionality_deviation: f64,
    pst_proportionality_deviation: f64,
}

/// Largest relative deviation of `peak/contrast` from its first value.
fn proportionality_deviation(stats: &[EdgeStat], pick: impl Fn(&EdgeStat) -> f64) -> f64 {
    let ratios: Vec<f64> = stats.iter().map(|s| pick(s) / s.contrast).collect();
    match ratios.first() {
        Some(&first) if first != 0.0 => ratios
            .iter()
            .map(|r| (r / first - 1.0).abs())
            .fold(0.0f64, f64::max),
        _ => 0.0,
    }
}

pub fn run_sweep_contrast(args: &SweepContrastArgs) -> Result<(), CliError> {
    let params = args.kernel.resolve()?;
    let contrasts = parse_contrasts(&args.contrasts).map_err(CliError::Usage)?;
    let (signal, gt) =
        synth::staircase(args.n, &contrasts, args.base, args.edge_sigma).map_err(to_compute)?;
    let pst_resp = pst1d(&signal, &params.config).map_err(to_compute)?;
    let deriv_resp = detectors::smooth_derivative_1d(&signal, args.sigma).map_err(to_compute)?;
    let window = peak_window(args.sigma.max(args.edge_sigma));
    let edges = edge_stats_1d(&gt, Some(&pst_resp), Some(&deriv_resp), window);

    if let Some(out) = &args.out {
        io::write_signal_csv(out, &signal).map_err(to_compute)?;
    }
    if let Some(report_path) = &args.report {
        let report = SweepContrastReport {
            schema: SCHEMA_VERSION,
            command: "sweep-contrast",
            params: ParamsOut::from(&params),
            base: args.base,
            edge_sigma: args.edge_sigma,
            derivative_sigma: args.sigma,
            derivative_proportionality_deviation: proportionality_deviation(&edges, |s| {
                s.derivative_peak.unwrap_or(0.0)
            }),
            pst_proportionality_deviation: proportionality_deviation(&edges, |s| {
                s.pst_peak.unwrap_or(0.0)
            }),
            edges,
        };
        write_json(report_path, &report)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// hybrid

#[derive(Debug, Args)]
pub struct HybridArgs {
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Input image (PGM/PNG).
    #[arg(long = "in", conflicts_with = "testcard")]
    pub input: Option<PathBuf>,
    /// Generate the HDR test card instead, as WIDTHxHEIGHT.
    #[arg(long)]
    pub testcard: Option<String>,
    /// Shared localization sigma: derivative-of-Gaussian sigma, and the PST
    /// pre-smoothing unless --lpf overrides it.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// Normalization percentile for the combination.
    #[arg(long, default_value_t = 0.99)]
    pub percentile: f64,
    /// Apply logarithmic brightness equalization before detection.
    #[arg(long)]
    pub log_equalize: bool,
    /// Ground-truth JSON for per-edge statistics (--in images).
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Normalized PST map output (PGM).
    #[arg(long)]
    pub out_pst: Option<PathBuf>,
    /// Normalized derivative map output (PGM).
    #[arg(long)]
    pub out_derivative: Option<PathBuf>,
    /// Hybrid map output (PGM).
    #[arg(long)]
    pub out_hybrid: Option<PathBuf>,
    /// Bit depth of saved PGM outputs.
    #[arg(long, default_value_t = 8)]
    pub depth: u8,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RegionStat {
    region: &'static str,
    edge_count: usize,
    mean_pst: f64,
    mean_derivative: f64,
    min_pst: f64,
    min_derivative: f64,
}

#[derive(Debug, Serialize)]
struct HybridReport {
    schema: u32,
    command: &'static str,
    method: &'static str,
    params: ParamsOut,
    input: String,
    width: usize,
    height: usize,
    sigma: f64,
    percentile: f64,
    pst: ValueStats,
    derivative: ValueStats,
    hybrid: ValueStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge_minima: Option<EdgeMinima>,
    #[serde(skip_serializing_if = "Option::is_none")]
    regions: Option<Vec<RegionStat>>,
}

#[derive(Debug, Serialize)]
struct EdgeMinima {
    pst: f64,
    derivative: f64,
    hybrid: f64,
}

/// Per-pixel normalized responses over all ground-truth edge pixels.
fn edge_pixel_responses(map: &FeatureMap, gt: &EdgeGroundTruth, region: Option<Region>) -> Vec<f64> {
    let mut out = Vec::new();
    for edge in &gt.edges {
        if region.is_some() && edge.region != region {
            continue;
        }
        if let EdgeLocation::Segment { x, y0, y1 } = edge.location {
            out.extend(segment_responses(map, x, y0, y1));
        }
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

fn minimum(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn run_hybrid(args: &HybridArgs) -> Result<(), CliError> {
    let params = args.kernel.resolve()?;
    let (mut image, gt, input_name) = match (&args.input, &args.testcard) {
        (Some(path), None) => {
            let image = io::load_image(path).map_err(to_compute)?;
            let gt = args
                .gt
                .as_deref()
                .map(GroundTruthFile::load)
                .transpose()?
                .map(|g| g.to_gt());
            (image, gt, path.display().to_string())
        }
        (None, Some(spec)) => {
            let (w, h) = spec
                .split_once('x')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| {
                    CliError::Usage(format!("--testcard expects WIDTHxHEIGHT, got {spec:?}"))
                })?;
            let (image, gt) = synth::hdr_testcard(w, h).map_err(to_compute)?;
            (image, Some(gt), format!("hdr-testcard({w}x{h})"))
        }
        _ => {
            return Err(CliError::Usage(
                "hybrid needs exactly one of --in or --testcard".into(),
            ))
        }
    };
    if args.log_equalize {
        image = detectors::log_equalize(&image, 255.0);
    }

    let mut pst_cfg = params.config.clone();
    if pst_cfg.lpf.is_none() {
        pst_cfg.lpf = Some(Lpf::SpatialSigma(args.sigma));
    }
    let pst_map = pst2d(&image, &pst_cfg).map_err(to_compute)?;
    let deriv_map = detectors::smooth_derivative(&image, args.sigma).map_err(to_compute)?;
    let policy = HybridPolicy { percentile: args.percentile };
    let hybrid_map = detectors::hybrid(&pst_map, &deriv_map, &policy).map_err(to_compute)?;
    let norm_pst = detectors::normalize_robust(&pst_map, args.percentile).map_err(to_compute)?;
    let norm_deriv =
        detectors::normalize_robust(&deriv_map, args.percentile).map_err(to_compute)?;

    for (path, map) in [
        (&args.out_pst, &norm_pst),
        (&args.out_derivative, &norm_deriv),
        (&args.out_hybrid, &hybrid_map),
    ] {
        if let Some(path) = path {
            io::save_feature_map(map, path, args.depth).map_err(to_compute)?;
        }
    }

    if let Some(report_path) = &args.report {
        let (edge_minima, regions) = match &gt {
            Some(gt) => {
                let all_pst = edge_pixel_responses(&norm_pst, gt, None);
                let all_deriv = edge_pixel_responses(&norm_deriv, gt, None);
                let all_hybrid = edge_pixel_responses(&hybrid_map, gt, None);
                let minima = (!all_pst.is_empty()).then(|| EdgeMinima {
                    pst: minimum(&all_pst),
                    derivative: minimum(&all_deriv),
                    hybrid: minimum(&all_hybrid),
                });
                let regions: Vec<RegionStat> = [Region::Dark, Region::Bright, Region::Ramp]
                    .into_iter()
                    .filter_map(|region| {
                        let p = edge_pixel_responses(&norm_pst, gt, Some(region));
                        if p.is_empty() {
                            return None;
                        }
                        let d = edge_pixel_responses(&norm_deriv, gt, Some(region));
                        Some(RegionStat {
                            region: region.as_str(),
                            edge_count: gt
                                .edges
                                .iter()
                                .filter(|e| e.region == Some(region))
                                .count(),
                            mean_pst: mean(&p),
                            mean_derivative: mean(&d),
                            min_pst: minimum(&p),
                            min_derivative: minimum(&d),
                        })
                    })
                    .collect();
                (minima, (!regions.is_empty()).then_some(regions))
            }
            None => (None, None),
        };
        let report = HybridReport {
            schema: SCHEMA_VERSION,
            command: "hybrid",
            method: "hybrid",
            params: ParamsOut::from(&params),
            input: input_name,
            width: image.width(),
            height: image.height(),
            sigma: args.sigma,
            percentile: args.percentile,
            pst: ValueStats::of(pst_map.values()),
            derivative: ValueStats::of(deriv_map.values()),
            hybrid: ValueStats::of(hybrid_map.values()),
            edge_minima,
            regions,
        };
        write_json(report_path, &report)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// synth

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(subcommand)]
    pub kind: SynthKind,
}

#[derive(Debug, Subcommand)]
pub enum SynthKind {
    /// Raised-cosine pulse on a constant base (CSV output).
    Pulse {
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Defaults to n/2.
        #[arg(long)]
        center: Option<f64>,
        #[arg(long, default_value_t = 64.0)]
        width: f64,
        #[arg(long, default_value_t = 0.6)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.2)]
        base: f64,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth JSON output.
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Resetting contrast staircase (CSV output).
    Staircase {
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value = "0.05,0.1,0.2")]
        contrasts: String,
        #[arg(long, default_value_t = 0.3)]
        base: f64,
        #[arg(long, default_value_t = 2.0)]
        edge_sigma: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Four-quadrant HDR test card (PGM output).
    HdrCard {
        #[arg(long, default_value_t = 256)]
        width: usize,
        #[arg(long, default_value_t = 256)]
        height: usize,
        /// PGM bit depth (the card is 14-bit by construction).
        #[arg(long, default_value_t = 14)]
        depth: u8,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
    },
    /// Seeded uniform-noise image (PGM output).
    Random {
        #[arg(long, default_value_t = 128)]
        width: usize,
        #[arg(long, default_value_t = 128)]
        height: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 8)]
        depth: u8,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Serialize)]
struct SynthReport<'a> {
    schema: u32,
    command: &'static str,
    generator: &'a str,
    output: String,
    edge_count: usize,
}

pub fn run_synth(args: &SynthArgs, report: Option<&Path>) -> Result<(), CliError> {
    let (generator, out_path, edge_count) = match &args.kind {
        SynthKind::Pulse { n, center, width, amplitude, base, out, gt } => {
            let center = center.unwrap_or(*n as f64 / 2.0);
            let (signal, ground_truth) =
                synth::smooth_pulse(*n, center, *width, *amplitude, *base).map_err(to_compute)?;
            io::write_signal_csv(out, &signal).map_err(to_compute)?;
            if let Some(gt_path) = gt {
                write_json(gt_path, &GroundTruthFile::from_gt(&ground_truth))?;
            }
            ("pulse", out, ground_truth.len())
        }
        SynthKind::Staircase { n, contrasts, base, edge_sigma, out, gt } => {
            let contrasts = parse_contrasts(contrasts).map_err(CliError::Usage)?;
            let (signal, ground_truth) =
                synth::staircase(*n, &contrasts, *base, *edge_sigma).map_err(to_compute)?;
            io::write_signal_csv(out, &signal).map_err(to_compute)?;
            if let Some(gt_path) = gt {
                write_json(gt_path, &GroundTruthFile::from_gt(&ground_truth))?;
            }
            ("staircase", out, ground_truth.len())
        }
        SynthKind::HdrCard { width, height, depth, out, gt } => {
            let (image, ground_truth) = synth::hdr_testcard(*width, *height).map_err(to_compute)?;
            io::save_image(&image, out, *depth).map_err(to_compute)?;
            if let Some(gt_path) = gt {
                write_json(gt_path, &GroundTruthFile::from_gt(&ground_truth))?;
            }
            ("hdr-card", out, ground_truth.len())
        }
        SynthKind::Random { width, height, seed, lo, hi, depth, out } => {
            if !(lo < hi) || *lo < 0.0 || *hi > 1.0 {
                return Err(CliError::Usage(format!(
                    "random range must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let samples: Vec<f64> = (0..width * height).map(|_| rng.gen_range(*lo..*hi)).collect();
            let image = ImageF::new(*width, *height, samples).map_err(to_compute)?;
            io::save_image(&image, out, *depth).map_err(to_compute)?;
            ("random", out, 0)
        }
    };
    if let Some(report_path) = report {
        let report = SynthReport {
            schema: SCHEMA_VERSION,
            command: "synth",
            generator,
            output: out_path.display().to_string(),
            edge_count,
        };
        write_json(report_path, &report)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// line-scan

#[derive(Debug, Args)]
pub struct LineScanArgs {
    /// Input image (PGM/PNG).
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Row to extract.
    #[arg(long)]
    pub row: usize,
    /// Signal CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct LineScanReport {
    schema: u32,
    command: &'static str,
    input: String,
    row: usize,
    sample_count: usize,
    values: ValueStats,
}

pub fn run_line_scan(args: &LineScanArgs) -> Result<(), CliError> {
    let image = io::load_image(&args.input).map_err(to_compute)?;
    let signal = synth::line_scan(&image, args.row).map_err(to_compute)?;
    if let Some(out) = &args.out {
        io::write_signal_csv(out, &signal).map_err(to_compute)?;
    }
    if let Some(report_path) = &args.report {
        let report = LineScanReport {
            schema: SCHEMA_VERSION,
            command: "line-scan",
            input: args.input.display().to_string(),
            row: args.row,
            sample_count: signal.len(),
            values: ValueStats::of(&signal),
        };
        write_json(report_path, &report)?;
    }
    Ok(())
}
