//! Shared kernel/transform parameter handling: presets, the optional JSON
//! config file, and flag merging.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use pst_core::transform::{Lpf, PadMode, PstConfig};

use crate::CliError;

/// Named parameter presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// warp 22, strength 500
    Fig1,
    /// warp 12.5, strength 4000
    Fig2,
    /// warp 12.15, strength 0.48
    #[value(name = "fig3-4")]
    Fig34,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig34 => "fig3-4",
        }
    }

    pub fn warp_strength(&self) -> (f64, f64) {
        match self {
            Preset::Fig1 => (22.0, 500.0),
            Preset::Fig2 => (12.5, 4000.0),
            Preset::Fig34 => (12.15, 0.48),
        }
    }

    fn parse(name: &str) -> Result<Self, CliError> {
        match name {
            "fig1" => Ok(Preset::Fig1),
            "fig2" => Ok(Preset::Fig2),
            "fig3-4" => Ok(Preset::Fig34),
            other => Err(CliError::Usage(format!("unknown preset {other:?} in config"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LpfDomain {
    /// Half-amplitude cutoff in cycles/sample.
    Freq,
    /// Gaussian sigma in pixels (applied through its exact frequency
    /// response).
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PadArg {
    Mirror,
    Periodic,
    Zero,
}

impl From<PadArg> for PadMode {
    fn from(value: PadArg) -> Self {
        match value {
            PadArg::Mirror => PadMode::Mirror,
            PadArg::Periodic => PadMode::Periodic,
            PadArg::Zero => PadMode::Zero,
        }
    }
}

/// Transform parameters shared by every subcommand.
#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Parameter preset binding warp and strength.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Warp parameter W of the phase kernel.
    #[arg(long, conflicts_with = "preset")]
    pub warp: Option<f64>,
    /// Strength S: peak applied phase in radians.
    #[arg(long, conflicts_with = "preset")]
    pub strength: Option<f64>,
    /// Localization kernel parameter (see --lpf-domain). Omit for none.
    #[arg(long)]
    pub lpf: Option<f64>,
    /// How --lpf is interpreted.
    #[arg(long, value_enum, default_value = "spatial")]
    pub lpf_domain: LpfDomain,
    /// Boundary padding mode.
    #[arg(long, value_enum)]
    pub pad: Option<PadArg>,
    /// Explicit pad width in samples (defaults to max(16, n/8) per axis).
    #[arg(long)]
    pub pad_width: Option<usize>,
    /// Taylor truncation order for the analytic oracles.
    #[arg(long)]
    pub order: Option<usize>,
    /// Denominator floor as a fraction of the maximum intensity.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Lower threshold quantile.
    #[arg(long)]
    pub q_lo: Option<f64>,
    /// Upper threshold quantile.
    #[arg(long)]
    pub q_hi: Option<f64>,
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// JSON config file mirror of [`KernelArgs`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<String>,
    warp: Option<f64>,
    strength: Option<f64>,
    lpf: Option<f64>,
    lpf_domain: Option<String>,
    pad: Option<String>,
    pad_width: Option<usize>,
    order: Option<usize>,
    epsilon: Option<f64>,
    q_lo: Option<f64>,
    q_hi: Option<f64>,
}

/// Fully resolved parameters.
#[derive(Debug, Clone)]
pub struct Params {
    pub config: PstConfig,
    pub preset: Option<&'static str>,
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Compute(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

impl KernelArgs {
    /// Merge defaults, config file and flags. A preset may not be combined
    /// with explicit warp/strength from any source.
    pub fn resolve(&self) -> Result<Params, CliError> {
        let file = match &self.config {
            Some(path) => load_config(path)?,
            None => ConfigFile::default(),
        };

        let preset = match (self.preset, &file.preset) {
            (Some(p), _) => Some(p), // flag wins
            (None, Some(name)) => Some(Preset::parse(name)?),
            (None, None) => None,
        };
        let warp = self.warp.or(file.warp);
        let strength = self.strength.or(file.strength);
        if preset.is_some() && (warp.is_some() || strength.is_some()) {
            return Err(CliError::Usage(
                "--preset conflicts with explicit --warp/--strength (including config values)"
                    .into(),
            ));
        }

        let (warp, strength) = match preset {
            Some(p) => p.warp_strength(),
            None => {
                let (dw, ds) = Preset::Fig34.warp_strength();
                (warp.unwrap_or(dw), strength.unwrap_or(ds))
            }
        };

        let lpf_domain = match (self.lpf.is_some(), &file.lpf_domain) {
            (true, _) => self.lpf_domain,
            (false, Some(s)) => match s.as_str() {
                "freq" => LpfDomain::Freq,
                "spatial" => LpfDomain::Spatial,
                other => {
                    return Err(CliError::Usage(format!("unknown lpf_domain {other:?} in config")))
                }
            },
            (false, None) => self.lpf_domain,
        };
        let lpf = self.lpf.or(file.lpf).map(|value| match lpf_domain {
            LpfDomain::Freq => Lpf::FrequencyCutoff(value),
            LpfDomain::Spatial => Lpf::SpatialSigma(value),
        });

        let pad_mode = match (self.pad, &file.pad) {
            (Some(p), _) => p.into(),
            (None, Some(s)) => match s.as_str() {
                "mirror" => PadMode::Mirror,
                "periodic" => PadMode::Periodic,
                "zero" => PadMode::Zero,
                other => return Err(CliError::Usage(format!("unknown pad mode {other:?} in config"))),
            },
            (None, None) => PadMode::Mirror,
        };

        let defaults = PstConfig::default();
        let config = PstConfig {
            warp,
            strength,
            lpf,
            pad_mode,
            pad_width: self.pad_width.or(file.pad_width),
            taylor_order: self.order.or(file.order).unwrap_or(defaults.taylor_order),
            epsilon: self.epsilon.or(file.epsilon).unwrap_or(defaults.epsilon),
            quantiles: (
                self.q_lo.or(file.q_lo).unwrap_or(defaults.quantiles.0),
                self.q_hi.or(file.q_hi).unwrap_or(defaults.quantiles.1),
            ),
        };
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(Params {
            config,
            preset: preset.map(|p| p.name()),
        })
    }
}

/// Parse a comma-separated list of positive contrasts.
pub fn parse_contrasts(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| format!("not a number: {part:?}"))
        })
        .collect()
}
