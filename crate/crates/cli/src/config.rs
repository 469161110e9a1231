//! Run configuration: JSON file merged with command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use dmdsal::color_saliency::ColorSaliencyConfig;
use dmdsal::dmd::DmdConfig;
use dmdsal::eval::EvalConfig;
use dmdsal::luminance::LuminanceConfig;
use dmdsal::pipeline::PipelineConfig;
use dmdsal::DetectorConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dmd: DmdConfig,
    pub color: ColorSaliencyConfig,
    pub luminance: LuminanceConfig,
    pub pipeline: PipelineConfig,
    pub beta_squared: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dmd: DmdConfig::default(),
            color: ColorSaliencyConfig::default(),
            luminance: LuminanceConfig::default(),
            pipeline: PipelineConfig::default(),
            beta_squared: EvalConfig::default().beta_squared,
        }
    }
}

impl RunConfig {
    pub fn detector(&self) -> DetectorConfig {
        DetectorConfig {
            dmd: self.dmd,
            color: self.color,
            luminance: self.luminance.clone(),
            pipeline: self.pipeline,
        }
    }

    pub fn eval(&self) -> EvalConfig {
        EvalConfig {
            beta_squared: self.beta_squared,
            kappa: self.pipeline.kappa,
        }
    }

    pub fn validate(&self) -> dmdsal::Result<()> {
        self.detector().validate()?;
        self.eval().validate()
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated values, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<T>()
            .map_err(|_| format!("cannot parse {v:?} in {s:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}

fn parse_f64_pair(s: &str) -> Result<(f64, f64), String> {
    parse_pair(s)
}

fn parse_usize_pair(s: &str) -> Result<(usize, usize), String> {
    parse_pair(s)
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON configuration file
    #[arg(long, value_name = "JSON")]
    pub config: Option<PathBuf>,
    /// Repetitions of the rotated color matrices
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Fusion weights for the color and luminance maps
    #[arg(long, value_name = "WC,WL", value_parser = parse_f64_pair)]
    pub weights: Option<(f64, f64)>,
    /// Segmentation threshold multiplier
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Longest side after downscaling
    #[arg(long = "max-dim")]
    pub max_dim: Option<usize>,
    /// 1-based singular value range for the luminance sequence
    #[arg(long = "sv-range", value_name = "I0,I1", value_parser = parse_usize_pair)]
    pub sv_range: Option<(usize, usize)>,
    /// F-measure beta squared
    #[arg(long)]
    pub beta2: Option<f64>,
}

impl ConfigArgs {
    /// Loads the file (or defaults), applies the flags and validates.
    pub fn resolve(&self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(r) = self.repeats {
            cfg.color.repeats = r;
        }
        if let Some((wc, wl)) = self.weights {
            cfg.pipeline.color_weight = wc;
            cfg.pipeline.luminance_weight = wl;
        }
        if let Some(k) = self.kappa {
            cfg.pipeline.kappa = k;
        }
        if let Some(d) = self.max_dim {
            cfg.pipeline.max_dimension = d;
        }
        if let Some((i0, i1)) = self.sv_range {
            cfg.luminance.first_index = i0;
            cfg.luminance.last_index = i1;
        }
        if let Some(b) = self.beta2 {
            cfg.beta_squared = b;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        assert_eq!(parse_f64_pair("0.7, 0.3"), Ok((0.7, 0.3)));
        assert_eq!(parse_usize_pair("3,20"), Ok((3, 20)));
        assert!(parse_usize_pair("3").is_err());
        assert!(parse_f64_pair("a,1").is_err());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"pipeline": {"kapa": 2}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"extra": 1}"#).is_err());
        let cfg: RunConfig = serde_json::from_str(r#"{"pipeline": {"kappa": 1.5}}"#).unwrap();
        assert_eq!(cfg.pipeline.kappa, 1.5);
        assert_eq!(cfg.pipeline.color_weight, 0.8);
    }

    #[test]
    fn overrides_apply_and_validate() {
        let args = ConfigArgs {
            weights: Some((1.0, 0.0)),
            sv_range: Some((2, 10)),
            ..Default::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.pipeline.luminance_weight, 0.0);
        assert_eq!(cfg.luminance.first_index, 2);

        let bad = ConfigArgs {
            weights: Some((0.0, 0.0)),
            ..Default::default()
        };
        assert!(bad.resolve().unwrap_err().contains("color_weight + pipeline.luminance_weight"));
    }
}
