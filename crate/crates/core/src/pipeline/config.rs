//! Pipeline configuration: one TOML file with a section per stage.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chemometrics::DEFAULT_RATIOS;
use crate::color::DEFAULT_GAMMA;
use crate::error::{Error, Result};
use crate::ga::GaConfig;
use crate::preprocess::PreprocessSpec;
use crate::recon::{NetworkConfig, TrainConfig};
use crate::roi::MaskOptions;
use crate::synth::SyntheticSceneSpec;

/// Seeds that must be written out explicitly in every config file.
pub const REQUIRED_SEEDS: [&str; 4] = ["synth", "split", "ga", "train"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    /// Dataset directory (manifest, references, cubes).
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentationConfig {
    pub hi_nm: f64,
    pub lo_nm: f64,
    pub min_contrast: f64,
    pub largest_component_only: bool,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        let m = MaskOptions::default();
        Self {
            hi_nm: m.hi_nm,
            lo_nm: m.lo_nm,
            min_contrast: m.min_contrast,
            largest_component_only: m.largest_component_only,
        }
    }
}

impl SegmentationConfig {
    pub fn options(&self) -> MaskOptions {
        MaskOptions {
            hi_nm: self.hi_nm,
            lo_nm: self.lo_nm,
            min_contrast: self.min_contrast,
            largest_component_only: self.largest_component_only,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "default_ratios")]
    pub ratios: [f64; 3],
    pub seed: u64,
}

fn default_ratios() -> [f64; 3] {
    DEFAULT_RATIOS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlsrConfig {
    /// Upper bound on latent variables tried by LOOCV; further capped by
    /// the data size.
    pub max_lv: usize,
}

impl Default for PlsrConfig {
    fn default() -> Self {
        Self { max_lv: 20 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorConfig {
    pub gamma: f64,
}

impl Default for ColorConfig {
    fn default() -> Self {
        Self { gamma: DEFAULT_GAMMA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub psnr_peak: f64,
    /// Black out background pixels in network inputs and targets.
    pub mask_network_inputs: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            psnr_peak: 1.0,
            mask_network_inputs: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: Paths,
    pub synth: SyntheticSceneSpec,
    #[serde(default)]
    pub segmentation: SegmentationConfig,
    #[serde(default)]
    pub preprocess: PreprocessSpec,
    pub split: SplitConfig,
    #[serde(default)]
    pub plsr: PlsrConfig,
    pub ga: GaConfig,
    #[serde(default)]
    pub network: NetworkConfig,
    pub train: TrainConfig,
    #[serde(default)]
    pub color: ColorConfig,
    #[serde(default)]
    pub report: ReportConfig,
}

impl PipelineConfig {
    /// Parses TOML text. Relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for section in REQUIRED_SEEDS {
            let has_seed = table
                .get(section)
                .and_then(|s| s.as_table())
                .is_some_and(|s| s.contains_key("seed"));
            if !has_seed {
                return Err(Error::Config(format!("[{section}] must set `seed` explicitly")));
            }
        }
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for p in [&mut cfg.paths.data_dir, &mut cfg.paths.out_dir] {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        self.synth.validate().map_err(|e| Error::Config(format!("[synth] {e}")))?;
        self.network.validate()?;
        self.train.validate()?;
        if self.ga.target_k.is_some_and(|k| k != self.network.out_bands) {
            return Err(Error::Config(format!(
                "[network] out_bands ({}) must equal [ga] target_k ({:?})",
                self.network.out_bands, self.ga.target_k
            )));
        }
        if self.plsr.max_lv == 0 {
            return Err(Error::Config("[plsr] max_lv must be >= 1".into()));
        }
        if !(self.color.gamma > 0.0) || !(self.report.psnr_peak > 0.0) {
            return Err(Error::Config("gamma and psnr_peak must be positive".into()));
        }
        crate::chemometrics::partition_sizes(10, self.split.ratios).map_err(|e| Error::Config(format!("[split] {e}")))?;
        Ok(())
    }

    /// Replaces every seed with `seed`.
    pub fn override_seeds(&mut self, seed: u64) {
        self.synth.seed = seed;
        self.split.seed = seed;
        self.ga.seed = seed;
        self.train.seed = seed;
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Small, fast settings for tests and demos.
    pub fn desk(data_dir: PathBuf, out_dir: PathBuf) -> Self {
        Self {
            paths: Paths { data_dir, out_dir },
            synth: SyntheticSceneSpec::default(),
            segmentation: SegmentationConfig::default(),
            preprocess: PreprocessSpec::default(),
            split: SplitConfig {
                ratios: DEFAULT_RATIOS,
                seed: 42,
            },
            plsr: PlsrConfig { max_lv: 10 },
            ga: GaConfig {
                population: 30,
                generations: 30,
                target_k: Some(15),
                seed: 1,
                ..Default::default()
            },
            network: NetworkConfig::default(),
            train: TrainConfig {
                epochs: 10,
                iters_per_epoch: 60,
                batch: 8,
                patch: 16,
                stride: 4,
                seed: 3,
                ..Default::default()
            },
            color: ColorConfig::default(),
            report: ReportConfig::default(),
        }
    }
}
