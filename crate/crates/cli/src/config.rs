//! Declarative pipeline configuration. The whole file is validated up
//! front so a multi-direction run fails before any work starts.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gezmt_core::corpus::{Direction, LanguageTag};
use gezmt_core::split::{OverlapMode, SplitRatios};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub ratios: RawRatios,
    #[serde(default)]
    pub split: RawSplit,
    #[serde(default)]
    pub bpe: RawBpe,
    pub backend: Option<RawBackend>,
    pub directions: Vec<RawDirection>,
}

fn default_seed() -> u64 {
    42
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRatios {
    pub train: f64,
    pub test: f64,
    pub validation: f64,
}

impl Default for RawRatios {
    fn default() -> Self {
        RawRatios { train: 0.7, test: 0.2, validation: 0.1 }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSplit {
    pub overlap_mode: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBpe {
    #[serde(default = "default_vocab_size")]
    pub vocab_size: usize,
    pub model_path: Option<PathBuf>,
}

fn default_vocab_size() -> usize {
    1000
}

impl Default for RawBpe {
    fn default() -> Self {
        RawBpe { vocab_size: default_vocab_size(), model_path: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBackend {
    pub endpoint: String,
    pub model: String,
    #[serde(default = "default_top_p")]
    pub top_p: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_length_multiplier")]
    pub length_multiplier: f64,
    #[serde(default = "default_max_matches")]
    pub max_matches: usize,
}

fn default_top_p() -> f64 {
    1.0
}

fn default_temperature() -> f64 {
    0.3
}

fn default_length_multiplier() -> f64 {
    5.0
}

fn default_max_matches() -> usize {
    gezmt_core::retrieval::MAX_FUZZY_MATCHES
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDirection {
    pub source: String,
    pub target: String,
    /// Corpus file stems; `<stem>.<source>` and `<stem>.<target>` must
    /// exist, and the stem's file name doubles as the domain label.
    pub stems: Vec<PathBuf>,
}

/// Fully validated configuration.
#[derive(Debug)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ratios: SplitRatios,
    pub overlap_mode: OverlapMode,
    pub bpe_vocab_size: usize,
    pub bpe_model_path: PathBuf,
    pub backend: Option<BackendConfig>,
    pub directions: Vec<DirectionConfig>,
    /// Path of the loaded config file, recorded in manifests.
    pub config_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct BackendConfig {
    pub endpoint: String,
    pub model: String,
    pub top_p: f64,
    pub temperature: f64,
    pub length_multiplier: f64,
    pub max_matches: usize,
}

#[derive(Debug, Clone)]
pub struct DirectionConfig {
    pub direction: Direction,
    /// (domain, source file, target file) triples.
    pub files: Vec<(String, PathBuf, PathBuf)>,
}

impl PipelineConfig {
    /// Loads and validates a config file. `seed` and `out_dir` from the
    /// command line override the file.
    pub fn load(path: &Path, seed: Option<u64>, out_dir: Option<PathBuf>) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let raw: RawConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;

        let ratios = SplitRatios::new(raw.ratios.train, raw.ratios.test, raw.ratios.validation)
            .context("invalid [ratios]")?;
        let overlap_mode = match raw.split.overlap_mode.as_deref() {
            None => OverlapMode::Strict,
            Some(s) => OverlapMode::parse(s).context("invalid split.overlap_mode")?,
        };

        if raw.directions.is_empty() {
            bail!("config lists no [[directions]]");
        }
        let mut directions = Vec::new();
        for d in &raw.directions {
            let source = LanguageTag::new(&d.source)
                .with_context(|| format!("invalid source language {:?}", d.source))?;
            let target = LanguageTag::new(&d.target)
                .with_context(|| format!("invalid target language {:?}", d.target))?;
            let direction = Direction::new(source.clone(), target.clone())
                .with_context(|| format!("invalid direction {}-{}", d.source, d.target))?;
            if d.stems.is_empty() {
                bail!("direction {direction} lists no corpus stems");
            }
            let mut files = Vec::new();
            for stem in &d.stems {
                let domain = stem
                    .file_name()
                    .and_then(|n| n.to_str())
                    .map(str::to_string)
                    .with_context(|| format!("bad corpus stem {}", stem.display()))?;
                let src = stem.with_extension(source.code());
                let tgt = stem.with_extension(target.code());
                for f in [&src, &tgt] {
                    if !f.is_file() {
                        bail!("corpus file {} not found (direction {direction})", f.display());
                    }
                }
                files.push((domain, src, tgt));
            }
            directions.push(DirectionConfig { direction, files });
        }
        let mut seen = std::collections::BTreeSet::new();
        for d in &directions {
            if !seen.insert(d.direction.clone()) {
                bail!("direction {} configured twice", d.direction);
            }
        }

        let out_dir = out_dir.unwrap_or(raw.out_dir);
        let bpe_model_path = raw
            .bpe
            .model_path
            .unwrap_or_else(|| out_dir.join("bpe").join("model.bpe"));
        let backend = raw.backend.map(|b| BackendConfig {
            endpoint: b.endpoint,
            model: b.model,
            top_p: b.top_p,
            temperature: b.temperature,
            length_multiplier: b.length_multiplier,
            max_matches: b.max_matches,
        });

        Ok(PipelineConfig {
            seed: seed.unwrap_or(raw.seed),
            out_dir,
            ratios,
            overlap_mode,
            bpe_vocab_size: raw.bpe.vocab_size,
            bpe_model_path,
            backend,
            directions,
            config_path: path.to_path_buf(),
        })
    }

    pub fn direction(&self, name: Option<&str>) -> Result<&DirectionConfig> {
        match name {
            None if self.directions.len() == 1 => Ok(&self.directions[0]),
            None => bail!(
                "config has {} directions; pass --direction",
                self.directions.len()
            ),
            Some(n) => {
                let wanted = Direction::parse(n)?;
                self.directions
                    .iter()
                    .find(|d| d.direction == wanted)
                    .with_context(|| format!("direction {n} not in config"))
            }
        }
    }
}
