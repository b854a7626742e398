use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use audiorep::codecs::CodecConfig;
use audiorep::harness::ReportFormat;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Common;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BENCH_CLIPS: usize = 10;
pub const DEFAULT_REPETITIONS: usize = 5;

/// Keys accepted in a `--config` TOML file. Any key may be omitted; unknown
/// keys are an error.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub gl_iters: Option<usize>,
    pub format: Option<ReportFormat>,
    pub dataset: Option<String>,
    pub metadata: Option<PathBuf>,
    pub n_per_class: Option<usize>,
    pub noise_level: Option<f64>,
    pub clips: Option<usize>,
    pub repetitions: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flag value, else file value, else default.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

/// Seed and thread count resolved from flags and file.
pub fn common(c: &Common, file: &FileConfig) -> (u64, usize) {
    (
        pick(c.seed, file.seed, DEFAULT_SEED),
        pick(c.jobs, file.jobs, 0),
    )
}

pub fn codec_config(gl_iters: Option<usize>, file: &FileConfig, seed: u64) -> CodecConfig {
    let defaults = CodecConfig::default();
    CodecConfig {
        griffin_lim_iters: pick(gl_iters, file.gl_iters, defaults.griffin_lim_iters),
        griffin_lim_seed: seed,
        ..defaults
    }
}

/// Everything that determines a command's output, hashed for provenance.
#[derive(Debug, Serialize)]
pub struct Provenance {
    pub command: &'static str,
    pub seed: u64,
    pub reprs: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_per_class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clips: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repetitions: Option<usize>,
    pub codec: CodecConfig,
}

impl Provenance {
    pub fn new(command: &'static str, seed: u64, codec: CodecConfig) -> Self {
        Self {
            command,
            seed,
            reprs: Vec::new(),
            inputs: Vec::new(),
            dataset: None,
            n_per_class: None,
            noise_level: None,
            clips: None,
            repetitions: None,
            codec,
        }
    }

    /// Hex SHA-256 of the TOML rendering.
    pub fn hash(&self) -> Result<String> {
        let text = toml::to_string(self).context("serializing configuration")?;
        let digest = Sha256::digest(text.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}
