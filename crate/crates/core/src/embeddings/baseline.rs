use std::sync::OnceLock;

use crate::codecs::{Codec, CodecConfig, MelCodec};
use crate::dsp::{AudioBuffer, StftPlan};
use crate::error::Result;
use crate::metrics::EmbeddingSet;

/// Length of a baseline embedding: per-band mean and std of 128 mel bands.
pub const BASELINE_DIM: usize = 256;

/// Maps a clip to a fixed-length feature vector.
pub trait Embedder: Sync {
    fn dim(&self) -> usize;

    fn embed(&self, audio: &AudioBuffer) -> Result<Vec<f64>>;

    /// Embeds every clip, in order.
    fn embed_all(&self, clips: &[AudioBuffer]) -> Result<EmbeddingSet> {
        use rayon::prelude::*;
        let rows = clips
            .par_iter()
            .map(|c| self.embed(c))
            .collect::<Result<Vec<_>>>()?;
        EmbeddingSet::from_rows(&rows)
    }
}

/// Per-band mean and population standard deviation of the log-mel
/// spectrogram over time.
#[derive(Debug)]
pub struct BaselineEmbedder {
    plan: StftPlan,
    mel: MelCodec,
}

impl BaselineEmbedder {
    pub fn new() -> Result<Self> {
        let config = CodecConfig::default();
        Ok(Self {
            plan: StftPlan::new(config.frame)?,
            mel: MelCodec::new(&config)?,
        })
    }
}

impl Embedder for BaselineEmbedder {
    fn dim(&self) -> usize {
        BASELINE_DIM
    }

    fn embed(&self, audio: &AudioBuffer) -> Result<Vec<f64>> {
        let samples = Codec::prepare(audio)?;
        let log_mel = self.mel.log_mel(&self.plan, &samples)?;
        let bands = self.mel.filterbank().n_mels();
        let frames = log_mel.len() / bands;
        let mut out = vec![0.0; 2 * bands];
        for (b, row) in log_mel.chunks_exact(frames).enumerate() {
            let mean = row.iter().sum::<f64>() / frames as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / frames as f64;
            out[b] = mean;
            out[bands + b] = var.sqrt();
        }
        Ok(out)
    }
}

/// [`BaselineEmbedder::embed`] with a shared default instance.
pub fn baseline_embed(audio: &AudioBuffer) -> Result<Vec<f64>> {
    static EMBEDDER: OnceLock<BaselineEmbedder> = OnceLock::new();
    if EMBEDDER.get().is_none() {
        let _ = EMBEDDER.set(BaselineEmbedder::new()?);
    }
    EMBEDDER.get().unwrap().embed(audio)
}
