//! Representation codecs: paired encode/decode transforms with fixed tensor
//! layouts for 1 s clips at 16 kHz.
//!
//! | repr     | channels | bins | frames |
//! |----------|----------|------|--------|
//! | waveform | 1        | 1    | 16000  |
//! | complex  | 2        | 512  | 64     |
//! | mag-if   | 2        | 512  | 64     |
//! | cq-nsgt  | 4        | 97   | 948    |
//! | cqt      | 2        | 84   | 256    |
//! | mel      | 1        | 128  | 64     |
//! | mfcc     | 1        | 128  | 64     |

mod complex;
pub mod cqt;
mod griffin_lim;
mod magif;
mod melspec;
pub mod nsgt;
mod tensor;
mod tensor_io;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use complex::{complex_pack, complex_unpack};
pub use cqt::{CqtKernel, CqtParams};
pub use griffin_lim::{griffin_lim, griffin_lim_traced, spectral_error};
pub use magif::{magif_decode, magif_encode};
pub use melspec::MelCodec;
pub use nsgt::{nsgt_build, nsgt_decode, nsgt_encode, NsgtFrame, NsgtParams};
pub use tensor::{RepTensor, Representation};
pub use tensor_io::{read_tensor, read_tensor_file, write_tensor, write_tensor_file};

use crate::dsp::{AudioBuffer, FrameParams, StftPlan, SAMPLE_RATE};
use crate::error::{invalid, Error, Result};

/// Clip length every codec works with, in samples.
pub const CLIP_LEN: usize = 16_000;

/// Settings shared by all codecs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodecConfig {
    pub frame: FrameParams,
    /// Offset added before taking logs of magnitudes.
    pub log_offset: f64,
    pub griffin_lim_iters: usize,
    pub griffin_lim_seed: u64,
    pub n_mels: usize,
    pub mel_fmin: f64,
    pub mel_fmax: f64,
    pub cqt: CqtParams,
    pub nsgt: NsgtParams,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            frame: FrameParams::default(),
            log_offset: 1e-6,
            griffin_lim_iters: 60,
            griffin_lim_seed: 0,
            n_mels: 128,
            mel_fmin: 0.0,
            mel_fmax: 8000.0,
            cqt: CqtParams::default(),
            nsgt: NsgtParams::default(),
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        if self.frame.padded_length < CLIP_LEN {
            return Err(invalid("padded length must hold a full clip"));
        }
        let (_, bins, frames) = Representation::Complex.shape();
        if self.frame.bins() != bins + 1 || self.frame.frames() != frames {
            return Err(Error::Config(format!(
                "frame parameters give {}x{} spectrograms; the stored layout needs {}x{frames}",
                self.frame.bins(),
                self.frame.frames(),
                bins + 1
            )));
        }
        if !(self.log_offset > 0.0 && self.log_offset.is_finite()) {
            return Err(invalid("log offset must be positive"));
        }
        if self.griffin_lim_iters == 0 {
            return Err(invalid("griffin-lim needs at least one iteration"));
        }
        let (_, mels, _) = Representation::Mel.shape();
        if self.n_mels != mels {
            return Err(Error::Config(format!(
                "mel codecs store {mels} bands, got {}",
                self.n_mels
            )));
        }
        self.cqt.validate()?;
        let (_, cqt_bins, _) = Representation::Cqt.shape();
        if self.cqt.n_bins != cqt_bins {
            return Err(Error::Config(format!(
                "cqt stores {cqt_bins} bins, got {}",
                self.cqt.n_bins
            )));
        }
        Ok(())
    }
}

/// All seven codecs behind one immutable, shareable object.
///
/// Expensive pieces (the CQT kernel, mel pseudo-inverse) are built on first
/// use.
#[derive(Debug)]
pub struct Codec {
    config: CodecConfig,
    stft: StftPlan,
    nsgt: NsgtFrame,
    mel: OnceLock<MelCodec>,
    cqt: OnceLock<CqtKernel>,
}

impl Codec {
    pub fn new(config: CodecConfig) -> Result<Self> {
        config.validate()?;
        let stft = StftPlan::new(config.frame)?;
        let nsgt = nsgt_build(&config.nsgt)?;
        // fail early on an unusable filterbank
        crate::dsp::mel_filterbank(
            config.n_mels,
            config.frame.bins(),
            SAMPLE_RATE,
            config.mel_fmin,
            config.mel_fmax,
        )?;
        Ok(Self {
            config,
            stft,
            nsgt,
            mel: OnceLock::new(),
            cqt: OnceLock::new(),
        })
    }

    pub fn config(&self) -> &CodecConfig {
        &self.config
    }

    pub fn stft_plan(&self) -> &StftPlan {
        &self.stft
    }

    pub fn nsgt_frame(&self) -> &NsgtFrame {
        &self.nsgt
    }

    pub fn mel_codec(&self) -> &MelCodec {
        self.mel.get_or_init(|| {
            MelCodec::new(&self.config).expect("mel configuration validated in Codec::new")
        })
    }

    pub fn cqt_kernel(&self) -> &CqtKernel {
        self.cqt.get_or_init(|| {
            CqtKernel::new(self.config.cqt).expect("cqt configuration validated in Codec::new")
        })
    }

    /// Checks rate and length and returns the clip zero-padded to [`CLIP_LEN`].
    pub fn prepare(audio: &AudioBuffer) -> Result<Vec<f64>> {
        if audio.sample_rate() != SAMPLE_RATE {
            return Err(invalid(format!(
                "codecs run at {SAMPLE_RATE} Hz, got {} Hz",
                audio.sample_rate()
            )));
        }
        if audio.len() > CLIP_LEN {
            return Err(invalid(format!(
                "clip has {} samples, at most {CLIP_LEN} allowed",
                audio.len()
            )));
        }
        let mut samples = audio.samples().to_vec();
        samples.resize(CLIP_LEN, 0.0);
        Ok(samples)
    }

    pub fn encode(&self, repr: Representation, audio: &AudioBuffer) -> Result<RepTensor> {
        let samples = Self::prepare(audio)?;
        let eps = self.config.log_offset;
        match repr {
            Representation::Waveform => {
                RepTensor::new(repr, samples.iter().map(|s| *s as f32).collect())
            }
            Representation::Complex => complex_pack(&self.stft.forward(&samples)?),
            Representation::MagIf => magif_encode(&self.stft.forward(&samples)?, eps),
            Representation::CqNsgt => nsgt_encode(&samples, &self.nsgt),
            Representation::Cqt => self.cqt_kernel().encode(&samples),
            Representation::Mel => self.mel_codec().encode_mel(&self.stft, &samples),
            Representation::Mfcc => self.mel_codec().encode_mfcc(&self.stft, &samples),
        }
    }

    pub fn decode(&self, tensor: &RepTensor) -> Result<AudioBuffer> {
        tensor.validate()?;
        let eps = self.config.log_offset;
        let (iters, seed) = (self.config.griffin_lim_iters, self.config.griffin_lim_seed);
        let samples = match tensor.repr() {
            Representation::Waveform => tensor.data().iter().map(|v| *v as f64).collect(),
            Representation::Complex => self.stft.inverse(&complex_unpack(tensor)?, CLIP_LEN)?,
            Representation::MagIf => self.stft.inverse(&magif_decode(tensor, eps)?, CLIP_LEN)?,
            Representation::CqNsgt => nsgt_decode(tensor, &self.nsgt)?,
            Representation::Cqt => self.cqt_kernel().decode(tensor)?,
            Representation::Mel => self
                .mel_codec()
                .decode_mel(&self.stft, tensor, iters, seed)?,
            Representation::Mfcc => self
                .mel_codec()
                .decode_mfcc(&self.stft, tensor, iters, seed)?,
        };
        AudioBuffer::from_samples(samples)
    }
}

/// One-shot encode with a freshly built codec.
pub fn encode(
    repr: Representation,
    audio: &AudioBuffer,
    config: &CodecConfig,
) -> Result<RepTensor> {
    Codec::new(config.clone())?.encode(repr, audio)
}

/// One-shot decode with a freshly built codec.
pub fn decode(tensor: &RepTensor, config: &CodecConfig) -> Result<AudioBuffer> {
    Codec::new(config.clone())?.decode(tensor)
}
