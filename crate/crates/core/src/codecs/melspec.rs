use nalgebra::DMatrix;

use super::griffin_lim::griffin_lim;
use super::{CodecConfig, RepTensor, Representation, CLIP_LEN};
use crate::dsp::{mel_filterbank, Dct, MelFilterbank, StftPlan, SAMPLE_RATE};
use crate::error::{Error, Result};

/// Log-mel and MFCC analysis plus their Griffin-Lim based inverses.
#[derive(Debug, Clone)]
pub struct MelCodec {
    filterbank: MelFilterbank,
    /// Pseudo-inverse of the filterbank, `bins x n_mels`, row-major.
    pinv: Vec<f64>,
    dct: Dct,
    eps: f64,
}

impl MelCodec {
    pub fn new(config: &CodecConfig) -> Result<Self> {
        let filterbank = mel_filterbank(
            config.n_mels,
            config.frame.bins(),
            SAMPLE_RATE,
            config.mel_fmin,
            config.mel_fmax,
        )?;
        let (n_mels, bins) = (filterbank.n_mels(), filterbank.bins());
        let m = DMatrix::from_row_slice(n_mels, bins, filterbank.weights());
        let pinv = m
            .pseudo_inverse(1e-10)
            .map_err(|e| Error::Config(format!("mel pseudo-inverse failed: {e}")))?;
        let pinv = (0..bins)
            .flat_map(|k| (0..n_mels).map(move |j| (k, j)))
            .map(|(k, j)| pinv[(k, j)])
            .collect();
        Ok(Self {
            filterbank,
            pinv,
            dct: Dct::new(n_mels)?,
            eps: config.log_offset,
        })
    }

    pub fn filterbank(&self) -> &MelFilterbank {
        &self.filterbank
    }

    /// `ln(M |S| + eps)`, mel-band-major (`out[band * frames + frame]`).
    pub fn log_mel(&self, plan: &StftPlan, samples: &[f64]) -> Result<Vec<f64>> {
        let spec = plan.forward(samples)?;
        let (bins, frames) = (spec.bins(), spec.frames());
        let mags = spec.magnitudes();
        let n_mels = self.filterbank.n_mels();
        let mut out = vec![0.0; n_mels * frames];
        let mut column = vec![0.0; bins];
        for t in 0..frames {
            for (k, c) in column.iter_mut().enumerate() {
                *c = mags[k * frames + t];
            }
            for (m, v) in self.filterbank.apply(&column).into_iter().enumerate() {
                out[m * frames + t] = (v + self.eps).ln();
            }
        }
        Ok(out)
    }

    pub fn encode_mel(&self, plan: &StftPlan, samples: &[f64]) -> Result<RepTensor> {
        let log_mel = self.log_mel(plan, samples)?;
        RepTensor::new(
            Representation::Mel,
            log_mel.iter().map(|v| *v as f32).collect(),
        )
    }

    pub fn encode_mfcc(&self, plan: &StftPlan, samples: &[f64]) -> Result<RepTensor> {
        let log_mel = self.log_mel(plan, samples)?;
        let n_mels = self.filterbank.n_mels();
        let frames = log_mel.len() / n_mels;
        let mut out = vec![0.0f32; log_mel.len()];
        for t in 0..frames {
            let column: Vec<f64> = (0..n_mels).map(|m| log_mel[m * frames + t]).collect();
            for (q, c) in self.dct.forward(&column)?.into_iter().enumerate() {
                out[q * frames + t] = c as f32;
            }
        }
        RepTensor::new(Representation::Mfcc, out)
    }

    /// Inverts a log-mel matrix: undo the log, map back to linear frequency
    /// through the pseudo-inverse (negatives clamped), then recover phase.
    pub fn invert_log_mel(
        &self,
        plan: &StftPlan,
        log_mel: &[f64],
        iters: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        let n_mels = self.filterbank.n_mels();
        let bins = self.filterbank.bins();
        let frames = log_mel.len() / n_mels;
        let mel: Vec<f64> = log_mel
            .iter()
            .map(|v| (v.exp() - self.eps).max(0.0))
            .collect();
        let mut mag = vec![0.0; bins * frames];
        for k in 0..bins {
            let row = &self.pinv[k * n_mels..(k + 1) * n_mels];
            for t in 0..frames {
                let v: f64 = row
                    .iter()
                    .enumerate()
                    .map(|(m, w)| w * mel[m * frames + t])
                    .sum();
                mag[k * frames + t] = v.max(0.0);
            }
        }
        let mut audio = griffin_lim(plan, &mag, iters, seed)?.into_samples();
        audio.truncate(CLIP_LEN);
        Ok(audio)
    }

    pub fn decode_mel(
        &self,
        plan: &StftPlan,
        t: &RepTensor,
        iters: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        t.expect_repr(Representation::Mel)?;
        let log_mel: Vec<f64> = t.data().iter().map(|v| *v as f64).collect();
        self.invert_log_mel(plan, &log_mel, iters, seed)
    }

    pub fn decode_mfcc(
        &self,
        plan: &StftPlan,
        t: &RepTensor,
        iters: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        t.expect_repr(Representation::Mfcc)?;
        let n_mels = self.filterbank.n_mels();
        let frames = t.frames();
        let mut log_mel = vec![0.0; n_mels * frames];
        for f in 0..frames {
            let coeffs: Vec<f64> = (0..n_mels).map(|q| t.get(0, q, f) as f64).collect();
            for (m, v) in self.dct.inverse(&coeffs)?.into_iter().enumerate() {
                log_mel[m * frames + f] = v;
            }
        }
        self.invert_log_mel(plan, &log_mel, iters, seed)
    }
}
