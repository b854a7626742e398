use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{hann_periodic, AudioBuffer};
use crate::error::{invalid, Error, Result};

/// Framing parameters for the STFT.
///
/// The analysed signal is zero-padded to `padded_length` and treated as one
/// period of a periodic signal, so every sample is covered by exactly
/// `fft_size / hop` frames and there are `padded_length / hop` frames in
/// total. The window is always a periodic Hann of length `fft_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct FrameParams {
    pub fft_size: usize,
    pub hop: usize,
    pub padded_length: usize,
}

impl Default for FrameParams {
    fn default() -> Self {
        Self {
            fft_size: 1024,
            hop: 256,
            padded_length: 16384,
        }
    }
}

impl FrameParams {
    pub fn validate(&self) -> Result<()> {
        if !self.fft_size.is_power_of_two() || self.fft_size < 2 {
            return Err(invalid(format!(
                "fft_size must be a power of two >= 2, got {}",
                self.fft_size
            )));
        }
        if self.hop == 0 || self.hop > self.fft_size {
            return Err(invalid(format!(
                "hop must be in 1..={}, got {}",
                self.fft_size, self.hop
            )));
        }
        if !self.padded_length.is_multiple_of(self.hop) {
            return Err(invalid(format!(
                "hop {} does not divide padded length {}",
                self.hop, self.padded_length
            )));
        }
        if self.padded_length < self.fft_size {
            return Err(invalid("padded length shorter than fft size"));
        }
        // Hann is constant-overlap-add whenever the hop divides the window into
        // at least two equal parts.
        if !self.fft_size.is_multiple_of(self.hop) || self.fft_size / self.hop < 2 {
            return Err(invalid(format!(
                "Hann window of length {} is not COLA at hop {}",
                self.fft_size, self.hop
            )));
        }
        Ok(())
    }

    pub fn bins(&self) -> usize {
        self.fft_size / 2 + 1
    }

    pub fn frames(&self) -> usize {
        self.padded_length / self.hop
    }
}

/// One-sided complex spectrogram, stored bin-major (`data[bin * frames + frame]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    bins: usize,
    frames: usize,
    data: Vec<Complex64>,
}

impl ComplexSpectrogram {
    pub fn new(bins: usize, frames: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != bins * frames {
            return Err(Error::ShapeMismatch {
                expected: format!("{bins}x{frames} = {} values", bins * frames),
                actual: format!("{} values", data.len()),
            });
        }
        if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("spectrogram contains non-finite values"));
        }
        Ok(Self { bins, frames, data })
    }

    pub fn zeros(bins: usize, frames: usize) -> Self {
        Self {
            bins,
            frames,
            data: vec![Complex64::new(0.0, 0.0); bins * frames],
        }
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.data[bin * self.frames + frame]
    }

    pub fn set(&mut self, bin: usize, frame: usize, value: Complex64) {
        self.data[bin * self.frames + frame] = value;
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }
}

/// Precomputed STFT/iSTFT machinery for one set of [`FrameParams`].
#[derive(Clone)]
pub struct StftPlan {
    params: FrameParams,
    window: Vec<f64>,
    /// Reciprocal of the circular sum of squared windows at each sample.
    inv_norm: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StftPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftPlan")
            .field("params", &self.params)
            .finish()
    }
}

impl StftPlan {
    pub fn new(params: FrameParams) -> Result<Self> {
        params.validate()?;
        let window = hann_periodic(params.fft_size);
        let mut norm = vec![0.0; params.padded_length];
        for t in 0..params.frames() {
            let start = t * params.hop;
            for (n, w) in window.iter().enumerate() {
                norm[(start + n) % params.padded_length] += w * w;
            }
        }
        let inv_norm = norm.iter().map(|v| 1.0 / v).collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            params,
            window,
            inv_norm,
            forward: planner.plan_fft_forward(params.fft_size),
            inverse: planner.plan_fft_inverse(params.fft_size),
        })
    }

    pub fn params(&self) -> &FrameParams {
        &self.params
    }

    pub fn window(&self) -> &[f64] {
        &self.window
    }

    /// Analyses `samples` (at most `padded_length` long, zero-padded).
    pub fn forward(&self, samples: &[f64]) -> Result<ComplexSpectrogram> {
        let p = &self.params;
        if samples.len() > p.padded_length {
            return Err(invalid(format!(
                "signal of {} samples exceeds padded length {}",
                samples.len(),
                p.padded_length
            )));
        }
        let (bins, frames) = (p.bins(), p.frames());
        let mut padded = samples.to_vec();
        padded.resize(p.padded_length, 0.0);
        let mut out = ComplexSpectrogram::zeros(bins, frames);
        let mut buf = vec![Complex64::new(0.0, 0.0); p.fft_size];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for t in 0..frames {
            let start = t * p.hop;
            // frames near the end wrap around to the start of the period
            let head = p.fft_size.min(p.padded_length - start);
            let segments = [
                (&padded[start..start + head], 0),
                (&padded[..p.fft_size - head], head),
            ];
            for (segment, offset) in segments {
                let window = &self.window[offset..offset + segment.len()];
                for ((slot, s), w) in buf[offset..].iter_mut().zip(segment).zip(window) {
                    *slot = Complex64::new(s * w, 0.0);
                }
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            for (k, v) in buf.iter().take(bins).enumerate() {
                out.data[k * frames + t] = *v;
            }
        }
        Ok(out)
    }

    pub fn inverse_full(&self, spec: &ComplexSpectrogram) -> Result<Vec<f64>> {
        let p = &self.params;
        if spec.bins != p.bins() || spec.frames != p.frames() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", p.bins(), p.frames()),
                actual: format!("{}x{}", spec.bins, spec.frames),
            });
        }
        let n_fft = p.fft_size;
        let scale = 1.0 / n_fft as f64;
        let mut out = vec![0.0; p.padded_length];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let scaled: Vec<f64> = self.window.iter().map(|w| w * scale).collect();
        for t in 0..spec.frames {
            for (k, slot) in buf.iter_mut().take(spec.bins).enumerate() {
                *slot = spec.data[k * spec.frames + t];
            }
            for k in 1..n_fft / 2 {
                buf[n_fft - k] = buf[k].conj();
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = t * p.hop;
            let head = n_fft.min(p.padded_length - start);
            let (first, rest) = buf.split_at(head);
            for ((o, v), w) in out[start..start + head].iter_mut().zip(first).zip(&scaled) {
                *o += v.re * w;
            }
            for ((o, v), w) in out.iter_mut().zip(rest).zip(&scaled[head..]) {
                *o += v.re * w;
            }
        }
        for (o, inv) in out.iter_mut().zip(&self.inv_norm) {
            *o *= inv;
        }
        Ok(out)
    }

    /// Resynthesis truncated to `out_length` samples.
    pub fn inverse(&self, spec: &ComplexSpectrogram, out_length: usize) -> Result<Vec<f64>> {
        if out_length == 0 || out_length > self.params.padded_length {
            return Err(invalid(format!(
                "output length must be in 1..={}, got {out_length}",
                self.params.padded_length
            )));
        }
        let mut full = self.inverse_full(spec)?;
        full.truncate(out_length);
        Ok(full)
    }
}

/// Short-time Fourier transform with the given framing.
pub fn stft(audio: &AudioBuffer, params: &FrameParams) -> Result<ComplexSpectrogram> {
    StftPlan::new(*params)?.forward(audio.samples())
}

/// Weighted overlap-add inverse of [`stft`].
pub fn istft(
    spec: &ComplexSpectrogram,
    params: &FrameParams,
    out_length: usize,
) -> Result<AudioBuffer> {
    let samples = StftPlan::new(*params)?.inverse(spec, out_length)?;
    AudioBuffer::from_samples(samples)
}
