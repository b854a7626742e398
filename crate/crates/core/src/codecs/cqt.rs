//! Constant-Q transform with a direct time-domain kernel.
//!
//! Each bin is a Hann-windowed complex exponential whose length is
//! `Q * fs / f_k`, so bandwidth scales with center frequency. Frames are
//! centered at multiples of the hop. Decoding is a single pass of the
//! adjoint operator with a per-bin gain correction, which inverts the
//! transform approximately (exact only where the coefficient sequences are
//! not aliased).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{RepTensor, Representation, CLIP_LEN};
use crate::dsp::SAMPLE_RATE;
use crate::error::{invalid, Result};

/// Frequency of C1 in Hz.
pub const C1_HZ: f64 = 32.703_195_662_574_83;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CqtParams {
    pub bins_per_octave: usize,
    pub n_bins: usize,
    pub fmin: f64,
    pub hop: usize,
    pub filter_scale: f64,
}

impl Default for CqtParams {
    fn default() -> Self {
        Self {
            bins_per_octave: 12,
            n_bins: 84,
            fmin: C1_HZ,
            hop: 64,
            filter_scale: 1.0,
        }
    }
}

impl CqtParams {
    pub fn q(&self) -> f64 {
        self.filter_scale / (2f64.powf(1.0 / self.bins_per_octave as f64) - 1.0)
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        self.fmin * 2f64.powf(bin as f64 / self.bins_per_octave as f64)
    }

    /// Frames produced for a clip of `len` samples (centered framing).
    pub fn frames_for(&self, len: usize) -> usize {
        len / self.hop + 1
    }

    pub fn validate(&self) -> Result<()> {
        let nyquist = SAMPLE_RATE as f64 / 2.0;
        if self.bins_per_octave == 0 || self.n_bins == 0 || self.hop == 0 {
            return Err(invalid(
                "cqt bins, bins per octave and hop must be positive",
            ));
        }
        if !(self.fmin > 0.0) || !(self.filter_scale > 0.0) {
            return Err(invalid("cqt fmin and filter scale must be positive"));
        }
        let top = self.fmin * 2f64.powf(self.n_bins as f64 / self.bins_per_octave as f64);
        if top > nyquist {
            return Err(invalid(format!(
                "cqt range tops out at {top:.1} Hz, above Nyquist {nyquist} Hz"
            )));
        }
        let (_, _, frames) = Representation::Cqt.shape();
        if self.frames_for(CLIP_LEN) > frames {
            return Err(invalid(format!(
                "hop {} gives {} frames, more than the {frames} stored",
                self.hop,
                self.frames_for(CLIP_LEN)
            )));
        }
        Ok(())
    }
}

struct Atom {
    freq: f64,
    /// `w[m] exp(i 2 pi f (m - half) / fs)` with `sum w = 1`.
    taps: Vec<Complex64>,
    half: usize,
    /// Reciprocal of the frame-operator gain at the bin center.
    synth_gain: f64,
}

/// Precomputed CQT atoms.
pub struct CqtKernel {
    params: CqtParams,
    atoms: Vec<Atom>,
}

impl std::fmt::Debug for CqtKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CqtKernel")
            .field("params", &self.params)
            .finish()
    }
}

fn window_response(window: &[f64], half: usize, offset_hz: f64) -> Complex64 {
    let fs = SAMPLE_RATE as f64;
    window
        .iter()
        .enumerate()
        .map(|(m, w)| {
            Complex64::from_polar(*w, 2.0 * PI * offset_hz * (m as f64 - half as f64) / fs)
        })
        .sum()
}

impl CqtKernel {
    pub fn new(params: CqtParams) -> Result<Self> {
        params.validate()?;
        let fs = SAMPLE_RATE as f64;
        let q = params.q();
        let windows: Vec<(f64, Vec<f64>)> = (0..params.n_bins)
            .map(|k| {
                let freq = params.frequency(k);
                let len = (q * fs / freq).ceil() as usize;
                let raw: Vec<f64> = (0..len)
                    .map(|m| 0.5 - 0.5 * (2.0 * PI * m as f64 / len as f64).cos())
                    .collect();
                let total: f64 = raw.iter().sum();
                (freq, raw.into_iter().map(|w| w / total).collect())
            })
            .collect();

        let hop = params.hop as f64;
        let atoms = (0..params.n_bins)
            .map(|k| {
                let (freq, window) = &windows[k];
                let half = window.len() / 2;
                // Neighbours beyond a few bins contribute nothing measurable.
                let lo = k.saturating_sub(6);
                let hi = (k + 6).min(params.n_bins - 1);
                let gain: f64 = (lo..=hi)
                    .map(|j| {
                        let (fj, wj) = &windows[j];
                        window_response(wj, wj.len() / 2, freq - fj).norm_sqr()
                    })
                    .sum::<f64>()
                    / hop;
                let taps = window
                    .iter()
                    .enumerate()
                    .map(|(m, w)| {
                        Complex64::from_polar(*w, 2.0 * PI * freq * (m as f64 - half as f64) / fs)
                    })
                    .collect();
                Atom {
                    freq: *freq,
                    taps,
                    half,
                    synth_gain: 1.0 / gain,
                }
            })
            .collect();
        Ok(Self { params, atoms })
    }

    pub fn params(&self) -> &CqtParams {
        &self.params
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.freq).collect()
    }

    /// Complex coefficients, bin-major, `frames_for(samples.len())` frames.
    pub fn analyze(&self, samples: &[f64]) -> Vec<Vec<Complex64>> {
        let frames = self.params.frames_for(samples.len());
        let len = samples.len() as isize;
        self.atoms
            .iter()
            .map(|atom| {
                (0..frames)
                    .map(|t| {
                        let origin = (t * self.params.hop) as isize - atom.half as isize;
                        let m_lo = (-origin).max(0) as usize;
                        let m_hi = ((len - origin).max(0) as usize).min(atom.taps.len());
                        let mut acc = Complex64::new(0.0, 0.0);
                        for m in m_lo..m_hi {
                            acc += atom.taps[m].conj() * samples[(origin + m as isize) as usize];
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Adjoint projection back to `len` real samples.
    pub fn synthesize(&self, coeffs: &[Vec<Complex64>], len: usize) -> Vec<f64> {
        let mut acc = vec![Complex64::new(0.0, 0.0); len];
        for (atom, row) in self.atoms.iter().zip(coeffs) {
            for (t, c) in row.iter().enumerate() {
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                let c = c * atom.synth_gain;
                let origin = (t * self.params.hop) as isize - atom.half as isize;
                let m_lo = (-origin).max(0) as usize;
                let m_hi = ((len as isize - origin).max(0) as usize).min(atom.taps.len());
                for m in m_lo..m_hi {
                    acc[(origin + m as isize) as usize] += c * atom.taps[m];
                }
            }
        }
        acc.into_iter().map(|v| 2.0 * v.re).collect()
    }

    pub fn encode(&self, samples: &[f64]) -> Result<RepTensor> {
        let coeffs = self.analyze(samples);
        let mut t = RepTensor::zeros(Representation::Cqt);
        for (k, row) in coeffs.iter().enumerate() {
            for (f, c) in row.iter().enumerate() {
                t.set(0, k, f, c.re as f32);
                t.set(1, k, f, c.im as f32);
            }
        }
        Ok(t)
    }

    /// Frames past the analysed range are padding and are ignored.
    pub fn decode(&self, t: &RepTensor) -> Result<Vec<f64>> {
        t.expect_repr(Representation::Cqt)?;
        let frames = self.params.frames_for(CLIP_LEN);
        let coeffs: Vec<Vec<Complex64>> = (0..self.params.n_bins)
            .map(|k| {
                (0..frames)
                    .map(|f| Complex64::new(t.get(0, k, f) as f64, t.get(1, k, f) as f64))
                    .collect()
            })
            .collect();
        Ok(self.synthesize(&coeffs, CLIP_LEN))
    }
}
