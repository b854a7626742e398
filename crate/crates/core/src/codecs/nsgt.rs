//! Constant-Q nonstationary Gabor transform in the painless case.
//!
//! The transform works on the whole clip in the frequency domain. Each band
//! has a compactly supported window on the frequency axis; the windowed
//! spectrum is shifted to baseband and inverse-transformed at a common
//! coefficient length `M`. As long as every window support fits in `M` bins
//! the frame operator is diagonal, and dividing the windows by it yields
//! the canonical dual frame, which reconstructs exactly.
//!
//! Bands are laid out for a complex signal: one DC band, `K` positive bands
//! on a geometric grid and their `K` mirror images at negative frequencies.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::cqt::C1_HZ;
use super::{RepTensor, Representation, CLIP_LEN};
use crate::dsp::SAMPLE_RATE;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsgtParams {
    /// Total band count including DC and both frequency signs.
    pub n_bins: usize,
    /// Center of the lowest positive band, Hz.
    pub fmin: f64,
    /// Center of the highest positive band, Hz.
    pub fmax: f64,
    /// Coefficients per band.
    pub frames: usize,
}

impl Default for NsgtParams {
    fn default() -> Self {
        Self {
            n_bins: 193,
            fmin: C1_HZ,
            // 96 positive bands at 12 per octave starting from C1
            fmax: C1_HZ * 2f64.powf(95.0 / 12.0),
            frames: 948,
        }
    }
}

impl NsgtParams {
    pub fn positive_bands(&self) -> usize {
        (self.n_bins - 1) / 2
    }

    pub fn bins_per_octave(&self) -> f64 {
        (self.positive_bands() - 1) as f64 / (self.fmax / self.fmin).log2()
    }
}

/// Which side of the spectrum a band lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSide {
    Dc,
    Positive(usize),
    Negative(usize),
}

/// One analysis band: window samples on consecutive integer frequency bins
/// starting at `first_bin` (may be negative or exceed the Nyquist bin; bins
/// wrap modulo the signal length).
#[derive(Debug, Clone)]
pub struct NsgtBand {
    pub side: BandSide,
    pub center_hz: f64,
    pub center_bin: i64,
    pub first_bin: i64,
    pub window: Vec<f64>,
    pub dual: Vec<f64>,
}

/// Precomputed painless frame plus FFT plans.
#[derive(Clone)]
pub struct NsgtFrame {
    params: NsgtParams,
    signal_len: usize,
    bands: Vec<NsgtBand>,
    fft_signal: Arc<dyn Fft<f64>>,
    ifft_signal: Arc<dyn Fft<f64>>,
    fft_coeff: Arc<dyn Fft<f64>>,
    ifft_coeff: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NsgtFrame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NsgtFrame")
            .field("params", &self.params)
            .field("signal_len", &self.signal_len)
            .field("bands", &self.bands.len())
            .finish()
    }
}

/// Positive-side window of band `k` (1-based) over the grid `p`, which has
/// `p[0] = 0` and one extra point above the top band.
fn band_window(p: &[f64], k: usize, f: f64) -> f64 {
    let (lo, mid, hi) = (p[k - 1], p[k], p[k + 1]);
    if f > lo && f <= mid {
        (FRAC_PI_2 * (f - lo) / (mid - lo)).sin()
    } else if f > mid && f < hi {
        (FRAC_PI_2 * (f - mid) / (hi - mid)).cos()
    } else {
        0.0
    }
}

/// Builds the frame for 1 s clips at 16 kHz.
pub fn nsgt_build(params: &NsgtParams) -> Result<NsgtFrame> {
    NsgtFrame::new(*params, CLIP_LEN)
}

impl NsgtFrame {
    pub fn new(params: NsgtParams, signal_len: usize) -> Result<Self> {
        let fs = SAMPLE_RATE as f64;
        let nyquist = fs / 2.0;
        if params.n_bins < 3 || params.n_bins.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "nsgt band count must be odd and >= 3 (DC plus mirrored halves), got {}",
                params.n_bins
            )));
        }
        let k_bands = params.positive_bands();
        let (_, rows, _) = Representation::CqNsgt.shape();
        if k_bands > rows {
            return Err(Error::Config(format!(
                "{k_bands} bands per side do not fit in {rows} tensor rows"
            )));
        }
        if !(params.fmin > 0.0 && params.fmax > params.fmin && params.fmax < nyquist) {
            return Err(Error::Config(format!(
                "nsgt needs 0 < fmin < fmax < {nyquist} Hz, got {} and {}",
                params.fmin, params.fmax
            )));
        }
        if params.frames == 0 || signal_len == 0 {
            return Err(Error::Config("nsgt lengths must be positive".into()));
        }

        let ratio = 2f64.powf(1.0 / params.bins_per_octave());
        let mut grid = vec![0.0];
        grid.extend((0..k_bands).map(|k| params.fmin * ratio.powi(k as i32)));
        grid.push(grid[k_bands] * ratio);

        let hz_per_bin = fs / signal_len as f64;
        let len = signal_len as i64;
        let mut bands = Vec::with_capacity(params.n_bins);

        // DC band: cosine lobe on (-p1, p1).
        let reach = (grid[1] / hz_per_bin).ceil() as i64 - 1;
        bands.push(NsgtBand {
            side: BandSide::Dc,
            center_hz: 0.0,
            center_bin: 0,
            first_bin: -reach,
            window: (-reach..=reach)
                .map(|b| (FRAC_PI_2 * (b as f64 * hz_per_bin).abs() / grid[1]).cos())
                .collect(),
            dual: Vec::new(),
        });
        for k in 1..=k_bands {
            let lo = (grid[k - 1] / hz_per_bin).floor() as i64 + 1;
            let hi = (grid[k + 1] / hz_per_bin).ceil() as i64 - 1;
            let window: Vec<f64> = (lo..=hi)
                .map(|b| band_window(&grid, k, b as f64 * hz_per_bin))
                .collect();
            let center_bin = (grid[k] / hz_per_bin).round() as i64;
            bands.push(NsgtBand {
                side: BandSide::Positive(k),
                center_hz: grid[k],
                center_bin,
                first_bin: lo,
                window: window.clone(),
                dual: Vec::new(),
            });
            bands.push(NsgtBand {
                side: BandSide::Negative(k),
                center_hz: -grid[k],
                center_bin: -center_bin,
                first_bin: -hi,
                window: window.into_iter().rev().collect(),
                dual: Vec::new(),
            });
        }

        for band in &bands {
            if band.window.len() > params.frames {
                return Err(Error::Config(format!(
                    "band at {:.1} Hz spans {} bins, more than the {} coefficients per band \
                     (painless condition violated)",
                    band.center_hz,
                    band.window.len(),
                    params.frames
                )));
            }
        }

        let mut diag = vec![0.0; signal_len];
        for band in &bands {
            for (i, w) in band.window.iter().enumerate() {
                diag[(band.first_bin + i as i64).rem_euclid(len) as usize] += w * w;
            }
        }
        if let Some(bin) = diag.iter().position(|d| !(*d > 1e-12)) {
            return Err(Error::Config(format!(
                "frame operator vanishes at bin {bin}; bands do not cover the spectrum"
            )));
        }
        for band in &mut bands {
            band.dual = band
                .window
                .iter()
                .enumerate()
                .map(|(i, w)| w / diag[(band.first_bin + i as i64).rem_euclid(len) as usize])
                .collect();
        }

        let mut planner = FftPlanner::new();
        Ok(Self {
            params,
            signal_len,
            bands,
            fft_signal: planner.plan_fft_forward(signal_len),
            ifft_signal: planner.plan_fft_inverse(signal_len),
            fft_coeff: planner.plan_fft_forward(params.frames),
            ifft_coeff: planner.plan_fft_inverse(params.frames),
        })
    }

    pub fn params(&self) -> &NsgtParams {
        &self.params
    }

    /// Bands in order: DC, then (positive k, negative k) pairs for k = 1..K.
    pub fn bands(&self) -> &[NsgtBand] {
        &self.bands
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    fn slot(&self, band: &NsgtBand, i: usize) -> usize {
        (band.first_bin + i as i64 - band.center_bin).rem_euclid(self.params.frames as i64) as usize
    }

    /// Coefficients for every band, each of length `frames`.
    pub fn analyze(&self, samples: &[f64]) -> Result<Vec<Vec<Complex64>>> {
        if samples.len() > self.signal_len {
            return Err(Error::InvalidArgument(format!(
                "signal of {} samples exceeds frame length {}",
                samples.len(),
                self.signal_len
            )));
        }
        let len = self.signal_len as i64;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.signal_len];
        for (s, v) in spectrum.iter_mut().zip(samples) {
            s.re = *v;
        }
        self.fft_signal.process(&mut spectrum);
        let m = self.params.frames;
        let scale = 1.0 / self.signal_len as f64;
        Ok(self
            .bands
            .iter()
            .map(|band| {
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                for (i, w) in band.window.iter().enumerate() {
                    let bin = (band.first_bin + i as i64).rem_euclid(len) as usize;
                    buf[self.slot(band, i)] = spectrum[bin] * *w;
                }
                self.ifft_coeff.process(&mut buf);
                buf.iter_mut().for_each(|v| *v *= scale);
                buf
            })
            .collect())
    }

    /// Dual-frame synthesis; exact inverse of [`NsgtFrame::analyze`].
    pub fn synthesize(&self, coeffs: &[Vec<Complex64>]) -> Result<Vec<f64>> {
        let m = self.params.frames;
        if coeffs.len() != self.bands.len() || coeffs.iter().any(|c| c.len() != m) {
            return Err(Error::ShapeMismatch {
                expected: format!("{} bands x {m}", self.bands.len()),
                actual: format!("{} bands", coeffs.len()),
            });
        }
        let len = self.signal_len as i64;
        let up = self.signal_len as f64 / m as f64;
        let mut spectrum = vec![Complex64::new(0.0, 0.0); self.signal_len];
        for (band, c) in self.bands.iter().zip(coeffs) {
            if c.iter().all(|v| v.norm_sqr() == 0.0) {
                continue;
            }
            let mut buf = c.clone();
            self.fft_coeff.process(&mut buf);
            for (i, d) in band.dual.iter().enumerate() {
                let bin = (band.first_bin + i as i64).rem_euclid(len) as usize;
                spectrum[bin] += buf[self.slot(band, i)] * (*d * up);
            }
        }
        self.ifft_signal.process(&mut spectrum);
        let scale = 1.0 / self.signal_len as f64;
        Ok(spectrum.iter().map(|v| v.re * scale).collect())
    }

    /// Folds band coefficients into the (4, 97, frames) layout: magnitude and
    /// phase of the positive bands, then of the negative bands, rows ordered
    /// by ascending |frequency|. The DC band is dropped.
    pub fn fold(&self, coeffs: &[Vec<Complex64>]) -> Result<RepTensor> {
        let mut t = RepTensor::zeros(Representation::CqNsgt);
        if t.frames() != self.params.frames {
            return Err(Error::Config(format!(
                "nsgt produces {} coefficients per band but the tensor holds {}",
                self.params.frames,
                t.frames()
            )));
        }
        for (band, c) in self.bands.iter().zip(coeffs) {
            let (mag_ch, row) = match band.side {
                BandSide::Dc => continue,
                BandSide::Positive(k) => (0, k - 1),
                BandSide::Negative(k) => (2, k - 1),
            };
            for (f, v) in c.iter().enumerate() {
                let phase = if v.norm() == 0.0 { 0.0 } else { v.arg() };
                t.set(mag_ch, row, f, v.norm() as f32);
                t.set(mag_ch + 1, row, f, phase as f32);
            }
        }
        Ok(t)
    }

    /// Inverse of [`NsgtFrame::fold`]; the DC band comes back as zeros.
    pub fn unfold(&self, t: &RepTensor) -> Result<Vec<Vec<Complex64>>> {
        t.expect_repr(Representation::CqNsgt)?;
        let m = self.params.frames;
        if t.frames() != m {
            return Err(Error::Config(format!(
                "tensor holds {} frames, frame expects {m}",
                t.frames()
            )));
        }
        Ok(self
            .bands
            .iter()
            .map(|band| {
                let (mag_ch, row) = match band.side {
                    BandSide::Dc => return vec![Complex64::new(0.0, 0.0); m],
                    BandSide::Positive(k) => (0, k - 1),
                    BandSide::Negative(k) => (2, k - 1),
                };
                (0..m)
                    .map(|f| {
                        Complex64::from_polar(
                            t.get(mag_ch, row, f) as f64,
                            t.get(mag_ch + 1, row, f) as f64,
                        )
                    })
                    .collect()
            })
            .collect())
    }
}

pub fn nsgt_encode(samples: &[f64], frame: &NsgtFrame) -> Result<RepTensor> {
    frame.fold(&frame.analyze(samples)?)
}

pub fn nsgt_decode(t: &RepTensor, frame: &NsgtFrame) -> Result<Vec<f64>> {
    frame.synthesize(&frame.unfold(t)?)
}
