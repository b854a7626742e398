use crate::error::{invalid, Result};

const F_SP: f64 = 200.0 / 3.0;
const BREAK_HZ: f64 = 1000.0;
const BREAK_MEL: f64 = BREAK_HZ / F_SP;

fn log_step() -> f64 {
    6.4f64.ln() / 27.0
}

/// Mel value of a frequency: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    if hz < BREAK_HZ {
        hz / F_SP
    } else {
        BREAK_MEL + (hz / BREAK_HZ).ln() / log_step()
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    if mel < BREAK_MEL {
        mel * F_SP
    } else {
        BREAK_HZ * (log_step() * (mel - BREAK_MEL)).exp()
    }
}

/// Triangular, area-normalized mel filterbank (`n_mels` rows by `bins` columns).
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    n_mels: usize,
    bins: usize,
    fmin: f64,
    fmax: f64,
    centers: Vec<f64>,
    weights: Vec<f64>,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn fmin(&self) -> f64 {
        self.fmin
    }

    pub fn fmax(&self) -> f64 {
        self.fmax
    }

    /// Center frequency of each filter in Hz.
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Row-major weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.bins..(m + 1) * self.bins]
    }

    /// Projects one magnitude spectrum (length `bins`) onto the mel bands.
    pub fn apply(&self, spectrum: &[f64]) -> Vec<f64> {
        debug_assert_eq!(spectrum.len(), self.bins);
        (0..self.n_mels)
            .map(|m| self.row(m).iter().zip(spectrum).map(|(w, s)| w * s).sum())
            .collect()
    }
}

/// Builds a mel filterbank for a one-sided spectrum of `bins` bins.
pub fn mel_filterbank(
    n_mels: usize,
    bins: usize,
    sample_rate: u32,
    fmin: f64,
    fmax: f64,
) -> Result<MelFilterbank> {
    let nyquist = sample_rate as f64 / 2.0;
    if n_mels == 0 {
        return Err(invalid("n_mels must be at least 1"));
    }
    if bins < 2 {
        return Err(invalid("need at least two spectral bins"));
    }
    if !(fmin >= 0.0 && fmin < fmax) {
        return Err(invalid(format!(
            "need 0 <= fmin < fmax, got {fmin}, {fmax}"
        )));
    }
    if fmax > nyquist {
        return Err(invalid(format!(
            "fmax {fmax} Hz exceeds Nyquist {nyquist} Hz"
        )));
    }
    let n_fft = 2 * (bins - 1);
    let bin_hz: Vec<f64> = (0..bins)
        .map(|k| k as f64 * sample_rate as f64 / n_fft as f64)
        .collect();
    let (mel_lo, mel_hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let points: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();

    let mut weights = vec![0.0; n_mels * bins];
    for m in 0..n_mels {
        let (lo, mid, hi) = (points[m], points[m + 1], points[m + 2]);
        let enorm = 2.0 / (hi - lo);
        for (k, &f) in bin_hz.iter().enumerate() {
            let rising = (f - lo) / (mid - lo);
            let falling = (hi - f) / (hi - mid);
            weights[m * bins + k] = rising.min(falling).max(0.0) * enorm;
        }
        if weights[m * bins..(m + 1) * bins].iter().all(|w| *w <= 0.0) {
            return Err(invalid(format!(
                "mel filter {m} ({lo:.1}-{hi:.1} Hz) covers no spectral bin; use fewer mels or more bins"
            )));
        }
    }
    Ok(MelFilterbank {
        n_mels,
        bins,
        fmin,
        fmax,
        centers: points[1..=n_mels].to_vec(),
        weights,
    })
}
