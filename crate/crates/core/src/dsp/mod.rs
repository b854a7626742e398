//! Deterministic spectral primitives shared by every codec.
//!
//! Everything in here works in double precision. Plans and filterbanks are
//! immutable once built and can be shared across threads.

mod audio;
mod dct;
mod fft;
mod mel;
mod stft;

pub use audio::{AudioBuffer, SAMPLE_RATE};
pub use dct::{dct_ii, dct_iii, Dct};
pub use fft::{fft_forward, fft_inverse};
pub use mel::{hz_to_mel, mel_filterbank, mel_to_hz, MelFilterbank};
pub use stft::{istft, stft, ComplexSpectrogram, FrameParams, StftPlan};

use std::f64::consts::PI;

/// Principal value of a phase, in `(-pi, pi]`.
pub fn princarg(phase: f64) -> f64 {
    let wrapped = phase - 2.0 * PI * ((phase + PI) / (2.0 * PI)).floor();
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}
