#![allow(dead_code)]

use std::f64::consts::PI;

use audiorep::codecs::CLIP_LEN;
use audiorep::dsp::{fft_forward, AudioBuffer, SAMPLE_RATE};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A sin²-windowed sum of 8 sinusoids at integer frequencies in
/// 100..=4000 Hz with random amplitudes and phases.
pub fn band_limited(seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let partials: Vec<(f64, f64, f64)> = (0..8)
        .map(|_| {
            (
                rng.random_range(100..=4000) as f64,
                rng.random_range(0.02..0.1),
                rng.random_range(0.0..2.0 * PI),
            )
        })
        .collect();
    (0..CLIP_LEN)
        .map(|n| {
            let t = n as f64 / SAMPLE_RATE as f64;
            let env = (PI * n as f64 / CLIP_LEN as f64).sin().powi(2);
            env * partials
                .iter()
                .map(|(f, a, p)| a * (2.0 * PI * f * t + p).cos())
                .sum::<f64>()
        })
        .collect()
}

pub fn sine(freq: f64, amp: f64) -> Vec<f64> {
    (0..CLIP_LEN)
        .map(|n| amp * (2.0 * PI * freq * n as f64 / SAMPLE_RATE as f64).sin())
        .collect()
}

/// Harmonic tone with 1/h amplitudes and a gentle decay.
pub fn harmonic(f0: f64, n_harmonics: usize) -> Vec<f64> {
    (0..CLIP_LEN)
        .map(|n| {
            let t = n as f64 / SAMPLE_RATE as f64;
            (1..=n_harmonics)
                .filter(|h| *h as f64 * f0 < 7500.0)
                .map(|h| 0.3 / h as f64 * (2.0 * PI * h as f64 * f0 * t).sin())
                .sum::<f64>()
                * (-1.5 * t).exp()
        })
        .collect()
}

pub fn buffer(samples: Vec<f64>) -> AudioBuffer {
    AudioBuffer::from_samples(samples).unwrap()
}

pub fn snr_db(reference: &[f64], estimate: &[f64]) -> f64 {
    let signal: f64 = reference.iter().map(|v| v * v).sum();
    let noise: f64 = reference
        .iter()
        .zip(estimate)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    10.0 * (signal / noise).log10()
}

/// Frequency of the largest FFT peak, refined by parabolic interpolation on
/// log magnitudes of a Hann-windowed, zero-padded spectrum.
pub fn dominant_frequency(x: &[f64]) -> f64 {
    let n = 65536;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, v) in x.iter().enumerate() {
        let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / x.len() as f64).cos();
        buf[i] = Complex64::new(v * w, 0.0);
    }
    let spec = fft_forward(&buf).unwrap();
    let mags: Vec<f64> = spec[..n / 2].iter().map(|c| c.norm()).collect();
    let k = (1..n / 2 - 1)
        .max_by(|a, b| mags[*a].total_cmp(&mags[*b]))
        .unwrap();
    let (a, b, c) = (mags[k - 1].ln(), mags[k].ln(), mags[k + 1].ln());
    let offset = 0.5 * (a - c) / (a - 2.0 * b + c);
    (k as f64 + offset) * SAMPLE_RATE as f64 / n as f64
}
