//! Log-magnitude and instantaneous-frequency codec.
//!
//! Channel 0 holds `ln(|S| + eps)`, channel 1 the frame-to-frame phase
//! advance wrapped to `(-pi, pi]` and divided by pi. The phase before the
//! first frame is taken to be zero, so decoding is a plain cumulative sum.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{RepTensor, Representation};
use crate::dsp::{princarg, ComplexSpectrogram};
use crate::error::{invalid, Result};

const BINS: usize = 513;
const KEPT: usize = 512;

fn phase(v: Complex64) -> f64 {
    if v.norm() == 0.0 {
        0.0
    } else {
        v.arg()
    }
}

pub fn magif_encode(spec: &ComplexSpectrogram, eps: f64) -> Result<RepTensor> {
    let (_, _, frames) = Representation::MagIf.shape();
    if spec.bins() != BINS || spec.frames() != frames {
        return Err(invalid(format!(
            "expected a {BINS}x{frames} spectrogram, got {}x{}",
            spec.bins(),
            spec.frames()
        )));
    }
    if !(eps > 0.0) {
        return Err(invalid("log offset must be positive"));
    }
    let mut t = RepTensor::zeros(Representation::MagIf);
    for k in 0..KEPT {
        let mut prev = 0.0;
        for f in 0..frames {
            let v = spec.get(k, f);
            let phi = phase(v);
            t.set(0, k, f, (v.norm() + eps).ln() as f32);
            t.set(1, k, f, (princarg(phi - prev) / PI) as f32);
            prev = phi;
        }
    }
    Ok(t)
}

pub fn magif_decode(t: &RepTensor, eps: f64) -> Result<ComplexSpectrogram> {
    t.expect_repr(Representation::MagIf)?;
    let frames = t.frames();
    let mut spec = ComplexSpectrogram::zeros(BINS, frames);
    for k in 0..KEPT {
        let mut phi = 0.0;
        for f in 0..frames {
            phi += PI * t.get(1, k, f) as f64;
            let mag = ((t.get(0, k, f) as f64).exp() - eps).max(0.0);
            spec.set(k, f, Complex64::from_polar(mag, phi));
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{FrameParams, StftPlan};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EPS: f64 = 1e-6;

    fn noise_spec(seed: u64) -> ComplexSpectrogram {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..16000).map(|_| rng.random_range(-0.5..0.5)).collect();
        StftPlan::new(FrameParams::default())
            .unwrap()
            .forward(&x)
            .unwrap()
    }

    #[test]
    fn constant_phase_has_zero_if() {
        let data = vec![Complex64::from_polar(2.0, 0.7); BINS * 64];
        let spec = ComplexSpectrogram::new(BINS, 64, data).unwrap();
        let t = magif_encode(&spec, EPS).unwrap();
        for k in 0..KEPT {
            assert!((t.get(1, k, 0) as f64 - 0.7 / PI).abs() < 1e-6);
            for f in 1..64 {
                assert_eq!(t.get(1, k, f), 0.0);
            }
        }
    }

    #[test]
    fn steady_sinusoid_if_matches_phase_advance() {
        let fs = 16000.0;
        let k = 65usize;
        let freq = k as f64 * fs / 1024.0;
        let x: Vec<f64> = (0..16000)
            .map(|n| (2.0 * PI * freq * n as f64 / fs).cos())
            .collect();
        let spec = StftPlan::new(FrameParams::default())
            .unwrap()
            .forward(&x)
            .unwrap();
        let t = magif_encode(&spec, EPS).unwrap();
        let expected = princarg(2.0 * PI * freq * 256.0 / fs) / PI;
        for f in 1..58 {
            assert!((t.get(1, k, f) as f64 - expected).abs() < 1e-5, "frame {f}");
        }
    }

    #[test]
    fn round_trip_within_float32_precision() {
        let spec = noise_spec(5);
        let back = magif_decode(&magif_encode(&spec, EPS).unwrap(), EPS).unwrap();
        for k in 0..KEPT {
            for f in 0..64 {
                let (a, b) = (spec.get(k, f), back.get(k, f));
                assert!(
                    (a - b).norm() <= 1e-5 * a.norm().max(1e-3),
                    "bin {k} frame {f}"
                );
            }
        }
    }

    #[test]
    fn cumulative_phase_equals_original_modulo_two_pi() {
        let spec = noise_spec(9);
        let t = magif_encode(&spec, EPS).unwrap();
        for k in 0..KEPT {
            let mut phi = 0.0;
            for f in 0..64 {
                phi += PI * t.get(1, k, f) as f64;
                let diff = princarg(phi - phase(spec.get(k, f)));
                assert!(diff.abs() <= 1e-4, "bin {k} frame {f}: {diff}");
            }
        }
    }
}
