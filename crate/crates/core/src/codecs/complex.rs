use num_complex::Complex64;

use super::{RepTensor, Representation};
use crate::dsp::ComplexSpectrogram;
use crate::error::{invalid, Result};

const BINS: usize = 513;
const KEPT: usize = 512;

fn check_spec(spec: &ComplexSpectrogram, frames: usize) -> Result<()> {
    if spec.bins() != BINS || spec.frames() != frames {
        return Err(invalid(format!(
            "expected a {BINS}x{frames} spectrogram, got {}x{}",
            spec.bins(),
            spec.frames()
        )));
    }
    Ok(())
}

/// Real and imaginary parts of bins 0..512 as two channels. The Nyquist bin
/// is dropped.
pub fn complex_pack(spec: &ComplexSpectrogram) -> Result<RepTensor> {
    let (_, _, frames) = Representation::Complex.shape();
    check_spec(spec, frames)?;
    let mut t = RepTensor::zeros(Representation::Complex);
    for k in 0..KEPT {
        for f in 0..frames {
            let v = spec.get(k, f);
            t.set(0, k, f, v.re as f32);
            t.set(1, k, f, v.im as f32);
        }
    }
    Ok(t)
}

/// Inverse of [`complex_pack`]; the Nyquist bin comes back as zero.
pub fn complex_unpack(t: &RepTensor) -> Result<ComplexSpectrogram> {
    t.expect_repr(Representation::Complex)?;
    let frames = t.frames();
    let mut spec = ComplexSpectrogram::zeros(BINS, frames);
    for k in 0..KEPT {
        for f in 0..frames {
            spec.set(
                k,
                f,
                Complex64::new(t.get(0, k, f) as f64, t.get(1, k, f) as f64),
            );
        }
    }
    Ok(spec)
}
