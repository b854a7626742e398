use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsp::{AudioBuffer, ComplexSpectrogram, StftPlan};
use crate::error::{invalid, Error, Result};

/// Frobenius distance between `|spec|` and `target`, measured over the full
/// two-sided spectrum (interior bins count twice, DC and Nyquist once).
///
/// This is the norm in which the Griffin-Lim projections are orthogonal, so
/// it is the quantity that cannot increase from one iteration to the next.
pub fn spectral_error(spec: &ComplexSpectrogram, target: &[f64]) -> f64 {
    let (bins, frames) = (spec.bins(), spec.frames());
    let mut acc = 0.0;
    for k in 0..bins {
        let weight = if k == 0 || k == bins - 1 { 1.0 } else { 2.0 };
        let mut row = 0.0;
        for t in 0..frames {
            let d = spec.get(k, t).norm() - target[k * frames + t];
            row += d * d;
        }
        acc += weight * row;
    }
    acc.sqrt()
}

fn check_magnitudes(plan: &StftPlan, mag: &[f64]) -> Result<()> {
    let p = plan.params();
    if mag.len() != p.bins() * p.frames() {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{} magnitudes", p.bins(), p.frames()),
            actual: format!("{} values", mag.len()),
        });
    }
    if let Some(i) = mag.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(invalid(format!(
            "magnitude at index {i} is negative or non-finite"
        )));
    }
    Ok(())
}

fn with_phase_of(mag: &[f64], phase_src: &ComplexSpectrogram) -> ComplexSpectrogram {
    let mut out = phase_src.clone();
    for (v, m) in out.data_mut().iter_mut().zip(mag) {
        let r = v.norm();
        // zero bins take phase 0, as arg() would give
        *v = if r > 0.0 {
            *v * (m / r)
        } else {
            Complex64::new(*m, 0.0)
        };
    }
    out
}

fn run(
    plan: &StftPlan,
    mag: &[f64],
    iters: usize,
    seed: u64,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<AudioBuffer> {
    if iters == 0 {
        return Err(invalid("griffin-lim needs at least one iteration"));
    }
    check_magnitudes(plan, mag)?;
    let p = plan.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init: Vec<Complex64> = mag
        .iter()
        .map(|m| Complex64::from_polar(*m, rng.random_range(-PI..PI)))
        .collect();
    let mut signal = plan.inverse_full(&ComplexSpectrogram::new(p.bins(), p.frames(), init)?)?;
    for _ in 0..iters {
        let spec = plan.forward(&signal)?;
        signal = plan.inverse_full(&with_phase_of(mag, &spec))?;
        if let Some(errors) = trace.as_deref_mut() {
            errors.push(spectral_error(&plan.forward(&signal)?, mag));
        }
    }
    AudioBuffer::from_samples(signal)
}

/// Griffin-Lim phase recovery.
///
/// Starts from `mag` with uniformly random phase drawn from `seed`, then
/// repeats `x <- istft(mag * exp(i angle(stft(x))))` `iters` times. The
/// returned signal covers the full padded period of the plan.
pub fn griffin_lim(plan: &StftPlan, mag: &[f64], iters: usize, seed: u64) -> Result<AudioBuffer> {
    run(plan, mag, iters, seed, None)
}

/// [`griffin_lim`], also returning the spectral error after each iteration.
pub fn griffin_lim_traced(
    plan: &StftPlan,
    mag: &[f64],
    iters: usize,
    seed: u64,
) -> Result<(AudioBuffer, Vec<f64>)> {
    let mut errors = Vec::with_capacity(iters);
    let audio = run(plan, mag, iters, seed, Some(&mut errors))?;
    Ok((audio, errors))
}
