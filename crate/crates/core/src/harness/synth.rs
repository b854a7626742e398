use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::dataset::{id_hash, ingest, DatasetIndex, InstrumentFamily, MAX_PITCH, MIN_PITCH};
use super::wav::write_wav;
use crate::codecs::CLIP_LEN;
use crate::dsp::{AudioBuffer, SAMPLE_RATE};
use crate::error::{invalid, Result};

/// Harmonic recipe for one synthetic instrument class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimbreProfile {
    pub family: InstrumentFamily,
    /// Relative amplitude of harmonics 1, 2, ...
    pub harmonics: &'static [f64],
    /// Amplitude decay rate in 1/s.
    pub decay: f64,
    /// Extra decay per harmonic number, in 1/s.
    pub harmonic_decay: f64,
    /// Linear attack time in seconds.
    pub attack: f64,
}

pub const PROFILES: [TimbreProfile; 5] = [
    TimbreProfile {
        family: InstrumentFamily::Brass,
        harmonics: &[1.0, 0.8, 0.65, 0.5, 0.4, 0.3, 0.22, 0.15, 0.1, 0.07],
        decay: 0.8,
        harmonic_decay: 0.1,
        attack: 0.04,
    },
    TimbreProfile {
        family: InstrumentFamily::Flute,
        harmonics: &[1.0, 0.3, 0.1, 0.04],
        decay: 0.5,
        harmonic_decay: 0.0,
        attack: 0.06,
    },
    TimbreProfile {
        family: InstrumentFamily::Guitar,
        harmonics: &[1.0, 0.6, 0.45, 0.3, 0.25, 0.15, 0.1, 0.05],
        decay: 3.0,
        harmonic_decay: 0.8,
        attack: 0.002,
    },
    TimbreProfile {
        family: InstrumentFamily::Keyboard,
        harmonics: &[1.0, 0.45, 0.25, 0.12, 0.06, 0.03],
        decay: 2.0,
        harmonic_decay: 0.5,
        attack: 0.003,
    },
    TimbreProfile {
        family: InstrumentFamily::Mallet,
        harmonics: &[1.0, 0.0, 0.5, 0.0, 0.25, 0.0, 0.1],
        decay: 6.0,
        harmonic_decay: 1.5,
        attack: 0.001,
    },
];

/// Equal-tempered frequency of a MIDI note, A4 = 440 Hz.
pub fn midi_to_hz(pitch: u8) -> f64 {
    440.0 * 2f64.powf((pitch as f64 - 69.0) / 12.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_per_class: usize,
    pub pitches: RangeInclusive<u8>,
    pub profiles: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n_per_class: 100,
            pitches: MIN_PITCH..=MAX_PITCH,
            profiles: PROFILES.len(),
            seed: 42,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_per_class == 0 || self.pitches.is_empty() {
            return Err(invalid(
                "synthetic dataset needs at least one clip and one pitch",
            ));
        }
        if *self.pitches.start() < MIN_PITCH || *self.pitches.end() > MAX_PITCH {
            return Err(invalid(format!(
                "pitches must lie in {MIN_PITCH}..={MAX_PITCH}, got {:?}",
                self.pitches
            )));
        }
        if !(1..=PROFILES.len()).contains(&self.profiles) {
            return Err(invalid(format!(
                "between 1 and {} timbre profiles available, asked for {}",
                PROFILES.len(),
                self.profiles
            )));
        }
        Ok(())
    }
}

/// One second of a decaying harmonic tone. Harmonic phases and a small
/// amplitude jitter come from `rng`.
pub fn synth_clip(profile: &TimbreProfile, pitch: u8, rng: &mut impl Rng) -> AudioBuffer {
    let f0 = midi_to_hz(pitch);
    let fs = SAMPLE_RATE as f64;
    let partials: Vec<(f64, f64, f64, f64)> = profile
        .harmonics
        .iter()
        .enumerate()
        .map(|(h, a)| (h as f64 + 1.0, *a))
        .filter(|(h, a)| *a > 0.0 && h * f0 < 0.45 * fs)
        .map(|(h, a)| {
            let jitter = 1.0 + 0.1 * (rng.random::<f64>() - 0.5);
            let phase = 2.0 * PI * rng.random::<f64>();
            (
                h * f0,
                a * jitter,
                phase,
                profile.decay + profile.harmonic_decay * (h - 1.0),
            )
        })
        .collect();
    let norm: f64 = partials.iter().map(|p| p.1).sum();
    let samples = (0..CLIP_LEN)
        .map(|n| {
            let t = n as f64 / fs;
            let onset = (t / profile.attack).min(1.0);
            let s: f64 = partials
                .iter()
                .map(|(f, a, phi, d)| a * (-d * t).exp() * (2.0 * PI * f * t + phi).sin())
                .sum();
            0.8 * onset * s / norm
        })
        .collect();
    AudioBuffer::from_samples(samples).expect("synthetic clip is finite and non-empty")
}

/// Writes `n_per_class` clips for each profile under `root/audio`, plus
/// `root/metadata.jsonl`, and ingests the result. Pitches cycle through the
/// range in order.
pub fn synth_dataset(root: impl AsRef<Path>, spec: &SynthSpec) -> Result<DatasetIndex> {
    spec.validate()?;
    let root = root.as_ref();
    fs::create_dir_all(root.join("audio"))?;
    let pitches: Vec<u8> = spec.pitches.clone().collect();
    let jobs: Vec<(String, &TimbreProfile, u8)> = PROFILES[..spec.profiles]
        .iter()
        .flat_map(|p| {
            let pitches = &pitches;
            (0..spec.n_per_class).map(move |i| {
                let pitch = pitches[i % pitches.len()];
                (format!("{}_{pitch:03}_{i:04}", p.family), p, pitch)
            })
        })
        .collect();
    jobs.par_iter().try_for_each(|(id, profile, pitch)| {
        let mut rng = ChaCha8Rng::seed_from_u64(id_hash(id, spec.seed));
        write_wav(
            root.join(format!("audio/{id}.wav")),
            &synth_clip(profile, *pitch, &mut rng),
        )
    })?;
    let mut meta = fs::File::create(root.join("metadata.jsonl"))?;
    for (id, profile, pitch) in &jobs {
        let line = serde_json::json!({
            "id": id,
            "pitch": pitch,
            "instrument_family": profile.family.name(),
            "source": "acoustic",
            "wav": format!("audio/{id}.wav"),
        });
        writeln!(meta, "{line}")?;
    }
    meta.flush()?;
    ingest(root, root.join("metadata.jsonl"), spec.seed)
}
