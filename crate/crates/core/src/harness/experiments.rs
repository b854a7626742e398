use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::dataset::{id_hash, load_split, DatasetIndex, Split};
use super::report::ReportRow;
use crate::codecs::{Codec, Representation};
use crate::dsp::AudioBuffer;
use crate::embeddings::Embedder;
use crate::error::{invalid, Error, Result};
use crate::metrics::{fad, inception_score, kid, EmbeddingSet, ProbMatrix};

/// Embeddings and probabilities produced outside this crate (for example by a
/// pretrained classifier), scored alongside the built-in metrics.
#[derive(Debug, Clone, Default)]
pub struct ExternalInputs {
    /// Pitch-classifier posteriors of generated clips.
    pub pitch_probs: Option<ProbMatrix>,
    /// Instrument-classifier posteriors of generated clips.
    pub instrument_probs: Option<ProbMatrix>,
    /// Pitch-classifier embeddings of (real, generated) clips.
    pub pitch_emb: Option<(EmbeddingSet, EmbeddingSet)>,
    /// Instrument-classifier embeddings of (real, generated) clips.
    pub instrument_emb: Option<(EmbeddingSet, EmbeddingSet)>,
    /// General-purpose audio embeddings of (real, generated) clips.
    pub audio_emb: Option<(EmbeddingSet, EmbeddingSet)>,
}

impl ExternalInputs {
    pub fn is_empty(&self) -> bool {
        self.pitch_probs.is_none()
            && self.instrument_probs.is_none()
            && self.pitch_emb.is_none()
            && self.instrument_emb.is_none()
            && self.audio_emb.is_none()
    }
}

/// Fills every metric column that `inputs` provides data for.
pub fn score_external(row: &mut ReportRow, inputs: &ExternalInputs) -> Result<()> {
    if let Some(p) = &inputs.pitch_probs {
        row.pis = Some(inception_score(p));
    }
    if let Some(p) = &inputs.instrument_probs {
        row.iis = Some(inception_score(p));
    }
    if let Some((real, gen)) = &inputs.pitch_emb {
        row.pkid = Some(kid(real, gen)?);
    }
    if let Some((real, gen)) = &inputs.instrument_emb {
        row.ikid = Some(kid(real, gen)?);
    }
    if let Some((real, gen)) = &inputs.audio_emb {
        row.fad = Some(fad(real, gen)?);
        row.kid = Some(kid(real, gen)?);
    }
    Ok(())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Outcome of a round-trip run for one representation.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub row: ReportRow,
    pub ids: Vec<String>,
    pub real: EmbeddingSet,
    pub generated: EmbeddingSet,
}

struct ClipResult {
    real: Vec<f64>,
    generated: Vec<f64>,
    encode_s: f64,
    decode_s: f64,
}

fn round_trip_clip(
    codec: &Codec,
    repr: Representation,
    embedder: &dyn Embedder,
    clip: &AudioBuffer,
) -> Result<ClipResult> {
    let start = Instant::now();
    let tensor = codec.encode(repr, clip)?;
    let encode_s = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let decoded = codec.decode(&tensor)?;
    let decode_s = start.elapsed().as_secs_f64();
    Ok(ClipResult {
        real: embedder.embed(clip)?,
        generated: embedder.embed(&decoded)?,
        encode_s,
        decode_s,
    })
}

/// Treats `decode(encode(x))` of every evaluation clip as generated data and
/// scores it against the originals with `embedder` (FAD and KID). Any
/// external inputs fill the remaining columns. Timings are per-clip medians.
///
/// Clips run in parallel on the current rayon pool; results are combined in
/// id order. Per-clip failures are collected into one error.
pub fn roundtrip_eval(
    index: &DatasetIndex,
    repr: Representation,
    codec: &Codec,
    embedder: &dyn Embedder,
    external: &ExternalInputs,
) -> Result<RoundTrip> {
    let clips = load_split(index, Split::Eval)?;
    if clips.len() < 2 {
        return Err(Error::Dataset(format!(
            "evaluation split has {} clip(s), metrics need at least 2",
            clips.len()
        )));
    }
    let results: Vec<(&str, Result<ClipResult>)> = clips
        .par_iter()
        .map(|(id, clip)| (id.as_str(), round_trip_clip(codec, repr, embedder, clip)))
        .collect();

    let mut failures = Vec::new();
    let mut ok = Vec::with_capacity(results.len());
    for (id, r) in results {
        match r {
            Ok(r) => ok.push((id.to_string(), r)),
            Err(e) => failures.push((id.to_string(), e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::ClipFailures(failures));
    }

    let real =
        EmbeddingSet::from_rows(&ok.iter().map(|(_, r)| r.real.clone()).collect::<Vec<_>>())?;
    let generated = EmbeddingSet::from_rows(
        &ok.iter()
            .map(|(_, r)| r.generated.clone())
            .collect::<Vec<_>>(),
    )?;
    let mut encode: Vec<f64> = ok.iter().map(|(_, r)| r.encode_s).collect();
    let mut decode: Vec<f64> = ok.iter().map(|(_, r)| r.decode_s).collect();

    let mut row = ReportRow::new(repr.id());
    row.fad = Some(fad(&real, &generated)?);
    row.kid = Some(kid(&real, &generated)?);
    row.encode_time_s = Some(median(&mut encode));
    row.decode_time_s = Some(median(&mut decode));
    score_external(&mut row, external)?;
    Ok(RoundTrip {
        row,
        ids: ok.into_iter().map(|(id, _)| id).collect(),
        real,
        generated,
    })
}

/// Median per-clip codec wall times for one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingResult {
    pub repr: Representation,
    pub encode_median_s: f64,
    pub decode_median_s: f64,
    /// Number of timed encode/decode pairs behind each median.
    pub measurements: usize,
}

impl TimingResult {
    pub fn to_row(&self) -> ReportRow {
        let mut row = ReportRow::new(self.repr.id());
        row.encode_time_s = Some(self.encode_median_s);
        row.decode_time_s = Some(self.decode_median_s);
        row
    }
}

/// Times encode and decode of every clip `repetitions` times per
/// representation on the calling thread.
///
/// One untimed warm-up pass per representation comes first. Representations
/// are interleaved inside each repetition so slow drifts in machine load hit
/// all of them alike.
pub fn timing_bench(
    clips: &[AudioBuffer],
    reprs: &[Representation],
    repetitions: usize,
    codec: &Codec,
) -> Result<Vec<TimingResult>> {
    if clips.is_empty() || reprs.is_empty() || repetitions == 0 {
        return Err(invalid(
            "timing needs at least one clip, representation and repetition",
        ));
    }
    for repr in reprs {
        codec.decode(&codec.encode(*repr, &clips[0])?)?;
    }
    let mut encode = vec![Vec::with_capacity(clips.len() * repetitions); reprs.len()];
    let mut decode = encode.clone();
    for _ in 0..repetitions {
        for clip in clips {
            for (k, repr) in reprs.iter().enumerate() {
                let start = Instant::now();
                let tensor = codec.encode(*repr, clip)?;
                encode[k].push(start.elapsed().as_secs_f64());
                let start = Instant::now();
                let out = codec.decode(&tensor)?;
                decode[k].push(start.elapsed().as_secs_f64());
                std::hint::black_box(out);
            }
        }
    }
    Ok(reprs
        .iter()
        .zip(encode.iter_mut().zip(decode.iter_mut()))
        .map(|(repr, (enc, dec))| TimingResult {
            repr: *repr,
            measurements: enc.len(),
            encode_median_s: median(enc),
            decode_median_s: median(dec),
        })
        .collect())
}

/// Adds Gaussian noise with standard deviation `noise_level * rms(clip)` to
/// each clip. Every clip draws from its own generator seeded by its id and
/// `seed`, so results do not depend on order or thread count.
pub fn mock_generate(
    clips: &[(String, AudioBuffer)],
    noise_level: f64,
    seed: u64,
) -> Result<Vec<AudioBuffer>> {
    if !(noise_level.is_finite() && noise_level >= 0.0) {
        return Err(invalid(format!(
            "noise level must be >= 0, got {noise_level}"
        )));
    }
    clips
        .par_iter()
        .map(|(id, clip)| {
            let std = noise_level * clip.rms();
            if std == 0.0 {
                return Ok(clip.clone());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(id_hash(id, seed));
            let normal = Normal::new(0.0, std).map_err(|e| invalid(e.to_string()))?;
            let samples = clip
                .samples()
                .iter()
                .map(|s| s + normal.sample(&mut rng))
                .collect();
            AudioBuffer::new(samples, clip.sample_rate())
        })
        .collect()
}
