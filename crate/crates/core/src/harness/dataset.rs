use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::wav::read_wav;
use crate::codecs::CLIP_LEN;
use crate::dsp::{AudioBuffer, SAMPLE_RATE};
use crate::error::{invalid, Error, Result};

pub const MIN_PITCH: u8 = 44;
pub const MAX_PITCH: u8 = 70;
pub const TRAIN_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentFamily {
    Brass,
    Flute,
    Guitar,
    Keyboard,
    Mallet,
}

impl InstrumentFamily {
    pub const ALL: [InstrumentFamily; 5] = [
        InstrumentFamily::Brass,
        InstrumentFamily::Flute,
        InstrumentFamily::Guitar,
        InstrumentFamily::Keyboard,
        InstrumentFamily::Mallet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InstrumentFamily::Brass => "brass",
            InstrumentFamily::Flute => "flute",
            InstrumentFamily::Guitar => "guitar",
            InstrumentFamily::Keyboard => "keyboard",
            InstrumentFamily::Mallet => "mallet",
        }
    }

    /// Position in [`InstrumentFamily::ALL`], used as a class label.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for InstrumentFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstrumentFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unsupported instrument family {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Acoustic,
    Electronic,
    Synthetic,
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "acoustic" => Ok(Source::Acoustic),
            "electronic" => Ok(Source::Electronic),
            "synthetic" => Ok(Source::Synthetic),
            _ => Err(invalid(format!("unknown source {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetEntry {
    pub id: String,
    pub wav_path: PathBuf,
    pub pitch: u8,
    pub family: InstrumentFamily,
    pub source: Source,
    pub split: Split,
}

/// Filtered dataset entries, sorted by id, each assigned to a split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetIndex {
    pub entries: Vec<DatasetEntry>,
    /// Metadata lines that could not be parsed.
    pub skipped: usize,
    pub seed: u64,
}

impl DatasetIndex {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &DatasetEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }
}

#[derive(Debug, Deserialize)]
struct Record {
    id: String,
    pitch: i64,
    instrument_family: String,
    source: String,
    wav: String,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ *b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable per-id hash, independent of platform and enumeration order.
pub(crate) fn id_hash(id: &str, seed: u64) -> u64 {
    splitmix64(fnv1a64(id.as_bytes()) ^ seed)
}

/// Puts the `round(0.8 n)` entries with the smallest hashes in the training
/// split and the rest in the evaluation split.
fn assign_splits(entries: &mut [DatasetEntry], seed: u64) {
    let mut order: Vec<(u64, usize)> = entries
        .iter()
        .enumerate()
        .map(|(i, e)| (id_hash(&e.id, seed), i))
        .collect();
    order.sort_unstable();
    let n_train = (entries.len() as f64 * TRAIN_FRACTION).round() as usize;
    for (rank, (_, i)) in order.into_iter().enumerate() {
        entries[i].split = if rank < n_train {
            Split::Train
        } else {
            Split::Eval
        };
    }
}

fn keep(pitch: i64, family: &str, source: &str) -> Option<(u8, InstrumentFamily)> {
    let pitch = u8::try_from(pitch)
        .ok()
        .filter(|p| (MIN_PITCH..=MAX_PITCH).contains(p))?;
    let family = family.parse().ok()?;
    (source.parse::<Source>().ok()? == Source::Acoustic).then_some((pitch, family))
}

/// Reads JSON-lines metadata, keeps acoustic notes in the supported pitch
/// range and families, and assigns a seeded 80/20 split.
///
/// Lines that fail to parse are skipped and counted. WAV paths are resolved
/// against `root` and must exist.
pub fn ingest(
    root: impl AsRef<Path>,
    metadata: impl AsRef<Path>,
    seed: u64,
) -> Result<DatasetIndex> {
    let (root, metadata) = (root.as_ref(), metadata.as_ref());
    let text = fs::read_to_string(metadata).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(metadata.to_path_buf()),
        _ => e.into(),
    })?;
    let mut skipped = 0;
    let mut entries = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                log::warn!(
                    "{}:{}: skipping record: {e}",
                    metadata.display(),
                    line_no + 1
                );
                skipped += 1;
                continue;
            }
        };
        let Some((pitch, family)) = keep(record.pitch, &record.instrument_family, &record.source)
        else {
            continue;
        };
        let wav_path = root.join(&record.wav);
        if !wav_path.is_file() {
            return Err(Error::MissingFile(wav_path));
        }
        entries.push(DatasetEntry {
            id: record.id,
            wav_path,
            pitch,
            family,
            source: Source::Acoustic,
            split: Split::Train,
        });
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} unparseable metadata record(s)");
    }
    if entries.is_empty() {
        return Err(Error::Dataset(format!(
            "no entries left after filtering {}",
            metadata.display()
        )));
    }
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = entries.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(Error::Dataset(format!("duplicate id {:?}", w[0].id)));
    }
    assign_splits(&mut entries, seed);
    Ok(DatasetIndex {
        entries,
        skipped,
        seed,
    })
}

/// Loads a clip and keeps its first second.
pub fn load_clip(entry: &DatasetEntry) -> Result<AudioBuffer> {
    let audio = read_wav(&entry.wav_path)?;
    if audio.sample_rate() != SAMPLE_RATE {
        return Err(invalid(format!(
            "{}: expected {SAMPLE_RATE} Hz, found {} Hz",
            entry.wav_path.display(),
            audio.sample_rate()
        )));
    }
    let mut samples = audio.into_samples();
    samples.truncate(CLIP_LEN);
    AudioBuffer::from_samples(samples)
}

/// Loads every clip of one split in id order.
pub fn load_split(index: &DatasetIndex, split: Split) -> Result<Vec<(String, AudioBuffer)>> {
    let entries: Vec<&DatasetEntry> = index.split(split).collect();
    let results: Vec<(String, Result<AudioBuffer>)> = entries
        .par_iter()
        .map(|e| (e.id.clone(), load_clip(e)))
        .collect();
    let mut clips = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (id, r) in results {
        match r {
            Ok(a) => clips.push((id, a)),
            Err(e) => failures.push((id, e.to_string())),
        }
    }
    if !failures.is_empty() {
        return Err(Error::ClipFailures(failures));
    }
    Ok(clips)
}
