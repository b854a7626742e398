use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// The seven audio representations, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    Waveform,
    Complex,
    MagIf,
    CqNsgt,
    Cqt,
    Mel,
    Mfcc,
}

impl Representation {
    pub const ALL: [Representation; 7] = [
        Representation::Waveform,
        Representation::Complex,
        Representation::MagIf,
        Representation::CqNsgt,
        Representation::Cqt,
        Representation::Mel,
        Representation::Mfcc,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Representation::Waveform => "waveform",
            Representation::Complex => "complex",
            Representation::MagIf => "mag-if",
            Representation::CqNsgt => "cq-nsgt",
            Representation::Cqt => "cqt",
            Representation::Mel => "mel",
            Representation::Mfcc => "mfcc",
        }
    }

    /// Wire code used by the RTEN format.
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    /// `(channels, bins, frames)`.
    pub fn shape(self) -> (usize, usize, usize) {
        match self {
            Representation::Waveform => (1, 1, 16000),
            Representation::Complex | Representation::MagIf => (2, 512, 64),
            Representation::CqNsgt => (4, 97, 948),
            Representation::Cqt => (2, 84, 256),
            Representation::Mel | Representation::Mfcc => (1, 128, 64),
        }
    }

    /// Whether decode(encode(x)) reproduces x up to numerical precision.
    pub fn is_lossless(self) -> bool {
        matches!(
            self,
            Representation::Waveform
                | Representation::Complex
                | Representation::MagIf
                | Representation::CqNsgt
        )
    }

    pub fn valid_ids() -> String {
        Self::ALL
            .iter()
            .map(|r| r.id())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|r| r.id() == s)
            .ok_or_else(|| {
                invalid(format!(
                    "unknown representation '{s}' (valid: {})",
                    Self::valid_ids()
                ))
            })
    }
}

/// A channels x bins x frames tensor of single-precision values, laid out
/// channel-major, then bin-major, frame-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct RepTensor {
    repr: Representation,
    data: Vec<f32>,
}

impl RepTensor {
    pub fn new(repr: Representation, data: Vec<f32>) -> Result<Self> {
        let t = Self { repr, data };
        t.validate()?;
        Ok(t)
    }

    /// Builds a tensor from an explicit shape, which must match `repr`.
    pub fn from_parts(
        repr: Representation,
        channels: usize,
        bins: usize,
        frames: usize,
        data: Vec<f32>,
    ) -> Result<Self> {
        if (channels, bins, frames) != repr.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?} for {repr}", repr.shape()),
                actual: format!("{:?}", (channels, bins, frames)),
            });
        }
        Self::new(repr, data)
    }

    pub fn zeros(repr: Representation) -> Self {
        let (c, b, f) = repr.shape();
        Self {
            repr,
            data: vec![0.0; c * b * f],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (c, b, f) = self.repr.shape();
        if self.data.len() != c * b * f {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values for {}", c * b * f, self.repr),
                actual: format!("{} values", self.data.len()),
            });
        }
        if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("tensor value {i} is not finite")));
        }
        Ok(())
    }

    pub fn repr(&self) -> Representation {
        self.repr
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        self.repr.shape()
    }

    pub fn channels(&self) -> usize {
        self.repr.shape().0
    }

    pub fn bins(&self) -> usize {
        self.repr.shape().1
    }

    pub fn frames(&self) -> usize {
        self.repr.shape().2
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    fn index(&self, channel: usize, bin: usize, frame: usize) -> usize {
        let (_, b, f) = self.repr.shape();
        (channel * b + bin) * f + frame
    }

    pub fn get(&self, channel: usize, bin: usize, frame: usize) -> f32 {
        self.data[self.index(channel, bin, frame)]
    }

    pub fn set(&mut self, channel: usize, bin: usize, frame: usize, value: f32) {
        let i = self.index(channel, bin, frame);
        self.data[i] = value;
    }

    pub(crate) fn expect_repr(&self, repr: Representation) -> Result<()> {
        if self.repr != repr {
            return Err(invalid(format!(
                "expected a {repr} tensor, got {}",
                self.repr
            )));
        }
        self.validate()
    }
}
