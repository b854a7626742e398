//! Audio representation codecs and evaluation metrics for generative audio.
//!
//! The crate is organised in layers:
//!
//! * [`dsp`]: FFT, STFT/iSTFT, mel filterbank, DCT and phase helpers.
//! * [`codecs`]: seven representation codecs (waveform, complex STFT,
//!   magnitude + instantaneous frequency, CQ-NSGT, CQT, mel, MFCC) with their
//!   inverses, Griffin-Lim phase recovery and the RTEN tensor file format.
//! * [`metrics`]: Inception Score, KID (unbiased squared MMD with an IMQ
//!   kernel) and Fréchet distance.
//! * [`embeddings`]: EMB1/PRB1 file formats and a built-in log-mel
//!   statistics embedder.
//! * [`harness`]: dataset ingestion, synthetic data, round-trip and timing
//!   experiments, report rendering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codecs;
pub mod dsp;
pub mod embeddings;
mod error;
pub mod harness;
pub mod metrics;

pub use error::{Error, Result};
