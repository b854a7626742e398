use std::path::PathBuf;

use audiorep::codecs::Representation;
use audiorep::harness::ReportFormat;
use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "audiorep",
    version,
    about = "Encode, decode and evaluate audio representations",
    long_about = "Encode, decode and evaluate audio representations.\n\n\
        Logs go to standard error (RUST_LOG controls the level). Reports go to \
        --out or standard output."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode WAV files into RTEN tensors, one per input
    Encode(EncodeArgs),
    /// Decode RTEN tensors back into float WAV files
    Decode(DecodeArgs),
    /// Round-trip a dataset through codecs and score the result
    Roundtrip(RoundtripArgs),
    /// Score embedding/probability files, or a noisy mock generator
    Eval(Box<EvalArgs>),
    /// Time encode and decode per representation on one thread
    Bench(BenchArgs),
    /// Write the synthetic harmonic-tone dataset
    SynthData(SynthArgs),
}

/// Settings every subcommand accepts.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML file with default settings (flags take precedence)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for splits, synthesis, noise and Griffin-Lim [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for one per processor [default: 0]
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Report format [default: csv]
    #[arg(long, value_parser = parse_format)]
    pub format: Option<ReportFormat>,
    /// Report path; standard output when absent
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DatasetArgs {
    /// Dataset root holding the WAVs, or "synth" for a generated dataset
    #[arg(long, value_name = "PATH|synth")]
    pub dataset: Option<String>,
    /// JSON-lines metadata [default: <dataset>/metadata.jsonl]
    #[arg(long, value_name = "FILE")]
    pub metadata: Option<PathBuf>,
    /// Clips per timbre profile when --dataset synth [default: 100]
    #[arg(long)]
    pub n_per_class: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Representation id
    #[arg(long, value_parser = parse_repr)]
    pub repr: Representation,
    /// Output directory for the .rten files
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Input WAV files (16 kHz mono, at most 16000 samples are used)
    #[arg(required = true, value_name = "WAV")]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Output directory for the .wav files
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Griffin-Lim iterations for mel and mfcc [default: 60]
    #[arg(long)]
    pub gl_iters: Option<usize>,
    /// Input RTEN files
    #[arg(required = true, value_name = "RTEN")]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    /// Representation ids, comma separated, or "all"
    #[arg(long, default_value = "all", value_parser = parse_repr_list)]
    pub repr: ReprList,
    /// Griffin-Lim iterations for mel and mfcc [default: 60]
    #[arg(long)]
    pub gl_iters: Option<usize>,
    /// Also report median encode/decode wall times (makes output run-dependent)
    #[arg(long)]
    pub times: bool,
    /// Directory to dump the RTEN tensor of every evaluated clip into
    #[arg(long, value_name = "DIR")]
    pub dump: Option<PathBuf>,
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Row label for the scored generator [default: generated]
    #[arg(long)]
    pub label: Option<String>,
    /// General-purpose embeddings of real clips (EMB1), for FAD and KID
    #[arg(long, value_name = "FILE", requires = "gen_emb")]
    pub real_emb: Option<PathBuf>,
    /// General-purpose embeddings of generated clips (EMB1)
    #[arg(long, value_name = "FILE", requires = "real_emb")]
    pub gen_emb: Option<PathBuf>,
    /// Pitch-classifier posteriors of real clips (PRB1), adds a "real" PIS row
    #[arg(long, value_name = "FILE")]
    pub real_prob: Option<PathBuf>,
    /// Pitch-classifier posteriors of generated clips (PRB1), for PIS
    #[arg(long, value_name = "FILE")]
    pub gen_prob: Option<PathBuf>,
    /// Instrument-classifier posteriors of real clips (PRB1), adds a "real" IIS value
    #[arg(long, value_name = "FILE")]
    pub real_instr_prob: Option<PathBuf>,
    /// Instrument-classifier posteriors of generated clips (PRB1), for IIS
    #[arg(long, value_name = "FILE")]
    pub gen_instr_prob: Option<PathBuf>,
    /// Pitch-classifier embeddings of real clips (EMB1), for PKID
    #[arg(long, value_name = "FILE", requires = "gen_pitch_emb")]
    pub real_pitch_emb: Option<PathBuf>,
    /// Pitch-classifier embeddings of generated clips (EMB1)
    #[arg(long, value_name = "FILE", requires = "real_pitch_emb")]
    pub gen_pitch_emb: Option<PathBuf>,
    /// Instrument-classifier embeddings of real clips (EMB1), for IKID
    #[arg(long, value_name = "FILE", requires = "gen_instr_emb")]
    pub real_instr_emb: Option<PathBuf>,
    /// Instrument-classifier embeddings of generated clips (EMB1)
    #[arg(long, value_name = "FILE", requires = "real_instr_emb")]
    pub gen_instr_emb: Option<PathBuf>,
    /// Score a mock generator (evaluation clips plus noise at this RMS ratio)
    /// instead of files; needs --dataset
    #[arg(long)]
    pub noise_level: Option<f64>,
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Representation ids, comma separated, or "all"
    #[arg(long, visible_alias = "reprs", default_value = "all", value_parser = parse_repr_list)]
    pub repr: ReprList,
    /// Griffin-Lim iterations for mel and mfcc [default: 60]
    #[arg(long)]
    pub gl_iters: Option<usize>,
    /// Number of evaluation clips to time [default: 10]
    #[arg(long)]
    pub clips: Option<usize>,
    /// Timed passes over the clips [default: 5]
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[command(flatten)]
    pub dataset: DatasetArgs,
    #[command(flatten)]
    pub report: ReportArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory to write audio/ and metadata.jsonl into
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Clips per timbre profile [default: 100]
    #[arg(long)]
    pub n_per_class: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

fn parse_repr(s: &str) -> Result<Representation, String> {
    s.parse().map_err(|e: audiorep::Error| e.to_string())
}

/// One or more representations, in the order given.
#[derive(Debug, Clone, PartialEq)]
pub struct ReprList(pub Vec<Representation>);

fn parse_repr_list(s: &str) -> Result<ReprList, String> {
    if s == "all" {
        return Ok(ReprList(Representation::ALL.to_vec()));
    }
    let list = s
        .split(',')
        .map(|p| parse_repr(p.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReprList(list))
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: audiorep::Error| e.to_string())
}
