//! Dataset handling and the model-free experiments: round-trip lower
//! bounds, codec timing, and a noise-based mock generator.

mod dataset;
mod experiments;
mod report;
mod synth;
mod wav;

pub use dataset::{
    ingest, load_clip, load_split, DatasetEntry, DatasetIndex, InstrumentFamily, Source, Split,
    MAX_PITCH, MIN_PITCH, TRAIN_FRACTION,
};
pub use experiments::{
    mock_generate, roundtrip_eval, score_external, timing_bench, ExternalInputs, RoundTrip,
    TimingResult,
};
pub use report::{emit_report, render_report, EvalReport, ReportFormat, ReportMeta, ReportRow};
pub use synth::{midi_to_hz, synth_clip, synth_dataset, SynthSpec, TimbreProfile, PROFILES};
pub use wav::{read_wav, write_wav};
