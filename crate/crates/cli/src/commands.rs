use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use audiorep::codecs::{read_tensor_file, write_tensor_file, Codec, Representation};
use audiorep::dsp::AudioBuffer;
use audiorep::embeddings::{read_embeddings, read_probs, BaselineEmbedder, Embedder};
use audiorep::harness::{
    emit_report, ingest, load_split, mock_generate, read_wav, render_report, roundtrip_eval,
    score_external, synth_dataset, timing_bench, write_wav, DatasetIndex, EvalReport,
    ExternalInputs, ReportFormat, ReportMeta, ReportRow, Split, SynthSpec,
};
use audiorep::metrics::inception_score;
use log::{error, info, warn};
use rayon::prelude::*;
use tempfile::TempDir;

use crate::args::{
    BenchArgs, DatasetArgs, DecodeArgs, EncodeArgs, EvalArgs, ReportArgs, RoundtripArgs, SynthArgs,
};
use crate::settings::{self, pick, FileConfig, Provenance};
use crate::UsageError;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn setup_threads(jobs: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .context("starting worker pool")
}

fn announce(prov: &Provenance) -> Result<String> {
    let hash = prov.hash()?;
    eprintln!("config hash: {hash}");
    Ok(hash)
}

fn require_files(paths: &[&PathBuf]) -> Result<()> {
    for p in paths {
        if !p.is_file() {
            return Err(usage(format!("no such file: {}", p.display())));
        }
    }
    Ok(())
}

/// `<out>/<input stem>.<ext>` for every input; clashing stems are a usage error.
fn output_paths(inputs: &[PathBuf], out: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut seen = HashSet::new();
    inputs
        .iter()
        .map(|input| {
            let stem = input
                .file_stem()
                .ok_or_else(|| usage(format!("cannot name output for {}", input.display())))?;
            if !seen.insert(stem.to_owned()) {
                return Err(usage(format!(
                    "two inputs share the basename {:?}; outputs would collide",
                    stem
                )));
            }
            Ok(out.join(stem).with_extension(ext))
        })
        .collect()
}

/// Runs `work` on every (input, output) pair in parallel, logging each
/// failure. Fails if any file failed.
fn per_file<F>(inputs: &[PathBuf], outputs: &[PathBuf], work: F) -> Result<()>
where
    F: Fn(&Path, &Path) -> Result<()> + Sync,
{
    let n = inputs.len();
    let failed: usize = inputs
        .par_iter()
        .zip(outputs)
        .enumerate()
        .map(|(i, (input, output))| match work(input, output) {
            Ok(()) => {
                info!(
                    "[{}/{n}] {} -> {}",
                    i + 1,
                    input.display(),
                    output.display()
                );
                0
            }
            Err(e) => {
                error!("[{}/{n}] {}: {e:#}", i + 1, input.display());
                1
            }
        })
        .sum();
    if failed > 0 {
        bail!("{failed} of {n} file(s) failed");
    }
    Ok(())
}

pub fn encode(args: EncodeArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (seed, jobs) = settings::common(&args.common, &file);
    require_files(&args.inputs.iter().collect::<Vec<_>>())?;
    let outputs = output_paths(&args.inputs, &args.out, "rten")?;
    let config = settings::codec_config(None, &file, seed);
    let mut prov = Provenance::new("encode", seed, config.clone());
    prov.reprs = vec![args.repr.id().to_string()];
    announce(&prov)?;
    setup_threads(jobs)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let codec = Codec::new(config)?;
    per_file(&args.inputs, &outputs, |input, output| {
        let audio = read_wav(input)?;
        if audio.len() > audiorep::codecs::CLIP_LEN {
            warn!(
                "{}: using the first {} samples",
                input.display(),
                audiorep::codecs::CLIP_LEN
            );
        }
        let mut samples = audio.into_samples();
        samples.truncate(audiorep::codecs::CLIP_LEN);
        let tensor = codec.encode(args.repr, &AudioBuffer::from_samples(samples)?)?;
        write_tensor_file(&tensor, output)?;
        Ok(())
    })
}

pub fn decode(args: DecodeArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (seed, jobs) = settings::common(&args.common, &file);
    require_files(&args.inputs.iter().collect::<Vec<_>>())?;
    let outputs = output_paths(&args.inputs, &args.out, "wav")?;
    let config = settings::codec_config(args.gl_iters, &file, seed);
    announce(&Provenance::new("decode", seed, config.clone()))?;
    setup_threads(jobs)?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let codec = Codec::new(config)?;
    per_file(&args.inputs, &outputs, |input, output| {
        let audio = codec.decode(&read_tensor_file(input)?)?;
        let clamped = audio
            .into_samples()
            .into_iter()
            .map(|s| s.clamp(-1.0, 1.0))
            .collect();
        write_wav(output, &AudioBuffer::from_samples(clamped)?)?;
        Ok(())
    })
}

/// A dataset index plus the temporary directory backing it, if synthetic.
struct Dataset {
    index: DatasetIndex,
    _tmp: Option<TempDir>,
}

struct DatasetChoice {
    name: String,
    root: Option<PathBuf>,
    metadata: Option<PathBuf>,
    n_per_class: Option<usize>,
}

/// Resolves and checks dataset flags without doing any work.
fn dataset_choice(d: &DatasetArgs, file: &FileConfig) -> Result<DatasetChoice> {
    let name = d
        .dataset
        .clone()
        .or_else(|| file.dataset.clone())
        .ok_or_else(|| usage("--dataset is required (a directory or \"synth\")"))?;
    if name == "synth" {
        let n = pick(
            d.n_per_class,
            file.n_per_class,
            SynthSpec::default().n_per_class,
        );
        return Ok(DatasetChoice {
            name,
            root: None,
            metadata: None,
            n_per_class: Some(n),
        });
    }
    let root = PathBuf::from(&name);
    if !root.is_dir() {
        return Err(usage(format!("dataset directory not found: {name}")));
    }
    let metadata = d
        .metadata
        .clone()
        .or_else(|| file.metadata.clone())
        .unwrap_or_else(|| root.join("metadata.jsonl"));
    require_files(&[&metadata])?;
    Ok(DatasetChoice {
        name,
        root: Some(root),
        metadata: Some(metadata),
        n_per_class: None,
    })
}

fn load_dataset(choice: &DatasetChoice, seed: u64) -> Result<Dataset> {
    match (&choice.root, &choice.metadata) {
        (Some(root), Some(metadata)) => {
            let index = ingest(root, metadata, seed)?;
            if index.skipped > 0 {
                warn!("skipped {} metadata record(s)", index.skipped);
            }
            info!("dataset: {} entries", index.len());
            Ok(Dataset { index, _tmp: None })
        }
        _ => {
            let tmp = tempfile::tempdir().context("creating temporary dataset directory")?;
            let spec = SynthSpec {
                n_per_class: choice
                    .n_per_class
                    .unwrap_or(SynthSpec::default().n_per_class),
                seed,
                ..SynthSpec::default()
            };
            let index = synth_dataset(tmp.path(), &spec)?;
            info!("synthetic dataset: {} entries", index.len());
            Ok(Dataset {
                index,
                _tmp: Some(tmp),
            })
        }
    }
}

fn write_report(report: &EvalReport, args: &ReportArgs, format: ReportFormat) -> Result<()> {
    report.validate()?;
    match &args.out {
        Some(path) => {
            emit_report(report, format, path)
                .with_context(|| format!("writing report {}", path.display()))?;
            info!("report written to {}", path.display());
        }
        None => print!("{}", render_report(report, format)),
    }
    Ok(())
}

fn report_format(args: &ReportArgs, file: &FileConfig) -> ReportFormat {
    pick(args.format, file.format, ReportFormat::Csv)
}

pub fn roundtrip(args: RoundtripArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (seed, jobs) = settings::common(&args.common, &file);
    let choice = dataset_choice(&args.dataset, &file)?;
    let format = report_format(&args.report, &file);
    let config = settings::codec_config(args.gl_iters, &file, seed);
    let mut prov = Provenance::new("roundtrip", seed, config.clone());
    prov.reprs = args.repr.0.iter().map(|r| r.id().to_string()).collect();
    prov.dataset = Some(choice.name.clone());
    prov.n_per_class = choice.n_per_class;
    let hash = announce(&prov)?;
    setup_threads(jobs)?;

    let data = load_dataset(&choice, seed)?;
    let codec = Codec::new(config)?;
    let embedder = BaselineEmbedder::new()?;
    let mut rows = Vec::new();
    for (i, repr) in args.repr.0.iter().enumerate() {
        let mut result = roundtrip_eval(
            &data.index,
            *repr,
            &codec,
            &embedder,
            &ExternalInputs::default(),
        )?;
        info!(
            "[{}/{}] {repr}: FAD {:.6e} over {} clips",
            i + 1,
            args.repr.0.len(),
            result.row.fad.unwrap_or(f64::NAN),
            result.ids.len()
        );
        if !args.times {
            result.row.encode_time_s = None;
            result.row.decode_time_s = None;
        }
        if let Some(dir) = &args.dump {
            dump_tensors(&data.index, *repr, &codec, dir)?;
        }
        rows.push(result.row);
    }
    let report = EvalReport {
        rows,
        meta: ReportMeta {
            config_hash: hash,
            seed,
            timestamp: None,
        },
    };
    write_report(&report, &args.report, format)
}

fn dump_tensors(
    index: &DatasetIndex,
    repr: Representation,
    codec: &Codec,
    dir: &Path,
) -> Result<()> {
    let dir = dir.join(repr.id());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    load_split(index, Split::Eval)?
        .par_iter()
        .try_for_each(|(id, clip)| {
            write_tensor_file(&codec.encode(repr, clip)?, dir.join(format!("{id}.rten")))?;
            Ok(())
        })
}

pub fn eval(args: EvalArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (seed, jobs) = settings::common(&args.common, &file);
    let format = report_format(&args.report, &file);
    let noise = args.noise_level.or(file.noise_level);

    let files: Vec<&PathBuf> = [
        &args.real_emb,
        &args.gen_emb,
        &args.real_prob,
        &args.gen_prob,
        &args.real_instr_prob,
        &args.gen_instr_prob,
        &args.real_pitch_emb,
        &args.gen_pitch_emb,
        &args.real_instr_emb,
        &args.gen_instr_emb,
    ]
    .into_iter()
    .flatten()
    .collect();
    require_files(&files)?;
    if noise.is_none() && files.is_empty() {
        return Err(usage(
            "nothing to score: pass embedding/probability files or --noise-level",
        ));
    }
    if noise.is_some() && args.real_emb.is_some() {
        return Err(usage(
            "--noise-level scores baseline embeddings; drop --real-emb/--gen-emb",
        ));
    }
    if let Some(level) = noise {
        if !(level.is_finite() && level >= 0.0) {
            return Err(usage(format!("--noise-level must be >= 0, got {level}")));
        }
    }
    let choice = noise
        .map(|_| dataset_choice(&args.dataset, &file))
        .transpose()?;

    let mut prov = Provenance::new("eval", seed, settings::codec_config(None, &file, seed));
    prov.inputs = files.iter().map(|p| p.display().to_string()).collect();
    prov.noise_level = noise;
    if let Some(c) = &choice {
        prov.dataset = Some(c.name.clone());
        prov.n_per_class = c.n_per_class;
    }
    let hash = announce(&prov)?;
    setup_threads(jobs)?;

    let emb_pair = |real: &Option<PathBuf>, gen: &Option<PathBuf>| -> Result<_> {
        match (real, gen) {
            (Some(r), Some(g)) => Ok(Some((read_embeddings(r)?, read_embeddings(g)?))),
            _ => Ok(None),
        }
    };
    let external = ExternalInputs {
        pitch_probs: args.gen_prob.as_ref().map(read_probs).transpose()?,
        instrument_probs: args.gen_instr_prob.as_ref().map(read_probs).transpose()?,
        pitch_emb: emb_pair(&args.real_pitch_emb, &args.gen_pitch_emb)?,
        instrument_emb: emb_pair(&args.real_instr_emb, &args.gen_instr_emb)?,
        audio_emb: emb_pair(&args.real_emb, &args.gen_emb)?,
    };

    let mut rows = Vec::new();
    if args.real_prob.is_some() || args.real_instr_prob.is_some() {
        let mut real = ReportRow::new("real");
        real.pis = args
            .real_prob
            .as_ref()
            .map(read_probs)
            .transpose()?
            .map(|p| inception_score(&p));
        real.iis = args
            .real_instr_prob
            .as_ref()
            .map(read_probs)
            .transpose()?
            .map(|p| inception_score(&p));
        rows.push(real);
    }

    let default_label = match noise {
        Some(level) => format!("mock noise={level}"),
        None => "generated".to_string(),
    };
    let mut row = ReportRow::new(args.label.clone().unwrap_or(default_label));
    score_external(&mut row, &external)?;
    if let (Some(level), Some(choice)) = (noise, &choice) {
        let data = load_dataset(choice, seed)?;
        let clips = load_split(&data.index, Split::Eval)?;
        let generated = mock_generate(&clips, level, seed)?;
        let real: Vec<AudioBuffer> = clips.into_iter().map(|(_, c)| c).collect();
        let embedder = BaselineEmbedder::new()?;
        let (real, generated) = (embedder.embed_all(&real)?, embedder.embed_all(&generated)?);
        row.fad = Some(audiorep::metrics::fad(&real, &generated)?);
        row.kid = Some(audiorep::metrics::kid(&real, &generated)?);
    }
    rows.push(row);
    let report = EvalReport {
        rows,
        meta: ReportMeta {
            config_hash: hash,
            seed,
            timestamp: None,
        },
    };
    write_report(&report, &args.report, format)
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (seed, jobs) = settings::common(&args.common, &file);
    let choice = dataset_choice(&args.dataset, &file)?;
    let format = report_format(&args.report, &file);
    let n_clips = pick(args.clips, file.clips, settings::DEFAULT_BENCH_CLIPS);
    let repetitions = pick(
        args.repetitions,
        file.repetitions,
        settings::DEFAULT_REPETITIONS,
    );
    if n_clips == 0 || repetitions == 0 {
        return Err(usage("--clips and --repetitions must be at least 1"));
    }
    if jobs > 1 {
        warn!("bench runs single-threaded; ignoring --jobs {jobs}");
    }
    let config = settings::codec_config(args.gl_iters, &file, seed);
    let mut prov = Provenance::new("bench", seed, config.clone());
    prov.reprs = args.repr.0.iter().map(|r| r.id().to_string()).collect();
    prov.dataset = Some(choice.name.clone());
    prov.n_per_class = choice.n_per_class;
    prov.clips = Some(n_clips);
    prov.repetitions = Some(repetitions);
    let hash = announce(&prov)?;
    setup_threads(1)?;

    let data = load_dataset(&choice, seed)?;
    let clips: Vec<AudioBuffer> = load_split(&data.index, Split::Eval)?
        .into_iter()
        .take(n_clips)
        .map(|(_, c)| c)
        .collect();
    if clips.len() < n_clips {
        warn!("evaluation split has only {} clips", clips.len());
    }
    let codec = Codec::new(config)?;
    let results = timing_bench(&clips, &args.repr.0, repetitions, &codec)?;
    for r in &results {
        info!(
            "{}: encode {:.3} ms, decode {:.3} ms ({} measurements)",
            r.repr,
            r.encode_median_s * 1e3,
            r.decode_median_s * 1e3,
            r.measurements
        );
    }
    let rows = results.iter().map(|r| r.to_row()).collect();
    let report = EvalReport {
        rows,
        meta: ReportMeta {
            config_hash: hash,
            seed,
            timestamp: None,
        },
    };
    write_report(&report, &args.report, format)
}

pub fn synth_data(args: SynthArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let (seed, jobs) = settings::common(&args.common, &file);
    let spec = SynthSpec {
        n_per_class: pick(
            args.n_per_class,
            file.n_per_class,
            SynthSpec::default().n_per_class,
        ),
        seed,
        ..SynthSpec::default()
    };
    spec.validate().map_err(|e| usage(e.to_string()))?;
    let mut prov = Provenance::new(
        "synth-data",
        seed,
        settings::codec_config(None, &file, seed),
    );
    prov.n_per_class = Some(spec.n_per_class);
    announce(&prov)?;
    setup_threads(jobs)?;

    let index = synth_dataset(&args.out, &spec)?;
    info!(
        "wrote {} clips and metadata.jsonl to {}",
        index.len(),
        args.out.display()
    );
    Ok(())
}
