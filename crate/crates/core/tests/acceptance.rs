//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::time::{Duration, Instant};

use audiorep::codecs::{griffin_lim_traced, Codec, CodecConfig, Representation};
use audiorep::dsp::AudioBuffer;
use audiorep::embeddings::{BaselineEmbedder, Embedder};
use audiorep::harness::{
    load_split, midi_to_hz, mock_generate, roundtrip_eval, synth_dataset, timing_bench,
    DatasetIndex, ExternalInputs, Split, SynthSpec,
};
use audiorep::metrics::{
    fad, frechet_distance, inception_score, mmd2_unbiased, EmbeddingSet, GaussianStats,
    KernelParams, ProbMatrix,
};
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn shapes(codec_config: &CodecConfig) -> Outcome {
    let codec = Codec::new(codec_config.clone()).map_err(|e| e.to_string())?;
    let clip = buffer(band_limited(0));
    let expected = [
        (Representation::Waveform, (1, 1, 16000)),
        (Representation::Complex, (2, 512, 64)),
        (Representation::MagIf, (2, 512, 64)),
        (Representation::CqNsgt, (4, 97, 948)),
        (Representation::Cqt, (2, 84, 256)),
        (Representation::Mel, (1, 128, 64)),
        (Representation::Mfcc, (1, 128, 64)),
    ];
    for (repr, shape) in expected {
        let t = codec.encode(repr, &clip).map_err(|e| e.to_string())?;
        check(
            t.shape() == shape,
            format!("{repr}: {:?} != {shape:?}", t.shape()),
        )?;
    }
    Ok("7/7 shapes exact".into())
}

fn lossless(codec: &Codec) -> Outcome {
    let mut worst = [f64::INFINITY; 3];
    let targets = [
        (Representation::Complex, 100.0),
        (Representation::CqNsgt, 100.0),
        (Representation::MagIf, 60.0),
    ];
    for seed in 0..20 {
        let x = band_limited(1000 + seed);
        let clip = buffer(x.clone());
        let wave = codec
            .decode(
                &codec
                    .encode(Representation::Waveform, &clip)
                    .map_err(|e| e.to_string())?,
            )
            .map_err(|e| e.to_string())?;
        let exact = x
            .iter()
            .zip(wave.samples())
            .all(|(a, b)| (*a as f32) as f64 == *b);
        check(exact, format!("waveform not bit-exact for seed {seed}"))?;
        for (k, (repr, _)) in targets.iter().enumerate() {
            let y = codec
                .decode(&codec.encode(*repr, &clip).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            worst[k] = worst[k].min(snr_db(&x, y.samples()));
        }
    }
    for (k, (repr, min)) in targets.iter().enumerate() {
        check(
            worst[k] >= *min,
            format!("{repr} worst SNR {:.1} dB < {min} dB", worst[k]),
        )?;
    }
    Ok(format!(
        "20 signals; waveform bit-exact; worst SNR complex {:.1} dB, cq-nsgt {:.1} dB, mag-if {:.1} dB",
        worst[0], worst[1], worst[2]
    ))
}

fn cqt_pitch(codec: &Codec) -> Outcome {
    let mut worst: f64 = 0.0;
    for pitch in 44..=70u8 {
        let f = midi_to_hz(pitch);
        let t = codec
            .encode(Representation::Cqt, &buffer(sine(f, 0.5)))
            .map_err(|e| e.to_string())?;
        let y = codec.decode(&t).map_err(|e| e.to_string())?;
        let err = (dominant_frequency(y.samples()) / f - 1.0).abs();
        worst = worst.max(err);
        check(err < 0.01, format!("MIDI {pitch}: relative error {err:.4}"))?;
    }
    Ok(format!(
        "27 pitches; worst relative error {:.3}%",
        100.0 * worst
    ))
}

fn griffin_lim_monotone(codec: &Codec) -> Outcome {
    let plan = codec.stft_plan();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst_ratio: f64 = 0.0;
    for i in 0..10 {
        let mag: Vec<f64> = if i < 6 {
            plan.forward(&band_limited(500 + i))
                .map_err(|e| e.to_string())?
                .magnitudes()
        } else {
            (0..513 * 64).map(|_| rng.random::<f64>()).collect()
        };
        let (_, errors) = griffin_lim_traced(plan, &mag, 60, i).map_err(|e| e.to_string())?;
        check(errors.len() == 60, "expected 60 error values")?;
        for (k, w) in errors.windows(2).enumerate() {
            worst_ratio = worst_ratio.max(w[1] / w[0]);
            check(
                w[1] <= w[0] * (1.0 + 1e-7),
                format!(
                    "input {i}: error rose at iteration {}: {} -> {}",
                    k + 1,
                    w[0],
                    w[1]
                ),
            )?;
        }
    }
    Ok(format!(
        "10 inputs x 60 iterations; max E_k+1/E_k = {worst_ratio:.9}"
    ))
}

fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingSet {
    let data = (0..n * d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    EmbeddingSet::new(n, d, data).unwrap()
}

fn naive_mmd2(x: &EmbeddingSet, y: &EmbeddingSet) -> f64 {
    let k = |a: &[f64], b: &[f64]| {
        let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
        1.0 / (1.0 + d2 / 16.0)
    };
    let (m, n) = (x.n() as f64, y.n() as f64);
    let mut xx = 0.0;
    let mut yy = 0.0;
    let mut xy = 0.0;
    for i in 0..x.n() {
        for j in 0..x.n() {
            if i != j {
                xx += k(x.row(i), x.row(j));
            }
        }
        for j in 0..y.n() {
            xy += k(x.row(i), y.row(j));
        }
    }
    for i in 0..y.n() {
        for j in 0..y.n() {
            if i != j {
                yy += k(y.row(i), y.row(j));
            }
        }
    }
    xx / (m * (m - 1.0)) + yy / (n * (n - 1.0)) - 2.0 * xy / (m * n)
}

fn metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_mmd: f64 = 0.0;
    for _ in 0..5 {
        let x = gaussian_rows(&mut rng, 50, 8);
        let y = gaussian_rows(&mut rng, 50, 8);
        let got = mmd2_unbiased(&x, &y, KernelParams::default()).map_err(|e| e.to_string())?;
        worst_mmd = worst_mmd.max((got - naive_mmd2(&x, &y)).abs());
    }
    check(
        worst_mmd <= 1e-12,
        format!("mmd differs from oracle by {worst_mmd:e}"),
    )?;

    let stats = |mu: &[f64], var: &[f64]| {
        GaussianStats::new(
            DVector::from_row_slice(mu),
            DMatrix::from_diagonal(&DVector::from_row_slice(var)),
        )
        .unwrap()
    };
    let hand = frechet_distance(&stats(&[0.0], &[1.0]), &stats(&[1.0], &[4.0]))
        .map_err(|e| e.to_string())?;
    check((hand - 2.0).abs() <= 1e-12, format!("1-D value {hand}"))?;
    let mut worst_fd: f64 = 0.0;
    for _ in 0..5 {
        let v = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| -> Vec<f64> {
            (0..8).map(|_| rng.random_range(lo..hi)).collect()
        };
        let (mr, mg, vr, vg) = (
            v(&mut rng, -1.0, 1.0),
            v(&mut rng, -1.0, 1.0),
            v(&mut rng, 0.1, 4.0),
            v(&mut rng, 0.1, 4.0),
        );
        let closed: f64 = (0..8)
            .map(|i| (mr[i] - mg[i]).powi(2) + (vr[i].sqrt() - vg[i].sqrt()).powi(2))
            .sum();
        let got =
            frechet_distance(&stats(&mr, &vr), &stats(&mg, &vg)).map_err(|e| e.to_string())?;
        worst_fd = worst_fd.max((got - closed).abs());
    }
    check(
        worst_fd <= 1e-9,
        format!("diagonal closed form off by {worst_fd:e}"),
    )?;

    let mut worst_is: f64 = 0.0;
    for c in [2usize, 5, 27] {
        let uniform = ProbMatrix::from_rows(&vec![vec![1.0 / c as f64; c]; 2 * c]).unwrap();
        worst_is = worst_is.max((inception_score(&uniform) - 1.0).abs());
        let one_hot: Vec<Vec<f64>> = (0..4 * c)
            .map(|i| (0..c).map(|j| if i % c == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let is = inception_score(&ProbMatrix::from_rows(&one_hot).unwrap());
        worst_is = worst_is.max((is - c as f64).abs());
    }
    check(
        worst_is <= 1e-9,
        format!("inception score off by {worst_is:e}"),
    )?;
    Ok(format!(
        "mmd vs oracle {worst_mmd:.1e}; frechet diag {worst_fd:.1e}, 1-D {:.1e}; IS {worst_is:.1e}",
        (hand - 2.0).abs()
    ))
}

fn fad_sampling() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let d = 4;
    let mu_g = [1.0f64, 0.5, -0.5, 0.2];
    let var_g = [2.0f64, 0.5, 1.0, 3.0];
    let q = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal))
        .qr()
        .q();
    let scale =
        &q * DMatrix::from_diagonal(&DVector::from_iterator(d, var_g.iter().map(|v| v.sqrt())));
    let n = 5000;
    let real = gaussian_rows(&mut rng, n, d);
    let mut gen_data = Vec::with_capacity(n * d);
    for _ in 0..n {
        let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let s = &scale * z;
        gen_data.extend((0..d).map(|i| s[i] + mu_g[i]));
    }
    let gen = EmbeddingSet::new(n, d, gen_data).unwrap();
    // identity vs Q D Q^T commute, so the closed form separates per eigenvalue
    let closed: f64 = mu_g.iter().map(|m| m * m).sum::<f64>()
        + var_g.iter().map(|v| (1.0 - v.sqrt()).powi(2)).sum::<f64>();
    let got = fad(&real, &gen).map_err(|e| e.to_string())?;
    let rel = (got / closed - 1.0).abs();
    check(
        rel < 0.05,
        format!(
            "fad {got:.4} vs closed form {closed:.4} ({:.2}%)",
            100.0 * rel
        ),
    )?;
    Ok(format!(
        "fad {got:.4} vs closed form {closed:.4} ({:.2}% off)",
        100.0 * rel
    ))
}

fn roundtrip_experiment(index: &DatasetIndex, codec: &Codec) -> Outcome {
    let embedder = BaselineEmbedder::new().map_err(|e| e.to_string())?;
    let mut fads = Vec::new();
    for repr in Representation::ALL {
        let rt = roundtrip_eval(index, repr, codec, &embedder, &ExternalInputs::default())
            .map_err(|e| e.to_string())?;
        fads.push((repr, rt.row.fad.unwrap()));
    }
    let get = |r: Representation| fads.iter().find(|(x, _)| *x == r).unwrap().1;
    check(
        get(Representation::Waveform) < 1e-6,
        format!("waveform fad {}", get(Representation::Waveform)),
    )?;
    let lossless = [
        Representation::Complex,
        Representation::MagIf,
        Representation::CqNsgt,
    ];
    let lossy = [
        Representation::Mel,
        Representation::Mfcc,
        Representation::Cqt,
    ];
    let max_lossless = lossless.iter().map(|r| get(*r)).fold(0.0, f64::max);
    let min_lossy = lossy.iter().map(|r| get(*r)).fold(f64::INFINITY, f64::min);
    let table = fads
        .iter()
        .map(|(r, f)| format!("{r}={f:.3e}"))
        .collect::<Vec<_>>()
        .join(" ");
    check(
        max_lossless < min_lossy,
        format!("lossless/lossy overlap: {table}"),
    )?;
    Ok(format!(
        "{} eval clips; {table}",
        index.split(Split::Eval).count()
    ))
}

fn timing(index: &DatasetIndex, codec: &Codec) -> Outcome {
    let clips: Vec<AudioBuffer> = index
        .entries
        .iter()
        .take(50)
        .map(audiorep::harness::load_clip)
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let results =
        timing_bench(&clips, &Representation::ALL, 1, codec).map_err(|e| e.to_string())?;
    let dec = |r: Representation| {
        results
            .iter()
            .find(|t| t.repr == r)
            .unwrap()
            .decode_median_s
    };
    let (mel, mfcc) = (dec(Representation::Mel), dec(Representation::Mfcc));
    let (complex, magif, wave) = (
        dec(Representation::Complex),
        dec(Representation::MagIf),
        dec(Representation::Waveform),
    );
    let summary = format!(
        "decode medians: mfcc {:.2} ms, mel {:.2} ms, complex {:.2} ms, mag-if {:.2} ms, waveform {:.3} ms",
        mfcc * 1e3,
        mel * 1e3,
        complex * 1e3,
        magif * 1e3,
        wave * 1e3
    );
    check(mfcc > mel, format!("mfcc not slower than mel; {summary}"))?;
    check(
        mel >= 10.0 * complex.max(magif),
        format!("mel < 10x stft decode; {summary}"),
    )?;
    check(
        wave < 1e-3 && wave < 0.01 * mel,
        format!("waveform decode not ~0; {summary}"),
    )?;
    Ok(summary)
}

fn mock_monotone(index: &DatasetIndex) -> Outcome {
    let clips = load_split(index, Split::Eval).map_err(|e| e.to_string())?;
    let embedder = BaselineEmbedder::new().map_err(|e| e.to_string())?;
    let real: Vec<AudioBuffer> = clips.iter().map(|(_, c)| c.clone()).collect();
    let real_emb = embedder.embed_all(&real).map_err(|e| e.to_string())?;
    let mut values = Vec::new();
    for level in [0.0, 0.01, 0.1, 0.5] {
        let gen = mock_generate(&clips, level, 9).map_err(|e| e.to_string())?;
        let emb = embedder.embed_all(&gen).map_err(|e| e.to_string())?;
        values.push(fad(&real_emb, &emb).map_err(|e| e.to_string())?);
    }
    let listed = values
        .iter()
        .map(|v| format!("{v:.4e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(values[0] < 1e-9, format!("fad at zero noise {}", values[0]))?;
    check(
        values.windows(2).all(|w| w[1] >= w[0]),
        format!("not monotone: {listed}"),
    )?;
    Ok(format!("fad over noise 0/0.01/0.1/0.5: {listed}"))
}

fn report(name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok(d) if elapsed <= limit => (true, d),
        Ok(d) => (false, format!("{d}; too slow: {elapsed:.1?} > {limit:?}")),
        Err(e) => (false, e),
    };
    println!(
        "{} {name}: {detail} ({:.2} s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn main() {
    let config = CodecConfig::default();
    let mut all = true;
    all &= report("tensor shapes", Duration::from_secs(1), || shapes(&config));
    let codec = Codec::new(config).expect("default codec config");
    // build lazily initialised kernels outside the timed sections
    codec.cqt_kernel();
    codec.mel_codec();
    all &= report("lossless round trips", Duration::from_secs(30), || {
        lossless(&codec)
    });
    all &= report("cqt pitch fidelity", Duration::from_secs(30), || {
        cqt_pitch(&codec)
    });
    all &= report("griffin-lim monotonicity", Duration::from_secs(60), || {
        griffin_lim_monotone(&codec)
    });
    all &= report("metric oracles", Duration::from_secs(10), metric_oracles);
    all &= report(
        "fad sampling consistency",
        Duration::from_secs(30),
        fad_sampling,
    );

    let dir = tempfile::tempdir().expect("temp dir");
    let index = synth_dataset(dir.path(), &SynthSpec::default()).expect("synthetic dataset");
    assert_eq!(index.len(), 500);
    all &= report("round-trip lower bounds", Duration::from_secs(600), || {
        roundtrip_experiment(&index, &codec)
    });
    all &= report("timing order", Duration::from_secs(300), || {
        timing(&index, &codec)
    });
    all &= report(
        "mock generator monotonicity",
        Duration::from_secs(120),
        || mock_monotone(&index),
    );
    if !all {
        std::process::exit(1);
    }
}
