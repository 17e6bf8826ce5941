//! One PASS/FAIL line per acceptance criterion. Expensive fixtures (the
//! synthetic end-to-end models) are built once and shared.

#![allow(clippy::excessive_precision)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use mmdec::analysis::{
    accuracy, apply_composite, average_predictions, bootstrap_averaging_curve, curve_table, evaluate, fit_composite,
    participant_average_accuracy, pearson_corr, predict, random_classifier_interval, t_test, EvalMode, EvalSettings,
    ExamplePrediction, Tails,
};
use mmdec::autodiff::{bce_loss, conv1d_dilated, grad_check, separable_conv1d, ConvLayerSpec, Tensor};
use mmdec::data::{split_trials, synth_trials, SplitFractions, Splits, SynthSpec, Trial};
use mmdec::eeg::{FFR_BAND, HIGHPASS_HZ};
use mmdec::model::{init_glorot, receptive_field, DecoderConfig, DecoderParams};
use mmdec::signal::fir_zero_phase;
use mmdec::signal::iir::FirstOrder;
use mmdec::signal::FeatureKind::{self, Envelope, EnvelopeModulations};
use mmdec::train::{balanced_batches, enumerate_examples, fit, TrainConfig};

type Check = Result<(bool, String), String>;

/// User plus system CPU time of this process, all threads.
fn cpu_seconds() -> f64 {
    // SAFETY: getrusage only writes into the zeroed struct we pass.
    let mut u: libc::rusage = unsafe { std::mem::zeroed() };
    unsafe { libc::getrusage(libc::RUSAGE_SELF, &mut u) };
    let tv = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 * 1e-6;
    tv(u.ru_utime) + tv(u.ru_stime)
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

fn random_tensor(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f32> {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect()).expect("finite")
}

fn sized(kind: FeatureKind, samples: usize) -> DecoderConfig {
    DecoderConfig {
        segment_seconds: samples as f64 / kind.rate(),
        ..DecoderConfig::new(kind)
    }
}

fn swap_symmetry() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for kind in [Envelope, EnvelopeModulations] {
        let cfg = DecoderConfig::new(kind);
        let t = cfg.segment_samples();
        for i in 0..1000u64 {
            let p = init_glorot(&cfg, i).map_err(e)?;
            let eeg = random_tensor(&mut rng, &[64, t]);
            let a = random_tensor(&mut rng, &[1, t]);
            let b = random_tensor(&mut rng, &[1, t]);
            let ab = p.forward(&eeg, &a, &b).map_err(e)?.probability as f64;
            let ba = p.forward(&eeg, &b, &a).map_err(e)?.probability as f64;
            worst = worst.max((ab + ba - 1.0).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-6 && secs < 60.0,
        format!("max |y(a,b) + y(b,a) - 1| = {worst:.2e} over 2x1000 triples in {secs:.1} s"),
    ))
}

fn identical_candidates() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut exact = 0;
    for i in 0..100u64 {
        let kind = if i % 2 == 0 { Envelope } else { EnvelopeModulations };
        let cfg = DecoderConfig::new(kind);
        let t = cfg.segment_samples();
        let p = init_glorot(&cfg, i).map_err(e)?;
        let eeg = random_tensor(&mut rng, &[64, t]);
        let a = random_tensor(&mut rng, &[1, t]);
        exact += usize::from(p.forward(&eeg, &a, &a).map_err(e)?.probability == 0.5);
    }
    Ok((exact == 100, format!("{exact}/100 inputs give exactly 0.5")))
}

fn gradient_oracle() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let batches = 5;
    for i in 0..batches {
        let kind = if i % 2 == 0 { Envelope } else { EnvelopeModulations };
        let params = init_glorot(&sized(kind, 40), 100 + i as u64).map_err(e)?.cast::<f64>();
        let batch: Vec<_> = (0..3)
            .map(|j| {
                let mut r = |s: &[usize]| random_tensor(&mut rng, s).cast::<f64>();
                (r(&[64, 40]), r(&[1, 40]), r(&[1, 40]), (j % 2) as f64)
            })
            .collect();
        let f = |flat: &[f64]| {
            let mut p = params.clone();
            p.unflatten(flat).expect("same layout");
            let mut loss = 0.0;
            let mut grad = vec![0.0; p.parameter_count()];
            for (eeg, a, b, y) in &batch {
                let (l, g) = p
                    .loss_and_grad(eeg.clone(), a.clone(), b.clone(), *y)
                    .expect("valid batch");
                loss += l / batch.len() as f64;
                for (acc, v) in grad.iter_mut().zip(g.into_iter().flatten()) {
                    *acc += v / batch.len() as f64;
                }
            }
            (loss, grad)
        };
        worst = worst.max(grad_check(f, &params.flatten(), 1e-6));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-4 && secs < 300.0,
        format!("max relative error {worst:.2e} over {batches} double-precision batches in {secs:.1} s"),
    ))
}

/// `out[o, t] = b[o] + sum_c sum_k w[o, c, k] x[c, t + k d]`.
#[allow(clippy::too_many_arguments)]
fn direct_conv(x: &[f64], w: &[f64], b: &[f64], c: usize, o: usize, k: usize, d: usize, t: usize) -> Vec<f64> {
    let t_out = t - (k - 1) * d;
    let mut out = vec![0.0; o * t_out];
    for oo in 0..o {
        for tt in 0..t_out {
            let mut acc = b[oo];
            for cc in 0..c {
                for kk in 0..k {
                    acc += w[(oo * c + cc) * k + kk] * x[cc * t + tt + kk * d];
                }
            }
            out[oo * t_out + tt] = acc;
        }
    }
    out
}

fn convolution_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut uniform = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let mut dims = ChaCha8Rng::seed_from_u64(5);
    let tensor = |s: &[usize], v: Vec<f64>| Tensor::new(s, v).expect("finite");
    let (mut dense, mut separable) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (c, o, k, d) = (
            dims.random_range(1..=8),
            dims.random_range(1..=8),
            dims.random_range(1..=8),
            dims.random_range(1..=3),
        );
        let t = (k - 1) * d + dims.random_range(1..=8);
        let x = uniform(c * t);
        let w = uniform(o * c * k);
        let b = uniform(o);
        let got = conv1d_dilated(
            &tensor(&[c, t], x.clone()),
            &ConvLayerSpec::dense(c, o, k, d),
            &tensor(&[o, c, k], w.clone()),
            &tensor(&[o], b.clone()),
        )
        .map_err(e)?;
        for (g, r) in got.data().iter().zip(direct_conv(&x, &w, &b, c, o, k, d, t)) {
            dense = dense.max((g - r).abs());
        }
        let s = uniform(o * c);
        let tk = uniform(o * k);
        let full: Vec<f64> = (0..o * c * k)
            .map(|i| s[i / k] * tk[(i / (c * k)) * k + i % k])
            .collect();
        let got = separable_conv1d(
            &tensor(&[c, t], x.clone()),
            &ConvLayerSpec::separable(c, o, k, d),
            &tensor(&[o, c], s),
            &tensor(&[o, k], tk),
            &tensor(&[o], b.clone()),
        )
        .map_err(e)?;
        for (g, r) in got.data().iter().zip(direct_conv(&x, &full, &b, c, o, k, d, t)) {
            separable = separable.max((g - r).abs());
        }
    }
    Ok((
        dense < 1e-12 && separable < 1e-12,
        format!("max error dilated {dense:.1e}, separable {separable:.1e} over 100 instances each"),
    ))
}

fn receptive_field_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut leaks = 0usize;
    let mut probes = 0usize;
    for kind in [Envelope, EnvelopeModulations] {
        let cfg = sized(kind, 64);
        let rf = receptive_field(&cfg).samples;
        let p = init_glorot(&cfg, 7).map_err(e)?;
        let eeg = random_tensor(&mut rng, &[64, 64]);
        let stim = random_tensor(&mut rng, &[1, 64]);
        let base_e = p.embed_eeg(&eeg).map_err(e)?;
        let base_s = p.embed_stimulus(&stim).map_err(e)?;
        for t in 0..base_e.shape()[1] {
            for k in (t + rf..64).chain(0..t) {
                let (mut pe, mut ps) = (eeg.clone(), stim.clone());
                for ch in 0..64 {
                    pe.data_mut()[ch * 64 + k] += 10.0;
                }
                ps.data_mut()[k] -= 10.0;
                let ye = p.embed_eeg(&pe).map_err(e)?;
                let ys = p.embed_stimulus(&ps).map_err(e)?;
                probes += 1;
                leaks +=
                    usize::from((0..16).any(|o| ye.row(o)[t] != base_e.row(o)[t] || ys.row(o)[t] != base_s.row(o)[t]));
            }
        }
    }
    let env = receptive_field(&DecoderConfig::new(Envelope));
    let ffr = receptive_field(&DecoderConfig::new(EnvelopeModulations));
    let (env_ms, ffr_ms) = ((1000.0 * env.seconds).round(), (1000.0 * ffr.seconds).round());
    Ok((
        leaks == 0 && env.samples == 27 && ffr.samples == 27 && env_ms == 422.0 && ffr_ms == 53.0,
        format!(
            "{leaks} of {probes} out-of-window perturbations leaked; {}/64 Hz = {env_ms} ms, {}/512 Hz = {ffr_ms} ms",
            env.samples, ffr.samples
        ),
    ))
}

/// Peak amplitude of a steady sinusoid from the RMS of the middle half.
fn amplitude(y: &[f64]) -> f64 {
    let mid = &y[y.len() / 4..3 * y.len() / 4];
    (2.0 * mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt()
}

fn filter_conformance() -> Check {
    use std::f64::consts::PI;
    let rate = 64.0;
    let x: Vec<f64> = (0..400 * 64)
        .map(|n| (2.0 * PI * 0.5 * n as f64 / rate).sin())
        .collect();
    let hp = FirstOrder::butterworth_highpass(HIGHPASS_HZ, rate).filtfilt(&x);
    let db = 20.0 * amplitude(&hp).log10();
    let rate = 512.0;
    let x: Vec<f64> = (0..8192).map(|n| (2.0 * PI * 145.0 * n as f64 / rate).sin()).collect();
    let gain = amplitude(&fir_zero_phase(&x, rate, FFR_BAND, 513).map_err(e)?);
    let dc = fir_zero_phase(&vec![1.0; 8192], rate, FFR_BAND, 513).map_err(e)?;
    let dc = dc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((
        (db + 6.0).abs() <= 0.5 && (gain - 1.0).abs() < 0.01 && dc < 1e-6,
        format!("highpass at 0.5 Hz {db:.2} dB; 145 Hz gain {gain:.4}; DC residue {dc:.1e}"),
    ))
}

fn segment_enumeration() -> Check {
    let cfg = TrainConfig::default();
    let env = enumerate_examples(0, 60 * 64, cfg.train_plan(64.0)).len();
    let ffr = enumerate_examples(0, 60 * 512, cfg.train_plan(512.0)).len();
    let long = enumerate_examples(0, 600 * 64, cfg.train_plan(64.0));
    let batches = balanced_batches(&long, 128, &mut ChaCha8Rng::seed_from_u64(8));
    let balanced = batches
        .iter()
        .all(|b| b.len() == 128 && b.iter().filter(|x| x.label == 1).count() == 64);
    Ok((
        env == 54 && ffr == 54 && balanced && !batches.is_empty(),
        format!(
            "60 s trial: {env} examples at 64 Hz, {ffr} at 512 Hz; {} batches all 64/64: {balanced}",
            batches.len()
        ),
    ))
}

/// Default synthetic corpus (plus one unseen competing trial per
/// participant) and a single envelope decoder trained on the quiet trials.
struct EnvelopeRun {
    model: DecoderParams,
    splits: Splits,
    competing: Vec<Trial>,
    cpu_seconds: f64,
}

fn envelope_run() -> Result<EnvelopeRun, String> {
    let cpu = cpu_seconds();
    let spec = SynthSpec {
        competing_trials: 1,
        ..Default::default()
    };
    let (competing, quiet): (Vec<Trial>, Vec<Trial>) = synth_trials(&spec)
        .map_err(e)?
        .into_iter()
        .map(|s| s.trial)
        .partition(|t| t.ignored().is_some());
    let splits = split_trials(&quiet, &SplitFractions::default(), true);
    let init = init_glorot(&DecoderConfig::new(Envelope), 0).map_err(e)?;
    let model = fit(&init, &splits.train, &splits.validation, &TrainConfig::default())
        .map_err(e)?
        .params;
    Ok(EnvelopeRun {
        model,
        competing: competing.iter().map(Trial::standardized).collect(),
        splits,
        cpu_seconds: cpu_seconds() - cpu,
    })
}

/// Six participants with aligned envelope and FFR trials, an FFR decoder
/// and 25 envelope decoders trained from different seeds.
struct PairedRun {
    env: Splits,
    ffr: Splits,
    ffr_model: DecoderParams,
    env_models: Vec<DecoderParams>,
}

fn paired_run() -> Result<PairedRun, String> {
    let spec = SynthSpec {
        participants: 6,
        minutes_per_trial: 5.0,
        kinds: vec![Envelope, EnvelopeModulations],
        seed: 1,
        ..Default::default()
    };
    let (env, ffr): (Vec<_>, Vec<_>) = synth_trials(&spec)
        .map_err(e)?
        .into_iter()
        .partition(|s| s.kind == Envelope);
    let split = |v: Vec<mmdec::data::SynthTrial>| {
        let trials: Vec<Trial> = v.into_iter().map(|s| s.trial).collect();
        split_trials(&trials, &SplitFractions::default(), true)
    };
    let (env, ffr) = (split(env), split(ffr));
    let init = init_glorot(&DecoderConfig::new(EnvelopeModulations), 1).map_err(e)?;
    let ffr_model = fit(&init, &ffr.train, &ffr.validation, &TrainConfig::default())
        .map_err(e)?
        .params;
    let env_models = (0..25u64)
        .map(|seed| {
            let cfg = TrainConfig {
                max_epochs: 6,
                seed,
                ..Default::default()
            };
            let init = init_glorot(&DecoderConfig::new(Envelope), 1000 + seed).map_err(e)?;
            Ok(fit(&init, &env.train, &env.validation, &cfg).map_err(e)?.params)
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(PairedRun {
        env,
        ffr,
        ffr_model,
        env_models,
    })
}

fn mm(seconds: f64) -> EvalSettings {
    EvalSettings::new(seconds, EvalMode::MatchMismatch)
}

fn synthetic_end_to_end(env: &Result<EnvelopeRun, String>, paired: &Result<PairedRun, String>) -> Check {
    let env = env.as_ref().map_err(Clone::clone)?;
    let paired = paired.as_ref().map_err(Clone::clone)?;
    let a = evaluate(&env.model, &env.splits.test, mm(3.0)).map_err(e)?.mean;
    let f = evaluate(&paired.ffr_model, &paired.ffr.test, mm(3.0)).map_err(e)?.mean;
    let minutes = env.cpu_seconds / 60.0;
    Ok((
        a >= 0.90 && minutes <= 30.0 && f >= 0.75,
        format!(
            "envelope {:.2}% held-out (20 x 10 min, {minutes:.1} CPU-min incl. synthesis); FFR {:.2}% (6 x 5 min)",
            100.0 * a,
            100.0 * f
        ),
    ))
}

fn ensembling(paired: &Result<PairedRun, String>) -> Check {
    let paired = paired.as_ref().map_err(Clone::clone)?;
    let preds = paired
        .env_models
        .iter()
        .map(|m| predict(m, &paired.env.test, mm(3.0)).map_err(e))
        .collect::<Result<Vec<_>, _>>()?;
    let ten = &preds[..10];
    let individual = ten.iter().map(|p| participant_average_accuracy(p)).sum::<f64>() / 10.0;
    let ensemble = participant_average_accuracy(&average_predictions(ten).map_err(e)?);
    let curve = bootstrap_averaging_curve(&preds, &[1, 2, 5, 10, 25], 50, 0).map_err(e)?;
    let table = curve_table(&curve).lines().skip(1).collect::<Vec<_>>().join("; ");
    Ok((
        ensemble >= individual - 0.001 && curve.len() == 5,
        format!(
            "10-instance average {:.2}% vs mean instance {:.2}%; curve (n mean min max): {table}",
            100.0 * ensemble,
            100.0 * individual
        ),
    ))
}

fn composite(paired: &Result<PairedRun, String>) -> Check {
    let paired = paired.as_ref().map_err(Clone::clone)?;
    let env_model = &paired.env_models[0];
    let run = |m: &DecoderParams, t: &[Trial]| predict(m, t, mm(3.0)).map_err(e);
    let lda = fit_composite(
        &run(&paired.ffr_model, &paired.ffr.validation)?,
        &run(env_model, &paired.env.validation)?,
    )
    .map_err(e)?;
    let (f, v) = (
        run(&paired.ffr_model, &paired.ffr.test)?,
        run(env_model, &paired.env.test)?,
    );
    let c = participant_average_accuracy(&apply_composite(&lda, &f, &v).map_err(e)?);
    let (fa, va) = (participant_average_accuracy(&f), participant_average_accuracy(&v));
    Ok((
        c >= fa.max(va) - 0.005,
        format!(
            "composite {:.2}% vs FFR {:.2}%, envelope {:.2}%; boundary {}",
            100.0 * c,
            100.0 * fa,
            100.0 * va,
            lda.describe()
        ),
    ))
}

fn correct(preds: &[ExamplePrediction]) -> usize {
    preds.iter().filter(|p| p.correct()).count()
}

fn attention(env: &Result<EnvelopeRun, String>) -> Check {
    let env = env.as_ref().map_err(Clone::clone)?;
    let settings = EvalSettings::new(3.0, EvalMode::Attention);
    let attended = predict(&env.model, &env.competing, settings).map_err(e)?;
    let swapped: Vec<Trial> = env
        .competing
        .iter()
        .map(|t| t.swap_streams())
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let ignored = predict(&env.model, &swapped, settings).map_err(e)?;
    let n = attended.len();
    let (_, hi) = random_classifier_interval(n as u64, 0.95).map_err(e)?;
    let a = accuracy(&attended);
    let complement = correct(&ignored) == n - correct(&attended);
    Ok((
        a > hi && complement,
        format!(
            "attention {:.2}% over {n} examples (chance upper bound {:.2}%); swapped {:.2}% = 1 - a: {complement}",
            100.0 * a,
            100.0 * hi,
            100.0 * accuracy(&ignored)
        ),
    ))
}

fn monotonicity(env: &Result<EnvelopeRun, String>) -> Check {
    let env = env.as_ref().map_err(Clone::clone)?;
    let accs = [3.0, 5.0, 10.0]
        .iter()
        .map(|&s| evaluate(&env.model, &env.splits.test, mm(s)).map(|r| r.mean).map_err(e))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((
        accs.windows(2).all(|w| w[1] >= w[0]),
        format!(
            "3 s {:.2}%, 5 s {:.2}%, 10 s {:.2}%",
            100.0 * accs[0],
            100.0 * accs[1],
            100.0 * accs[2]
        ),
    ))
}

fn cli(args: &[&str]) -> Result<(), String> {
    match mmdec_cli::run(std::iter::once("mmdec").chain(args.iter().copied())) {
        0 => Ok(()),
        code => Err(format!("mmdec {} exited with {code}", args.join(" "))),
    }
}

fn cli_chain(root: &Path) -> Result<(), String> {
    let s = |p: &Path| p.to_str().expect("utf-8 temp path").to_string();
    let data = s(&root.join("data"));
    let manifest = s(&root.join("data/manifest.json"));
    let cfg = root.join("run.toml");
    std::fs::write(&cfg, "max_epochs = 2\n").map_err(e)?;
    let cfg = s(&cfg);
    let runs = s(&root.join("runs"));
    let env0 = s(&root.join("runs/seed-000/best.mmd"));
    let env1 = s(&root.join("runs/seed-001/best.mmd"));
    let ffr = s(&root.join("runs/seed-009/best.mmd"));
    let out = |d: &str| s(&root.join(d));
    cli(&[
        "synth",
        "--out",
        &data,
        "--participants",
        "2",
        "--minutes",
        "2",
        "--kinds",
        "envelope,ffr",
        "--competing",
        "1",
        "--seed",
        "5",
    ])?;
    cli(&[
        "train",
        "--manifest",
        &manifest,
        "--seeds",
        "2",
        "--config",
        &cfg,
        "--out",
        &runs,
    ])?;
    cli(&[
        "train",
        "--manifest",
        &manifest,
        "--kind",
        "ffr",
        "--seed",
        "9",
        "--config",
        &cfg,
        "--out",
        &runs,
    ])?;
    cli(&[
        "evaluate",
        "--manifest",
        &manifest,
        "--checkpoint",
        &env0,
        "--segment-seconds",
        "3,5",
        "--out",
        &out("eval"),
    ])?;
    cli(&[
        "ensemble",
        "--manifest",
        &manifest,
        "--checkpoint",
        &env0,
        "--checkpoint",
        &env1,
        "--out",
        &out("ensemble"),
    ])?;
    cli(&[
        "composite",
        "--manifest",
        &manifest,
        "--envelope-checkpoint",
        &env0,
        "--ffr-checkpoint",
        &ffr,
        "--out",
        &out("composite"),
    ])?;
    cli(&[
        "report",
        "--run",
        &out("eval"),
        "--run",
        &out("ensemble"),
        "--run",
        &out("composite"),
        "--out",
        &out("report"),
    ])
}

/// Every regular file under `dir`, relative and sorted.
fn files(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = entry.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).expect("under dir").to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let a = tempfile::tempdir().map_err(e)?;
    let b = tempfile::tempdir().map_err(e)?;
    cli_chain(a.path())?;
    cli_chain(b.path())?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    if fa != fb {
        return Ok((false, "runs produced different file sets".into()));
    }
    let mut differing = Vec::new();
    for f in &fa {
        let x = std::fs::read(a.path().join(f)).map_err(e)?;
        let y = std::fs::read(b.path().join(f)).map_err(e)?;
        // Report tables name their run directories; compare relative to the root.
        let strip =
            |bytes: Vec<u8>, root: &Path| String::from_utf8_lossy(&bytes).replace(root.to_str().unwrap_or(""), "ROOT");
        if strip(x, a.path()) != strip(y, b.path()) {
            differing.push(f.display().to_string());
        }
    }
    let checkpoints = fa.iter().filter(|f| f.extension().is_some_and(|x| x == "mmd")).count();
    Ok((
        differing.is_empty() && checkpoints == 3,
        format!(
            "{} files ({checkpoints} checkpoints) compared; differing: {differing:?}",
            fa.len()
        ),
    ))
}

fn statistics_fixtures() -> Check {
    const X: [f64; 10] = [1.2, 2.3, 2.9, 4.1, 5.0, 5.8, 7.2, 8.1, 8.8, 10.3];
    const Y: [f64; 10] = [2.1, 2.0, 3.7, 3.9, 5.6, 4.8, 7.9, 7.1, 9.4, 9.0];
    const A: [f64; 8] = [76.1, 81.3, 79.4, 72.8, 84.0, 77.5, 80.2, 74.9];
    const B: [f64; 8] = [73.0, 80.1, 75.2, 73.5, 79.9, 74.8, 78.0, 71.6];
    const C: [f64; 7] = [64.2, 70.3, 59.8, 66.1, 62.7, 68.4, 61.5];
    let r = pearson_corr(&X, &Y, Tails::Two).map_err(e)?;
    let paired = t_test(&A, &B, true, Tails::Greater).map_err(e)?;
    let unpaired = t_test(&A, &C, false, Tails::Two).map_err(e)?;
    let got = [
        r.statistic,
        r.p_value,
        paired.statistic,
        paired.p_value,
        unpaired.statistic,
        unpaired.p_value,
    ];
    let want = [
        0.961_316_206_614_946_791_51,
        9.349_532_806_719_116_602_5e-6,
        4.370_302_908_416_328_540_6,
        0.001_636_426_064_288_733_414,
        7.059_118_996_508_431_085_9,
        8.553_959_350_775_163_650_8e-6,
    ];
    let worst = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    let bce = bce_loss(0.5f64, 1.0).map_err(e)?;
    Ok((
        worst < 1e-10 && bce == std::f64::consts::LN_2,
        format!(
            "max deviation {worst:.1e} from 50-digit references; BCE(0.5, 1) = {bce} (ln 2 = {})",
            std::f64::consts::LN_2
        ),
    ))
}

fn main() {
    let mut failed = 0;
    let mut report = |name: &str, f: &mut dyn FnMut() -> Check| {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(Ok(o)) => o,
            Ok(Err(err)) => (false, format!("error: {err}")),
            Err(_) => (false, "panicked".into()),
        };
        failed += usize::from(!outcome.0);
        let verdict = if outcome.0 { "PASS" } else { "FAIL" };
        println!(
            "{verdict} {name}: {} [{:.1} s]",
            outcome.1,
            start.elapsed().as_secs_f64()
        );
    };
    report("swap symmetry", &mut swap_symmetry);
    report("identical candidates", &mut identical_candidates);
    report("gradient oracle", &mut gradient_oracle);
    report("convolution oracle", &mut convolution_oracle);
    report("receptive field", &mut receptive_field_check);
    report("filter conformance", &mut filter_conformance);
    report("segment enumeration", &mut segment_enumeration);
    let env = catch_unwind(envelope_run).unwrap_or_else(|_| Err("envelope training panicked".into()));
    let paired = catch_unwind(paired_run).unwrap_or_else(|_| Err("paired training panicked".into()));
    report("synthetic end-to-end", &mut || synthetic_end_to_end(&env, &paired));
    report("ensembling", &mut || ensembling(&paired));
    report("composite", &mut || composite(&paired));
    report("attention mode", &mut || attention(&env));
    report("segment-length monotonicity", &mut || monotonicity(&env));
    report("determinism", &mut determinism);
    report("statistics fixtures", &mut statistics_fixtures);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
