//! `mmdec` command line: synthetic data, preprocessing, training and the
//! evaluation harness.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 on data
//! errors (unreadable, malformed or insufficient inputs).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use mmdec::analysis::{
    apply_composite, average_predictions, bootstrap_averaging_curve, curve_table, fit_composite, mode_name,
    participant_average_accuracy, predict, EvalMode, EvalReport, EvalSettings, ExamplePrediction,
};
use mmdec::data::{
    read_timeseries, split_trials, synth_generate, write_atomic, write_preprocessed, DatasetManifest, Portion,
    RunConfig, Stage, SynthSpec, Trial, TrialRecord,
};
use mmdec::eeg::{
    preprocess_envelope_pipeline, preprocess_ffr_pipeline, ChannelLayout, EegRecording, PreprocessConfig,
};
use mmdec::model::{init_glorot, load_checkpoint, DecoderParams};
use mmdec::signal::{
    extract_envelope, extract_envelope_modulations, resample, AudioWaveform, FeatureKind, ENVELOPE_INPUT_RATE,
};
use mmdec::train::{fine_tune, fit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mmdec", version, about = "Match-mismatch EEG decoders")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Run seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Run the preprocessing pipelines over a raw manifest.
    Preprocess(PreprocessArgs),
    /// Train population decoders, one per seed.
    Train(TrainArgs),
    /// Continue training a population decoder on one participant.
    Finetune(FinetuneArgs),
    /// Evaluate checkpoints (averaged when several are given).
    Evaluate(EvaluateArgs),
    /// Ensemble average and bootstrap averaging curve.
    Ensemble(EnsembleArgs),
    /// Fit an LDA composite of an FFR and an envelope decoder.
    Composite(CompositeArgs),
    /// Collect evaluation summaries into tables and curves.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    participants: Option<usize>,
    #[arg(long)]
    trials_per_participant: Option<usize>,
    #[arg(long)]
    minutes: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    /// Feature kinds to generate, comma separated.
    #[arg(long, value_delimiter = ',')]
    kinds: Vec<FeatureKind>,
    /// Competing-speaker trials per participant.
    #[arg(long)]
    competing: Option<usize>,
    #[arg(long)]
    gain_ratio: Option<f64>,
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    /// Raw-stage manifest.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "envelope")]
    kinds: Vec<FeatureKind>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Number of independently initialised decoders.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Feature kind (overrides the config file).
    #[arg(long)]
    kind: Option<FeatureKind>,
}

#[derive(Debug, Args)]
struct FinetuneArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    participant: String,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, required = true)]
    checkpoint: Vec<PathBuf>,
    #[arg(long, default_value = "match_mismatch")]
    mode: EvalMode,
    /// Segment lengths in seconds (default: from the config).
    #[arg(long, value_delimiter = ',')]
    segment_seconds: Vec<f64>,
    #[arg(long, default_value = "test")]
    portion: PortionArg,
    /// Only evaluate trials of this participant.
    #[arg(long)]
    participant: Option<String>,
    /// Row label in the summary (default: the feature kind).
    #[arg(long)]
    label: Option<String>,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, required = true)]
    checkpoint: Vec<PathBuf>,
    #[arg(long)]
    segment_seconds: Option<f64>,
}

#[derive(Debug, Args)]
struct CompositeArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    envelope_checkpoint: PathBuf,
    #[arg(long)]
    ffr_checkpoint: PathBuf,
    #[arg(long)]
    segment_seconds: Option<f64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directories holding `summary.tsv` files.
    #[arg(long = "run", required = true)]
    runs: Vec<PathBuf>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum PortionArg {
    Train,
    Validation,
    Test,
    All,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl From<mmdec::Error> for CliError {
    fn from(e: mmdec::Error) -> Self {
        match e {
            mmdec::Error::Config(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Data(m)) => {
            eprintln!("error: {m}");
            EXIT_DATA
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = resolve_config(&cli.common)?;
    let out = cli
        .common
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("--out is required".into()))?;
    std::fs::create_dir_all(&out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    match cli.command {
        Command::Synth(a) => cmd_synth(&a, &cfg, &out),
        Command::Preprocess(a) => cmd_preprocess(&a, &cfg, &out),
        Command::Train(a) => cmd_train(&a, &cfg, &out),
        Command::Finetune(a) => cmd_finetune(&a, &cfg, &out),
        Command::Evaluate(a) => cmd_evaluate(&a, &cfg, &out),
        Command::Ensemble(a) => cmd_ensemble(&a, &cfg, &out),
        Command::Composite(a) => cmd_composite(&a, &cfg, &out),
        Command::Report(a) => cmd_report(&a, &out),
    }
}

fn resolve_config(common: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::read(p).map_err(|e| CliError::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    Ok(write_atomic(path, text.as_bytes())?)
}

fn read_manifest(path: &Path) -> CliResult<(DatasetManifest, PathBuf)> {
    let m = DatasetManifest::read(path).map_err(|e| CliError::Data(e.to_string()))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((m, base))
}

fn load_kind(manifest: &Path, kind: FeatureKind) -> CliResult<Vec<Trial>> {
    let (m, base) = read_manifest(manifest)?;
    let trials = m.load_trials(&base, kind)?;
    if trials.is_empty() {
        return Err(CliError::Data(format!(
            "{} has no preprocessed {kind} trials",
            manifest.display()
        )));
    }
    Ok(trials)
}

fn portion_of(trials: &[Trial], cfg: &RunConfig, portion: PortionArg) -> Vec<Trial> {
    let s = split_trials(trials, &cfg.split(), cfg.standardize);
    match portion {
        PortionArg::Train => s.train,
        PortionArg::Validation => s.validation,
        PortionArg::Test => s.test,
        PortionArg::All => trials
            .iter()
            .map(|t| {
                let t = if cfg.standardize { t.standardized() } else { t.clone() };
                t.portion(Portion::All, &cfg.split())
            })
            .collect(),
    }
}

fn load_checkpoints(paths: &[PathBuf]) -> CliResult<Vec<DecoderParams<f32>>> {
    let models: Vec<DecoderParams<f32>> = paths.iter().map(|p| load_checkpoint(p)).collect::<Result<_, _>>()?;
    let kind = models[0].config().feature_kind;
    if models.iter().any(|m| m.config().feature_kind != kind) {
        return Err(CliError::Usage("checkpoints mix feature kinds".into()));
    }
    Ok(models)
}

fn cmd_synth(a: &SynthArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let d = SynthSpec::default();
    let spec = SynthSpec {
        participants: a.participants.unwrap_or(d.participants),
        trials_per_participant: a.trials_per_participant.unwrap_or(d.trials_per_participant),
        minutes_per_trial: a.minutes.unwrap_or(d.minutes_per_trial),
        snr_db: a.snr_db.unwrap_or(d.snr_db),
        kinds: if a.kinds.is_empty() { d.kinds } else { a.kinds.clone() },
        competing_trials: a.competing.unwrap_or(d.competing_trials),
        gain_ratio: a.gain_ratio.unwrap_or(d.gain_ratio),
        seed: cfg.seed,
    };
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let m = synth_generate(&spec, out)?;
    info!("wrote {} trials to {}", m.trials.len(), out.display());
    Ok(())
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_audio(path: &Path) -> CliResult<AudioWaveform> {
    let ts = read_timeseries(path)?;
    if ts.data.len() != 1 {
        return Err(CliError::Data(format!(
            "{}: audio must have one channel",
            path.display()
        )));
    }
    let samples = ts.data[0].iter().map(|&v| f64::from(v)).collect();
    Ok(AudioWaveform::new(samples, ts.rate)?)
}

fn audio_feature(audio: &AudioWaveform, kind: FeatureKind) -> CliResult<Vec<f32>> {
    let feature = match kind {
        FeatureKind::Envelope if audio.rate() != ENVELOPE_INPUT_RATE => {
            let up = resample(audio.samples(), audio.rate(), ENVELOPE_INPUT_RATE)?;
            extract_envelope(&AudioWaveform::new(up, ENVELOPE_INPUT_RATE)?)?
        }
        FeatureKind::Envelope => extract_envelope(audio)?,
        FeatureKind::EnvelopeModulations => extract_envelope_modulations(audio)?,
    };
    Ok(feature.samples().iter().map(|&v| v as f32).collect())
}

fn preprocess_record(
    r: &TrialRecord,
    base: &Path,
    kind: FeatureKind,
    pcfg: &PreprocessConfig,
    out: &Path,
) -> CliResult<TrialRecord> {
    let eeg_path = resolve(base, &r.eeg_path);
    let ts = read_timeseries(&eeg_path)?;
    let layout = ChannelLayout::from_labels(&ts.channel_names)?;
    let data = ts
        .data
        .iter()
        .map(|c| c.iter().map(|&v| f64::from(v)).collect())
        .collect();
    let rec = EegRecording::new(data, ts.rate, layout)?.with_ids(&r.participant_id, &r.trial_id);
    let clean = match kind {
        FeatureKind::Envelope => preprocess_envelope_pipeline(&rec, pcfg)?,
        FeatureKind::EnvelopeModulations => preprocess_ffr_pipeline(&rec, pcfg)?,
    };
    let audio_path = r.audio_path.as_deref().expect("validated raw record");
    let mut stim = audio_feature(&read_audio(&resolve(base, audio_path))?, kind)?;
    let mut ignored = match &r.ignored_audio_path {
        Some(p) => Some(audio_feature(&read_audio(&resolve(base, p))?, kind)?),
        None => None,
    };
    let n = ignored
        .as_ref()
        .map_or(usize::MAX, Vec::len)
        .min(stim.len())
        .min(clean.samples());
    stim.truncate(n);
    if let Some(i) = ignored.as_mut() {
        i.truncate(n);
    }
    let eeg: Vec<Vec<f32>> = clean
        .data()
        .iter()
        .map(|c| c[..n].iter().map(|&v| v as f32).collect())
        .collect();
    let mut trial = Trial::new(&r.participant_id, &r.trial_id, clean.rate(), eeg, stim)
        .map_err(|e| CliError::Data(format!("{}: {e}", eeg_path.display())))?
        .with_condition(r.condition.clone());
    if let Some(i) = ignored {
        trial = trial.with_ignored(i)?;
    }
    Ok(write_preprocessed(
        out,
        kind,
        &trial,
        clean.layout().names(),
        r.narrator,
    )?)
}

fn cmd_preprocess(a: &PreprocessArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let (m, base) = read_manifest(&a.manifest)?;
    let pcfg = PreprocessConfig {
        glitch_threshold: cfg.glitch_threshold_volts,
        frontal_factor: cfg.frontal_factor,
        frontal_channels: cfg.frontal_channels.clone(),
        target_layout: Some(ChannelLayout::biosemi64()),
    };
    let mut records = Vec::new();
    for r in m.trials.iter().filter(|r| r.stage == Stage::Raw) {
        for &kind in &a.kinds {
            info!("preprocessing {} for {kind}", r.trial_id);
            records.push(preprocess_record(r, &base, kind, &pcfg, out)?);
        }
    }
    if records.is_empty() {
        return Err(CliError::Data(format!("{} has no raw trials", a.manifest.display())));
    }
    let manifest = DatasetManifest {
        name: format!("{}-preprocessed", m.name),
        split: m.split,
        trials: records,
    };
    manifest.write(&out.join("manifest.json"))?;
    Ok(())
}

fn train_one(
    cfg: &RunConfig,
    train: &[Trial],
    val: &[Trial],
    init: Option<&DecoderParams<f32>>,
    dir: &Path,
) -> CliResult<()> {
    let fresh;
    let start = match init {
        Some(p) => p,
        None => {
            fresh = init_glorot(&cfg.decoder_config(), cfg.seed)?;
            &fresh
        }
    };
    let result = match init {
        Some(_) => fine_tune(start, train, val, &cfg.train_config())?,
        None => fit(start, train, val, &cfg.train_config())?,
    };
    result.write_run_dir(dir, &cfg.to_toml())?;
    info!(
        "{}: {} epochs, best epoch {:?}",
        dir.display(),
        result.history.len(),
        result.best_epoch
    );
    Ok(())
}

fn cmd_train(a: &TrainArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let mut cfg = cfg.clone();
    if let Some(k) = a.kind {
        cfg.feature_kind = k;
    }
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be positive".into()));
    }
    let trials = load_kind(&a.manifest, cfg.feature_kind)?;
    let s = split_trials(&trials, &cfg.split(), cfg.standardize);
    let base_seed = cfg.seed;
    for i in 0..a.seeds {
        cfg.seed = base_seed + i;
        train_one(
            &cfg,
            &s.train,
            &s.validation,
            None,
            &out.join(format!("seed-{:03}", cfg.seed)),
        )?;
    }
    Ok(())
}

fn cmd_finetune(a: &FinetuneArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let population = load_checkpoint(&a.checkpoint)?;
    let mut cfg = cfg.clone();
    cfg.feature_kind = population.config().feature_kind;
    let trials: Vec<Trial> = load_kind(&a.manifest, cfg.feature_kind)?
        .into_iter()
        .filter(|t| t.participant_id == a.participant)
        .collect();
    if trials.is_empty() {
        return Err(CliError::Data(format!("no trials for participant {}", a.participant)));
    }
    let s = split_trials(&trials, &cfg.split(), cfg.standardize);
    train_one(&cfg, &s.train, &s.validation, Some(&population), out)
}

/// Predictions of each model on `trials`, in the same example order.
fn predictions(
    models: &[DecoderParams<f32>],
    trials: &[Trial],
    settings: EvalSettings,
) -> CliResult<Vec<Vec<ExamplePrediction>>> {
    models
        .iter()
        .map(|m| predict(m, trials, settings).map_err(CliError::from))
        .collect()
}

fn summary_header() -> String {
    "label\tmode\tsegment_s\tmean\tmargin\tparticipants\n".to_string()
}

fn summary_row(r: &EvalReport) -> String {
    format!(
        "{}\t{}\t{}\t{:.6}\t{:.6}\t{}\n",
        r.label,
        mode_name(r.mode),
        r.segment_seconds,
        r.mean,
        r.margin,
        r.participant_accuracies.len()
    )
}

fn cmd_evaluate(a: &EvaluateArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let models = load_checkpoints(&a.checkpoint)?;
    let kind = models[0].config().feature_kind;
    let mut trials = load_kind(&a.manifest, kind)?;
    if let Some(p) = &a.participant {
        trials.retain(|t| &t.participant_id == p);
    }
    if a.mode == EvalMode::Attention {
        trials.retain(|t| t.ignored().is_some());
    }
    if trials.is_empty() {
        return Err(CliError::Data("no trials to evaluate".into()));
    }
    let trials = portion_of(&trials, cfg, a.portion);
    let segments = if a.segment_seconds.is_empty() {
        cfg.eval_segment_seconds.clone()
    } else {
        a.segment_seconds.clone()
    };
    let label = a.label.clone().unwrap_or_else(|| kind.to_string());
    let mut summary = summary_header();
    for &seg in &segments {
        let settings = EvalSettings::new(seg, a.mode);
        let per_model = predictions(&models, &trials, settings)?;
        let preds = if per_model.len() == 1 {
            per_model.into_iter().next().expect("one model")
        } else {
            average_predictions(&per_model)?
        };
        let report = EvalReport::from_predictions(&label, &preds, seg, a.mode)?;
        write_text(
            &out.join(format!("eval-{}-{seg}s.tsv", mode_name(a.mode))),
            &report.to_tsv(),
        )?;
        println!("{}", report.summary_line());
        summary.push_str(&summary_row(&report));
    }
    write_text(&out.join("summary.tsv"), &summary)
}

fn cmd_ensemble(a: &EnsembleArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let models = load_checkpoints(&a.checkpoint)?;
    let kind = models[0].config().feature_kind;
    let trials = portion_of(&load_kind(&a.manifest, kind)?, cfg, PortionArg::Test);
    let seg = a.segment_seconds.unwrap_or(cfg.segment_seconds);
    let settings = EvalSettings::new(seg, EvalMode::MatchMismatch);
    let per_model = predictions(&models, &trials, settings)?;

    let mut table = String::from("instance\tcheckpoint\taccuracy\n");
    let mut accs = Vec::new();
    for (i, (p, path)) in per_model.iter().zip(&a.checkpoint).enumerate() {
        let acc = participant_average_accuracy(p);
        accs.push(acc);
        let _ = writeln!(table, "{i}\t{}\t{acc:.6}", path.display());
    }
    let averaged = average_predictions(&per_model)?;
    let ens = participant_average_accuracy(&averaged);
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let _ = writeln!(table, "mean\t-\t{mean:.6}");
    let _ = writeln!(table, "ensemble\t-\t{ens:.6}");
    write_text(&out.join("ensemble.tsv"), &table)?;

    let sizes: Vec<usize> = cfg
        .ensemble_sizes
        .iter()
        .copied()
        .filter(|&n| n <= models.len())
        .collect();
    if sizes.len() < cfg.ensemble_sizes.len() {
        warn!("only {} instances; curve limited to sizes {sizes:?}", models.len());
    }
    let curve = bootstrap_averaging_curve(&per_model, &sizes, cfg.ensemble_draws, cfg.seed)?;
    write_text(&out.join("ensemble_curve.txt"), &curve_table(&curve))?;

    let label = format!("{kind}-ensemble{}", models.len());
    let report = EvalReport::from_predictions(&label, &averaged, seg, EvalMode::MatchMismatch)?;
    println!("{}", report.summary_line());
    write_text(&out.join("summary.tsv"), &(summary_header() + &summary_row(&report)))
}

fn cmd_composite(a: &CompositeArgs, cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let env = load_checkpoint(&a.envelope_checkpoint)?;
    let ffr = load_checkpoint(&a.ffr_checkpoint)?;
    if env.config().feature_kind != FeatureKind::Envelope
        || ffr.config().feature_kind != FeatureKind::EnvelopeModulations
    {
        return Err(CliError::Usage(
            "expected an envelope and a modulations checkpoint".into(),
        ));
    }
    let seg = a.segment_seconds.unwrap_or(cfg.segment_seconds);
    let settings = EvalSettings::new(seg, EvalMode::MatchMismatch);
    let env_trials = load_kind(&a.manifest, FeatureKind::Envelope)?;
    let ffr_trials = load_kind(&a.manifest, FeatureKind::EnvelopeModulations)?;
    let run = |m: &DecoderParams<f32>, t: &[Trial], p: PortionArg| predict(m, &portion_of(t, cfg, p), settings);

    let lda = fit_composite(
        &run(&ffr, &ffr_trials, PortionArg::Validation)?,
        &run(&env, &env_trials, PortionArg::Validation)?,
    )?;
    let test_env = run(&env, &env_trials, PortionArg::Test)?;
    let test_ffr = run(&ffr, &ffr_trials, PortionArg::Test)?;
    let comp = apply_composite(&lda, &test_ffr, &test_env)?;

    let mut summary = summary_header();
    let mut text = format!("{}\n", lda.describe());
    for (label, preds) in [("envelope", &test_env), ("ffr", &test_ffr), ("composite", &comp)] {
        let r = EvalReport::from_predictions(label, preds, seg, EvalMode::MatchMismatch)?;
        println!("{}", r.summary_line());
        let _ = writeln!(text, "{}", r.summary_line());
        summary.push_str(&summary_row(&r));
    }
    println!("{}", lda.describe());
    write_text(&out.join("composite.txt"), &text)?;
    write_text(&out.join("summary.tsv"), &summary)
}

#[derive(Debug)]
struct SummaryRow {
    run: String,
    label: String,
    mode: String,
    segment: f64,
    mean: f64,
    margin: f64,
    participants: String,
}

fn read_summary(dir: &Path) -> CliResult<Vec<SummaryRow>> {
    let path = dir.join("summary.tsv");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let bad = |line: usize| CliError::Data(format!("{}:{line}: malformed summary row", path.display()));
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 6 {
                return Err(bad(i + 1));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1));
            Ok(SummaryRow {
                run: dir.display().to_string(),
                label: f[0].to_string(),
                mode: f[1].to_string(),
                segment: num(f[2])?,
                mean: num(f[3])?,
                margin: num(f[4])?,
                participants: f[5].to_string(),
            })
        })
        .collect()
}

fn cmd_report(a: &ReportArgs, out: &Path) -> CliResult<()> {
    let mut rows = Vec::new();
    for dir in &a.runs {
        rows.extend(read_summary(dir)?);
    }
    let mut table = format!(
        "{:<32} {:<24} {:<15} {:>9} {:>16} {:>12}\n",
        "run", "label", "mode", "segment_s", "accuracy_%", "participants"
    );
    let mut curves: BTreeMap<(String, String, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        let _ = writeln!(
            table,
            "{:<32} {:<24} {:<15} {:>9} {:>16} {:>12}",
            r.run,
            r.label,
            r.mode,
            r.segment,
            format!("{:.2} ± {:.2}", 100.0 * r.mean, 100.0 * r.margin),
            r.participants
        );
        curves
            .entry((r.run.clone(), r.label.clone(), r.mode.clone()))
            .or_default()
            .push((r.segment, r.mean));
    }
    let mut curve = String::from("# run label mode segment_s accuracy\n");
    for ((run, label, mode), points) in &mut curves {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (s, m) in points.iter() {
            let _ = writeln!(curve, "{run} {label} {mode} {s} {m:.6}");
        }
    }
    print!("{table}");
    write_text(&out.join("report.txt"), &table)?;
    write_text(&out.join("segment_curve.txt"), &curve)
}
