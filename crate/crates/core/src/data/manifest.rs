use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::synth::{synth_trials, Narrator, SynthSpec, SynthTrial};
use super::timeseries::{read_timeseries, write_atomic, write_timeseries};
use super::{Condition, SplitFractions, Trial};
use crate::eeg::layout::BIOSEMI64;
use crate::error::{Error, Result};
use crate::signal::FeatureKind;

/// Processing stage of a trial's files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// EEG at the acquisition rate plus audio (or a feature) to preprocess.
    Raw,
    /// EEG and feature at the decoder rate.
    Preprocessed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub participant_id: String,
    pub trial_id: String,
    pub stage: Stage,
    /// Feature carried by `feature_path` (preprocessed stage).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_kind: Option<FeatureKind>,
    pub eeg_path: PathBuf,
    /// Audio waveform (raw stage) for the attended or only stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ignored_audio_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ignored_feature_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub narrator: Option<Narrator>,
    pub condition: Condition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub split: SplitFractions,
    pub trials: Vec<TrialRecord>,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        let mut seen = std::collections::HashSet::new();
        for r in &self.trials {
            let key = (r.trial_id.clone(), r.feature_kind.map(FeatureKind::code));
            if !seen.insert(key) {
                return Err(Error::Config(format!("duplicate trial id {}", r.trial_id)));
            }
            let competing = r.condition == Condition::Competing;
            let second = match r.stage {
                Stage::Raw => r.ignored_audio_path.is_some(),
                Stage::Preprocessed => r.ignored_feature_path.is_some(),
            };
            if competing != second {
                return Err(Error::Config(format!(
                    "trial {}: competing trials need exactly two streams",
                    r.trial_id
                )));
            }
            if r.stage == Stage::Preprocessed && (r.feature_kind.is_none() || r.feature_path.is_none()) {
                return Err(Error::Config(format!(
                    "trial {}: preprocessed trials need a feature kind and path",
                    r.trial_id
                )));
            }
            if r.stage == Stage::Raw && r.audio_path.is_none() {
                return Err(Error::Config(format!("trial {}: raw trials need audio", r.trial_id)));
            }
        }
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        m.validate().map_err(|e| Error::format(path, e.to_string()))?;
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        write_atomic(path, format!("{text}\n").as_bytes())
    }

    /// Loads the preprocessed trials of one feature kind. Relative paths
    /// resolve against `base` (the manifest's directory).
    pub fn load_trials(&self, base: &Path, kind: FeatureKind) -> Result<Vec<Trial>> {
        self.trials
            .iter()
            .filter(|r| r.stage == Stage::Preprocessed && r.feature_kind == Some(kind))
            .map(|r| load_record(r, base))
            .collect()
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn single_channel(path: &Path) -> Result<(f64, Vec<f32>)> {
    let ts = read_timeseries(path)?;
    if ts.data.len() != 1 {
        return Err(Error::format(
            path,
            format!("expected 1 channel, found {}", ts.data.len()),
        ));
    }
    Ok((ts.rate, ts.data.into_iter().next().expect("one channel")))
}

pub fn load_record(r: &TrialRecord, base: &Path) -> Result<Trial> {
    let eeg_path = resolve(base, &r.eeg_path);
    let eeg = read_timeseries(&eeg_path)?;
    let feat_path = resolve(
        base,
        r.feature_path
            .as_deref()
            .ok_or_else(|| Error::Config("missing feature path".into()))?,
    );
    let (rate, stim) = single_channel(&feat_path)?;
    if rate != eeg.rate {
        return Err(Error::format(
            &feat_path,
            format!("feature at {rate} Hz, EEG at {} Hz", eeg.rate),
        ));
    }
    let mut trial = Trial::new(&r.participant_id, &r.trial_id, rate, eeg.data, stim)
        .map_err(|e| Error::format(&eeg_path, e.to_string()))?
        .with_condition(r.condition.clone());
    trial.pitch_hz = r.narrator.map(|n| n.mean_pitch_hz);
    if let Some(p) = &r.ignored_feature_path {
        let p = resolve(base, p);
        let (_, ign) = single_channel(&p)?;
        trial = trial.with_ignored(ign).map_err(|e| Error::format(&p, e.to_string()))?;
    }
    Ok(trial)
}

/// Stores one preprocessed trial next to the manifest and returns its record.
pub fn write_preprocessed(
    dir: &Path,
    kind: FeatureKind,
    trial: &Trial,
    channel_names: &[String],
    narrator: Option<Narrator>,
) -> Result<TrialRecord> {
    let stem = format!("{}.{}", trial.trial_id, kind.name());
    let eeg_rel = PathBuf::from(format!("{stem}.eeg.ts"));
    let feat_rel = PathBuf::from(format!("{stem}.feature.ts"));
    write_timeseries(&dir.join(&eeg_rel), &trial.eeg_rows(), trial.rate(), channel_names)?;
    write_timeseries(
        &dir.join(&feat_rel),
        &[trial.stimulus().to_vec()],
        trial.rate(),
        &[kind.name().to_string()],
    )?;
    let ignored_feature_path = match trial.ignored() {
        Some(ign) => {
            let rel = PathBuf::from(format!("{stem}.ignored.ts"));
            write_timeseries(
                &dir.join(&rel),
                &[ign.to_vec()],
                trial.rate(),
                &[kind.name().to_string()],
            )?;
            Some(rel)
        }
        None => None,
    };
    Ok(TrialRecord {
        participant_id: trial.participant_id.clone(),
        trial_id: trial.trial_id.clone(),
        stage: Stage::Preprocessed,
        feature_kind: Some(kind),
        eeg_path: eeg_rel,
        audio_path: None,
        ignored_audio_path: None,
        feature_path: Some(feat_rel),
        ignored_feature_path,
        narrator,
        condition: trial.condition.clone(),
    })
}

/// Generates a synthetic dataset into `dir` and writes `manifest.json`.
pub fn synth_generate(spec: &SynthSpec, dir: &Path) -> Result<DatasetManifest> {
    let names: Vec<String> = BIOSEMI64.iter().map(|s| s.to_string()).collect();
    let trials = synth_trials(spec)?;
    let records = trials
        .iter()
        .map(|SynthTrial { kind, trial, narrator }| write_preprocessed(dir, *kind, trial, &names, Some(*narrator)))
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        name: format!("synthetic-seed{}", spec.seed),
        split: SplitFractions::default(),
        trials: records,
    };
    manifest.write(&dir.join("manifest.json"))?;
    Ok(manifest)
}
