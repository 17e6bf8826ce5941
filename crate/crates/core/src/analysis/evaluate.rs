use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::mean_with_margin;
use crate::data::Trial;
use crate::error::{Error, Result};
use crate::model::{receptive_field, DecoderParams};
use crate::train::{enumerate_examples, SegmentPlan};

/// How candidate pairs are formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Matched segment against the segment starting one gap after it ends.
    MatchMismatch,
    /// Attended stream against the time-aligned ignored stream.
    Attention,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "match_mismatch" | "match-mismatch" => Ok(Self::MatchMismatch),
            "attention" => Ok(Self::Attention),
            other => Err(Error::InvalidArgument(format!("unknown evaluation mode {other}"))),
        }
    }
}

/// Decoder output for one evaluation example. The first candidate is
/// always the correct one, so a prediction is correct when `p > 0.5`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExamplePrediction {
    pub participant: String,
    pub trial: String,
    pub condition: String,
    pub onset_seconds: f64,
    pub probability: f64,
}

impl ExamplePrediction {
    pub fn correct(&self) -> bool {
        self.probability > 0.5
    }
}

/// Evaluation geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalSettings {
    pub segment_seconds: f64,
    pub stride_seconds: f64,
    pub gap_seconds: f64,
    pub mode: EvalMode,
}

impl EvalSettings {
    pub fn new(segment_seconds: f64, mode: EvalMode) -> Self {
        Self {
            segment_seconds,
            stride_seconds: 1.0,
            gap_seconds: 1.0,
            mode,
        }
    }

    fn plan(&self, rate: f64) -> SegmentPlan {
        let plan = SegmentPlan::from_seconds(self.segment_seconds, self.stride_seconds, self.gap_seconds, rate);
        match self.mode {
            // Only the aligned window is needed.
            EvalMode::Attention => SegmentPlan { gap: 0, ..plan },
            EvalMode::MatchMismatch => plan,
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Runs `decoder` over every evaluation example of `trials`, in trial order.
pub fn predict(
    decoder: &DecoderParams<f32>,
    trials: &[Trial],
    settings: EvalSettings,
) -> Result<Vec<ExamplePrediction>> {
    let rf = receptive_field(decoder.config());
    let mut jobs = Vec::new();
    for (i, t) in trials.iter().enumerate() {
        let plan = settings.plan(t.rate());
        if plan.len < rf.samples {
            return Err(Error::TooShort {
                required: rf.samples,
                actual: plan.len,
            });
        }
        if settings.mode == EvalMode::Attention && t.ignored().is_none() {
            return Err(Error::InvalidArgument(format!(
                "attention evaluation needs competing trials; {} has one stream",
                t.trial_id
            )));
        }
        let examples = match settings.mode {
            EvalMode::MatchMismatch => enumerate_examples(i, t.samples(), plan),
            // Attention windows need only `len` samples.
            EvalMode::Attention => enumerate_examples(i, t.samples() + plan.len, plan),
        };
        jobs.extend(examples);
    }
    jobs.par_iter()
        .map(|ex| {
            let t = &trials[ex.trial];
            let eeg = t.eeg_segment(ex.matched_onset, ex.len);
            let a = t.stimulus_segment(ex.matched_onset, ex.len);
            let b = match settings.mode {
                EvalMode::MatchMismatch => t.stimulus_segment(ex.mismatched_onset, ex.len),
                EvalMode::Attention => t.ignored_segment(ex.matched_onset, ex.len).expect("checked above"),
            };
            let out = decoder.forward(&eeg, &a, &b)?;
            Ok(ExamplePrediction {
                participant: t.participant_id.clone(),
                trial: t.trial_id.clone(),
                condition: t.condition.label(),
                onset_seconds: ex.matched_onset as f64 / t.rate(),
                // From the logit in double precision so that `p > 0.5`
                // coincides with a positive logit.
                probability: sigmoid(out.logit as f64),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticipantAccuracy {
    pub participant: String,
    pub condition: String,
    pub accuracy: f64,
    pub examples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub label: String,
    pub mode: EvalMode,
    pub segment_seconds: f64,
    /// One row per participant per condition.
    pub rows: Vec<ParticipantAccuracy>,
    /// Participant-average accuracy (over all conditions pooled).
    pub mean: f64,
    /// 95% t-interval half-width across participants.
    pub margin: f64,
    pub participant_accuracies: Vec<(String, f64)>,
}

impl EvalReport {
    pub fn from_predictions(
        label: &str,
        preds: &[ExamplePrediction],
        segment_seconds: f64,
        mode: EvalMode,
    ) -> Result<Self> {
        if preds.is_empty() {
            return Err(Error::InsufficientData("no evaluation examples".into()));
        }
        let mut by_cond: BTreeMap<(String, String), (usize, usize)> = BTreeMap::new();
        let mut by_part: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        for p in preds {
            let c = u8::from(p.correct()) as usize;
            let e = by_cond.entry((p.participant.clone(), p.condition.clone())).or_default();
            e.0 += c;
            e.1 += 1;
            let e = by_part.entry(p.participant.clone()).or_default();
            e.0 += c;
            e.1 += 1;
        }
        let rows = by_cond
            .into_iter()
            .map(|((participant, condition), (ok, n))| ParticipantAccuracy {
                participant,
                condition,
                accuracy: ok as f64 / n as f64,
                examples: n,
            })
            .collect();
        let participant_accuracies: Vec<(String, f64)> = by_part
            .into_iter()
            .map(|(k, (ok, n))| (k, ok as f64 / n as f64))
            .collect();
        let accs: Vec<f64> = participant_accuracies.iter().map(|(_, a)| *a).collect();
        let (mean, margin) = mean_with_margin(&accs, 0.95);
        Ok(Self {
            label: label.to_string(),
            mode,
            segment_seconds,
            rows,
            mean,
            margin,
            participant_accuracies,
        })
    }

    /// Tab-separated rows: participant, condition, segment, mode, accuracy, n.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("participant\tcondition\tsegment_s\tmode\taccuracy\texamples\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{:.6}\t{}",
                r.participant,
                r.condition,
                self.segment_seconds,
                mode_name(self.mode),
                r.accuracy,
                r.examples
            );
        }
        s
    }

    /// One summary line: `label  mean ± margin %`.
    pub fn summary_line(&self) -> String {
        format!(
            "{:<24} {:>6.2} ± {:.2} %  ({} s, {}, {} participants)",
            self.label,
            100.0 * self.mean,
            100.0 * self.margin,
            self.segment_seconds,
            mode_name(self.mode),
            self.participant_accuracies.len()
        )
    }
}

pub fn mode_name(mode: EvalMode) -> &'static str {
    match mode {
        EvalMode::MatchMismatch => "match_mismatch",
        EvalMode::Attention => "attention",
    }
}

/// Predicts and summarises in one go.
pub fn evaluate(decoder: &DecoderParams<f32>, trials: &[Trial], settings: EvalSettings) -> Result<EvalReport> {
    let preds = predict(decoder, trials, settings)?;
    EvalReport::from_predictions(
        &decoder.config().feature_kind.to_string(),
        &preds,
        settings.segment_seconds,
        settings.mode,
    )
}

/// Fraction of correct predictions.
pub fn accuracy(preds: &[ExamplePrediction]) -> f64 {
    preds.iter().filter(|p| p.correct()).count() as f64 / preds.len().max(1) as f64
}
