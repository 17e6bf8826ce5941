use serde::{Deserialize, Serialize};

use crate::autodiff::Tensor;
use crate::error::{Error, Result};

/// Listening condition of a trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    Quiet,
    Noise { snr_db: f64 },
    Foreign,
    Competing,
}

impl Condition {
    pub fn label(&self) -> String {
        match self {
            Condition::Quiet => "quiet".into(),
            Condition::Noise { snr_db } => format!("noise_{snr_db}dB"),
            Condition::Foreign => "foreign".into(),
            Condition::Competing => "competing".into(),
        }
    }
}

/// One preprocessed trial at the decoder rate: EEG plus the aligned
/// stimulus feature (and the ignored stream for competing speakers).
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub participant_id: String,
    pub trial_id: String,
    pub condition: Condition,
    /// Mean pitch of the narrator, when known.
    pub pitch_hz: Option<f64>,
    rate: f64,
    channels: usize,
    /// Channel-major `[channels × samples]`.
    eeg: Vec<f32>,
    stimulus: Vec<f32>,
    ignored: Option<Vec<f32>>,
}

/// Which portion of a trial to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Portion {
    Train,
    Validation,
    Test,
    All,
}

/// Fractions of each trial given to training, validation and test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.validation, self.test];
        if all.iter().any(|f| !(0.0..=1.0).contains(f)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must be in [0, 1] and sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }

    /// Sample ranges of the three portions for a trial of `samples` at
    /// `rate`. Boundaries fall on whole seconds; leftover samples go to test.
    pub fn ranges(&self, samples: usize, rate: f64) -> [std::ops::Range<usize>; 3] {
        let per_sec = rate.round() as usize;
        let secs = samples / per_sec.max(1);
        let train_s = (self.train * secs as f64).round() as usize;
        let val_s = ((self.validation * secs as f64).round() as usize).min(secs - train_s.min(secs));
        let a = (train_s * per_sec).min(samples);
        let b = ((train_s + val_s) * per_sec).min(samples);
        [0..a, a..b, b..samples]
    }
}

impl Trial {
    pub fn new(
        participant_id: impl Into<String>,
        trial_id: impl Into<String>,
        rate: f64,
        eeg: Vec<Vec<f32>>,
        stimulus: Vec<f32>,
    ) -> Result<Self> {
        let n = stimulus.len();
        if eeg.is_empty() {
            return Err(Error::Shape("trial without EEG channels".into()));
        }
        if let Some(c) = eeg.iter().position(|c| c.len() != n) {
            return Err(Error::Shape(format!(
                "EEG channel {c} has {} samples, stimulus has {n}",
                eeg[c].len()
            )));
        }
        if !(rate > 0.0) {
            return Err(Error::InvalidArgument(format!("bad rate {rate}")));
        }
        let channels = eeg.len();
        let flat: Vec<f32> = eeg.into_iter().flatten().collect();
        if flat.iter().chain(&stimulus).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trial data"));
        }
        Ok(Self {
            participant_id: participant_id.into(),
            trial_id: trial_id.into(),
            condition: Condition::Quiet,
            pitch_hz: None,
            rate,
            channels,
            eeg: flat,
            stimulus,
            ignored: None,
        })
    }

    pub fn with_condition(mut self, condition: Condition) -> Self {
        self.condition = condition;
        self
    }

    /// Attaches the ignored stream of a competing-speakers trial.
    pub fn with_ignored(mut self, ignored: Vec<f32>) -> Result<Self> {
        if ignored.len() != self.samples() {
            return Err(Error::Shape("ignored stream length differs from the trial".into()));
        }
        self.ignored = Some(ignored);
        self.condition = Condition::Competing;
        Ok(self)
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn samples(&self) -> usize {
        self.stimulus.len()
    }

    pub fn seconds(&self) -> f64 {
        self.samples() as f64 / self.rate
    }

    pub fn eeg_channel(&self, c: usize) -> &[f32] {
        let n = self.samples();
        &self.eeg[c * n..(c + 1) * n]
    }

    pub fn stimulus(&self) -> &[f32] {
        &self.stimulus
    }

    pub fn ignored(&self) -> Option<&[f32]> {
        self.ignored.as_deref()
    }

    /// `[channels, len]` EEG window starting at `onset`.
    pub fn eeg_segment(&self, onset: usize, len: usize) -> Tensor<f32> {
        let mut data = Vec::with_capacity(self.channels * len);
        for c in 0..self.channels {
            data.extend_from_slice(&self.eeg_channel(c)[onset..onset + len]);
        }
        Tensor::new(&[self.channels, len], data).expect("finite by construction")
    }

    /// `[1, len]` stimulus window starting at `onset`.
    pub fn stimulus_segment(&self, onset: usize, len: usize) -> Tensor<f32> {
        Tensor::new(&[1, len], self.stimulus[onset..onset + len].to_vec()).expect("finite")
    }

    /// `[1, len]` window of the ignored stream, if any.
    pub fn ignored_segment(&self, onset: usize, len: usize) -> Option<Tensor<f32>> {
        self.ignored
            .as_ref()
            .map(|s| Tensor::new(&[1, len], s[onset..onset + len].to_vec()).expect("finite"))
    }

    /// Samples `range` of this trial, metadata kept.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Trial {
        let n = self.samples();
        let eeg = (0..self.channels)
            .flat_map(|c| self.eeg[c * n + range.start..c * n + range.end].iter().copied())
            .collect();
        Trial {
            eeg,
            stimulus: self.stimulus[range.clone()].to_vec(),
            ignored: self.ignored.as_ref().map(|s| s[range].to_vec()),
            ..self.metadata_only()
        }
    }

    fn metadata_only(&self) -> Trial {
        Trial {
            participant_id: self.participant_id.clone(),
            trial_id: self.trial_id.clone(),
            condition: self.condition.clone(),
            pitch_hz: self.pitch_hz,
            rate: self.rate,
            channels: self.channels,
            eeg: Vec::new(),
            stimulus: Vec::new(),
            ignored: None,
        }
    }

    pub fn portion(&self, portion: Portion, split: &SplitFractions) -> Trial {
        let [train, val, test] = split.ranges(self.samples(), self.rate);
        match portion {
            Portion::Train => self.slice(train),
            Portion::Validation => self.slice(val),
            Portion::Test => self.slice(test),
            Portion::All => self.clone(),
        }
    }

    /// Exchanges the attended and ignored streams.
    pub fn swap_streams(&self) -> Result<Trial> {
        let ignored = self
            .ignored
            .clone()
            .ok_or_else(|| Error::InvalidArgument(format!("trial {} has one stream", self.trial_id)))?;
        let mut t = self.clone();
        t.ignored = Some(std::mem::replace(&mut t.stimulus, ignored));
        Ok(t)
    }

    /// Zero-mean, unit-variance scaling of every EEG channel and stimulus
    /// stream over the whole trial. Constant signals are only centred.
    pub fn standardized(&self) -> Trial {
        fn z(x: &[f32]) -> Vec<f32> {
            let n = x.len().max(1) as f64;
            let mean = x.iter().map(|v| *v as f64).sum::<f64>() / n;
            let var = x.iter().map(|v| (*v as f64 - mean).powi(2)).sum::<f64>() / n;
            let scale = if var > 0.0 { 1.0 / var.sqrt() } else { 1.0 };
            x.iter().map(|v| ((*v as f64 - mean) * scale) as f32).collect()
        }
        let eeg = (0..self.channels).flat_map(|c| z(self.eeg_channel(c))).collect();
        Trial {
            eeg,
            stimulus: z(&self.stimulus),
            ignored: self.ignored.as_deref().map(z),
            ..self.metadata_only()
        }
    }

    pub fn eeg_rows(&self) -> Vec<Vec<f32>> {
        (0..self.channels).map(|c| self.eeg_channel(c).to_vec()).collect()
    }
}

/// Train, validation and test portions of a set of trials.
#[derive(Clone, Debug, Default)]
pub struct Splits {
    pub train: Vec<Trial>,
    pub validation: Vec<Trial>,
    pub test: Vec<Trial>,
}

/// Optionally standardizes each whole trial, then cuts it into portions.
pub fn split_trials(trials: &[Trial], split: &SplitFractions, standardize: bool) -> Splits {
    let mut out = Splits::default();
    for t in trials {
        let t = if standardize { t.standardized() } else { t.clone() };
        out.train.push(t.portion(Portion::Train, split));
        out.validation.push(t.portion(Portion::Validation, split));
        out.test.push(t.portion(Portion::Test, split));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(secs: usize, rate: usize) -> Trial {
        let n = secs * rate;
        let eeg = (0..3).map(|c| (0..n).map(|t| (t * (c + 1)) as f32).collect()).collect();
        Trial::new("p", "t", rate as f64, eeg, (0..n).map(|t| t as f32).collect()).unwrap()
    }

    #[test]
    fn split_is_a_partition_on_whole_seconds() {
        let [a, b, c] = SplitFractions::default().ranges(600 * 64 + 17, 64.0);
        assert_eq!(a, 0..480 * 64);
        assert_eq!(b, 480 * 64..540 * 64);
        assert_eq!(c, 540 * 64..600 * 64 + 17);
    }

    #[test]
    fn slicing_keeps_channels_aligned() {
        let t = trial(10, 8);
        let s = t.slice(16..24);
        assert_eq!(s.samples(), 8);
        assert_eq!(s.eeg_channel(2)[0], 48.0);
        assert_eq!(s.stimulus()[7], 23.0);
    }

    #[test]
    fn segments_have_expected_shape() {
        let t = trial(10, 8);
        let e = t.eeg_segment(4, 10);
        assert_eq!(e.shape(), &[3, 10]);
        assert_eq!(e.row(1)[0], 8.0);
    }

    #[test]
    fn standardized_channels_are_unit_variance() {
        let z = trial(10, 8).standardized();
        let x = z.eeg_channel(1);
        let m: f32 = x.iter().sum::<f32>() / x.len() as f32;
        let v: f32 = x.iter().map(|a| (a - m) * (a - m)).sum::<f32>() / x.len() as f32;
        assert!(m.abs() < 1e-5 && (v - 1.0).abs() < 1e-4);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        assert!(Trial::new("p", "t", 64.0, vec![vec![0.0; 3]], vec![0.0; 4]).is_err());
    }

    #[test]
    fn swapping_streams_twice_is_identity() {
        let t = trial(4, 8).with_ignored(vec![1.0; 32]).unwrap();
        assert_eq!(t.swap_streams().unwrap().swap_streams().unwrap(), t);
    }
}
