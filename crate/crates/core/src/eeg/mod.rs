//! EEG preprocessing: drift removal, glitch interpolation, frontal-power
//! artifact detection with multichannel Wiener filtering, layout
//! harmonisation, re-referencing and the two end-to-end pipelines.

mod artifacts;
pub mod layout;
mod mwf;
mod pipeline;
mod spatial;

pub use artifacts::{frontal_power_mask, threshold_interpolate, ArtifactMask};
pub use layout::ChannelLayout;
pub use mwf::mwf_suppress;
pub use pipeline::{preprocess_envelope_pipeline, preprocess_ffr_pipeline, PreprocessConfig, FFR_BAND};
pub use spatial::map_layout;

use crate::error::{Error, Result};
use crate::signal::iir::FirstOrder;

/// Multichannel EEG timeline, channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct EegRecording {
    data: Vec<Vec<f64>>,
    rate: f64,
    layout: ChannelLayout,
    pub participant_id: String,
    pub trial_id: String,
}

impl EegRecording {
    pub fn new(data: Vec<Vec<f64>>, rate: f64, layout: ChannelLayout) -> Result<Self> {
        if data.len() != layout.len() {
            return Err(Error::Shape(format!(
                "{} data channels vs {} layout channels",
                data.len(),
                layout.len()
            )));
        }
        if let Some(first) = data.first() {
            if data.iter().any(|c| c.len() != first.len()) {
                return Err(Error::Shape("channels differ in length".into()));
            }
        }
        if !(rate > 0.0) {
            return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
        }
        Ok(Self {
            data,
            rate,
            layout,
            participant_id: String::new(),
            trial_id: String::new(),
        })
    }

    pub fn with_ids(mut self, participant: impl Into<String>, trial: impl Into<String>) -> Self {
        self.participant_id = participant.into();
        self.trial_id = trial.into();
        self
    }

    pub fn data(&self) -> &[Vec<f64>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Vec<f64>> {
        self.data
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn layout(&self) -> &ChannelLayout {
        &self.layout
    }

    pub fn channels(&self) -> usize {
        self.data.len()
    }

    pub fn samples(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    /// Same metadata, new samples (and rate).
    pub(crate) fn replace(&self, data: Vec<Vec<f64>>, rate: f64) -> Self {
        Self {
            data,
            rate,
            layout: self.layout.clone(),
            participant_id: self.participant_id.clone(),
            trial_id: self.trial_id.clone(),
        }
    }

    pub(crate) fn replace_layout(&self, data: Vec<Vec<f64>>, layout: ChannelLayout) -> Self {
        Self {
            data,
            rate: self.rate,
            layout,
            participant_id: self.participant_id.clone(),
            trial_id: self.trial_id.clone(),
        }
    }
}

/// Cutoff of the drift-removal highpass.
pub const HIGHPASS_HZ: f64 = 0.5;

/// First-order Butterworth highpass at 0.5 Hz, forward and backward.
pub fn highpass_detrend(x: &EegRecording) -> Result<EegRecording> {
    if x.channels() == 0 || x.samples() == 0 {
        return Err(Error::InvalidArgument("empty recording".into()));
    }
    if x.rate() < 64.0 {
        return Err(Error::InvalidArgument(format!(
            "highpass expects at least 64 Hz, got {}",
            x.rate()
        )));
    }
    let f = FirstOrder::butterworth_highpass(HIGHPASS_HZ, x.rate());
    let data = x.data().iter().map(|c| f.filtfilt(c)).collect();
    Ok(x.replace(data, x.rate()))
}

/// Subtracts the across-channel mean from every sample.
pub fn common_average_reference(x: &EegRecording) -> Result<EegRecording> {
    if x.channels() < 2 {
        return Err(Error::InvalidArgument(
            "re-referencing needs at least 2 channels".into(),
        ));
    }
    let n = x.samples();
    let c = x.channels() as f64;
    let mut mean = vec![0.0; n];
    for ch in x.data() {
        for (m, v) in mean.iter_mut().zip(ch) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= c);
    let data = x
        .data()
        .iter()
        .map(|ch| ch.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    Ok(x.replace(data, x.rate()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn two_channel(a: Vec<f64>, b: Vec<f64>, rate: f64) -> EegRecording {
        let layout = ChannelLayout::from_labels(&["Cz", "Pz"]).unwrap();
        EegRecording::new(vec![a, b], rate, layout).unwrap()
    }

    fn amplitude_db(f_hz: f64) -> f64 {
        let rate = 64.0;
        let n = 64 * 240;
        let s: Vec<f64> = (0..n).map(|i| (2.0 * PI * f_hz * i as f64 / rate).sin()).collect();
        let y = highpass_detrend(&two_channel(s.clone(), s.clone(), rate)).unwrap();
        let (lo, hi) = (n / 4, 3 * n / 4);
        let p_in: f64 = s[lo..hi].iter().map(|v| v * v).sum();
        let p_out: f64 = y.data()[0][lo..hi].iter().map(|v| v * v).sum();
        10.0 * (p_out / p_in).log10()
    }

    #[test]
    fn highpass_cutoff_is_six_db_after_two_passes() {
        let db = amplitude_db(0.5);
        assert!((db + 6.0).abs() < 0.5, "{db}");
    }

    #[test]
    fn highpass_leaves_ten_hz_alone() {
        assert!(amplitude_db(10.0).abs() < 0.2);
    }

    #[test]
    fn highpass_removes_offsets() {
        let y = highpass_detrend(&two_channel(vec![2.0; 1280], vec![-1.0; 1280], 64.0)).unwrap();
        let m = y.data()[0].iter().map(|v| v.abs()).sum::<f64>() / 1280.0;
        assert!(m < 2e-3);
    }

    #[test]
    fn highpass_rejects_empty() {
        let layout = ChannelLayout::from_labels(&["Cz"]).unwrap();
        let x = EegRecording::new(vec![vec![]], 64.0, layout).unwrap();
        assert!(highpass_detrend(&x).is_err());
    }

    #[test]
    fn car_of_two_channels() {
        let y = common_average_reference(&two_channel(vec![3.0, 1.0], vec![1.0, 5.0], 64.0)).unwrap();
        assert_eq!(y.data()[0], vec![1.0, -2.0]);
        assert_eq!(y.data()[1], vec![-1.0, 2.0]);
    }

    #[test]
    fn car_of_identical_channels_is_zero() {
        let y = common_average_reference(&two_channel(vec![0.3; 8], vec![0.3; 8], 64.0)).unwrap();
        assert!(y.data().iter().flatten().all(|v| *v == 0.0));
    }
}
