use super::{
    common_average_reference, frontal_power_mask, highpass_detrend, map_layout, mwf_suppress, threshold_interpolate,
    ChannelLayout, EegRecording,
};
use crate::eeg::layout::FRONTAL_CHANNELS;
use crate::error::{Error, Result};
use crate::signal::fir::fir_zero_phase;
use crate::signal::resample::resample_rows;

/// Output rate of the envelope-aligned pipeline.
pub const ENVELOPE_EEG_RATE: f64 = 64.0;
/// Output rate of the FFR-aligned pipeline.
pub const FFR_EEG_RATE: f64 = 512.0;
/// Passband of the FFR-aligned pipeline.
pub const FFR_BAND: (f64, f64) = (70.0, 220.0);

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    /// Glitch threshold in volts.
    pub glitch_threshold: f64,
    /// Frontal power multiple that flags an eye artifact.
    pub frontal_factor: f64,
    pub frontal_channels: Vec<String>,
    /// Layout to map onto before re-referencing, if any.
    pub target_layout: Option<ChannelLayout>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            glitch_threshold: 500e-6,
            frontal_factor: 5.0,
            frontal_channels: FRONTAL_CHANNELS.iter().map(|s| s.to_string()).collect(),
            target_layout: None,
        }
    }
}

fn check_input(x: &EegRecording) -> Result<()> {
    if x.channels() == 0 || x.samples() == 0 {
        return Err(Error::InvalidArgument("empty recording".into()));
    }
    if x.data().iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("raw EEG"));
    }
    Ok(())
}

fn map_and_reference(x: &EegRecording, cfg: &PreprocessConfig) -> Result<EegRecording> {
    match &cfg.target_layout {
        Some(t) if t != x.layout() => common_average_reference(&map_layout(x, t)?),
        _ => common_average_reference(x),
    }
}

/// Highpass, glitch interpolation, frontal-artifact Wiener filtering,
/// common-average reference, then resampling to 64 Hz.
pub fn preprocess_envelope_pipeline(x: &EegRecording, cfg: &PreprocessConfig) -> Result<EegRecording> {
    check_input(x)?;
    let y = highpass_detrend(x)?;
    let (y, _) = threshold_interpolate(&y, cfg.glitch_threshold)?;
    let mask = frontal_power_mask(&y, cfg.frontal_factor, &cfg.frontal_channels)?;
    let y = mwf_suppress(&y, &mask)?;
    let y = map_and_reference(&y, cfg)?;
    let data = resample_rows(y.data(), y.rate(), ENVELOPE_EEG_RATE)?;
    Ok(y.replace(data, ENVELOPE_EEG_RATE))
}

/// Highpass, glitch interpolation, common-average reference, a zero-phase
/// 70-220 Hz FIR with one second of taps, then resampling to 512 Hz.
pub fn preprocess_ffr_pipeline(x: &EegRecording, cfg: &PreprocessConfig) -> Result<EegRecording> {
    check_input(x)?;
    let y = highpass_detrend(x)?;
    let (y, _) = threshold_interpolate(&y, cfg.glitch_threshold)?;
    let y = map_and_reference(&y, cfg)?;
    let taps = y.rate().round() as usize | 1;
    let filtered = y
        .data()
        .iter()
        .map(|ch| fir_zero_phase(ch, y.rate(), FFR_BAND, taps))
        .collect::<Result<Vec<_>>>()?;
    let data = resample_rows(&filtered, y.rate(), FFR_EEG_RATE)?;
    Ok(y.replace(data, FFR_EEG_RATE))
}
