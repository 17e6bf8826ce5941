use crate::error::{Error, Result};

use super::fir::fir_zero_phase;
use super::gammatone::design_gammatone_bank;
use super::resample::resample;
use super::{AudioWaveform, FeatureKind, FeatureSeries};

/// Input rate expected by [`extract_envelope`].
pub const ENVELOPE_INPUT_RATE: f64 = 48_000.0;

const ENVELOPE_BANDS: usize = 28;
const ENVELOPE_LO_HZ: f64 = 50.0;
const ENVELOPE_HI_HZ: f64 = 5_000.0;
const COMPRESSION: f64 = 0.6;

/// Rate the modulations pipeline resamples audio to first.
const MODULATION_AUDIO_RATE: f64 = 16_000.0;
/// Frame rate of the auditory-spectrogram stand-in.
const SPECTROGRAM_RATE: f64 = 500.0;
const SPECTROGRAM_BANDS: usize = 24;
const SPECTROGRAM_LO_HZ: f64 = 300.0;
const SPECTROGRAM_HI_HZ: f64 = 4_000.0;
const PITCH_BAND: (f64, f64) = (70.0, 220.0);
const PITCH_TAPS: usize = 249;

fn check_input(w: &AudioWaveform) -> Result<()> {
    if w.samples().is_empty() {
        return Err(Error::InvalidArgument("empty waveform".into()));
    }
    Ok(())
}

/// Compressed broadband envelope at 64 Hz.
///
/// 28 gammatone bands (50 Hz–5 kHz), full-wave rectified, raised to 0.6,
/// averaged across bands and resampled to 64 Hz. Resampler ringing below
/// zero is clipped so the envelope stays nonnegative.
pub fn extract_envelope(w: &AudioWaveform) -> Result<FeatureSeries> {
    check_input(w)?;
    if w.rate() != ENVELOPE_INPUT_RATE {
        return Err(Error::InvalidArgument(format!(
            "envelope extraction expects {ENVELOPE_INPUT_RATE} Hz audio, got {}",
            w.rate()
        )));
    }
    let bank = design_gammatone_bank(ENVELOPE_BANDS, ENVELOPE_LO_HZ, ENVELOPE_HI_HZ, w.rate())?;
    let env = bank.mean_of_mapped(w.samples(), |y| y.abs().powf(COMPRESSION));
    let mut out = resample(&env, w.rate(), FeatureKind::Envelope.rate())?;
    out.iter_mut().for_each(|v| *v = v.max(0.0));
    FeatureSeries::new(out, FeatureKind::Envelope)
}

/// High-frequency envelope modulations at 512 Hz.
///
/// Audio is resampled to 16 kHz and passed through a 24-band gammatone
/// bank (300 Hz–4 kHz) standing in for an auditory spectrogram. The
/// half-wave-rectified band outputs are averaged, lowpassed and sampled at
/// 500 Hz, bandpassed to 70–220 Hz with a zero-phase 249-tap Hamming FIR,
/// and resampled to 512 Hz.
pub fn extract_envelope_modulations(w: &AudioWaveform) -> Result<FeatureSeries> {
    check_input(w)?;
    let audio = resample(w.samples(), w.rate(), MODULATION_AUDIO_RATE)?;
    let bank = design_gammatone_bank(
        SPECTROGRAM_BANDS,
        SPECTROGRAM_LO_HZ,
        SPECTROGRAM_HI_HZ,
        MODULATION_AUDIO_RATE,
    )?;
    let spec = bank.mean_of_mapped(&audio, |y| y.max(0.0));
    let frames = resample(&spec, MODULATION_AUDIO_RATE, SPECTROGRAM_RATE)?;
    let band = fir_zero_phase(&frames, SPECTROGRAM_RATE, PITCH_BAND, PITCH_TAPS)?;
    let out = resample(&band, SPECTROGRAM_RATE, FeatureKind::EnvelopeModulations.rate())?;
    FeatureSeries::new(out, FeatureKind::EnvelopeModulations)
}
