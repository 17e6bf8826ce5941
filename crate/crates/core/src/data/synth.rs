//! Synthetic preprocessed datasets with a known, learnable stimulus-EEG
//! relation.
//!
//! Each participant gets a smooth random spatial pattern over the 64
//! electrodes and a response latency. The EEG is that pattern times the
//! lowpass-shaped, delayed stimulus feature, plus spatially mixed and
//! channel-specific 1/f noise at the requested SNR. Competing-speaker
//! trials add the ignored stream's response at `1 / gain_ratio` of the
//! attended gain.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{Condition, Trial};
use crate::eeg::ChannelLayout;
use crate::error::{Error, Result};
use crate::signal::FeatureKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub participants: usize,
    pub trials_per_participant: usize,
    pub minutes_per_trial: f64,
    /// Per-channel signal-to-noise ratio; `inf` / `-inf` remove noise / signal.
    pub snr_db: f64,
    pub kinds: Vec<FeatureKind>,
    /// Extra competing-speaker trials per participant.
    pub competing_trials: usize,
    pub gain_ratio: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            participants: 20,
            trials_per_participant: 1,
            minutes_per_trial: 10.0,
            snr_db: DEFAULT_SNR_DB,
            kinds: vec![FeatureKind::Envelope],
            competing_trials: 0,
            gain_ratio: 2.0,
            seed: 0,
        }
    }
}

/// "Moderate" default SNR.
pub const DEFAULT_SNR_DB: f64 = -20.0;

/// Channels of every synthetic recording.
pub const SYNTH_CHANNELS: usize = 64;

/// Latent noise sources mixed across the scalp.
const NOISE_SOURCES: usize = 16;

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() {
            return Err(Error::Config("snr_db must not be NaN".into()));
        }
        if self.participants == 0 || self.trials_per_participant + self.competing_trials == 0 {
            return Err(Error::Config("need at least one participant and one trial".into()));
        }
        if !(self.minutes_per_trial > 0.0) || !(self.gain_ratio > 0.0) || self.kinds.is_empty() {
            return Err(Error::Config(
                "minutes, gain ratio and kinds must be positive/non-empty".into(),
            ));
        }
        Ok(())
    }
}

/// One generated trial and the feature kind it carries.
#[derive(Clone, Debug)]
pub struct SynthTrial {
    pub kind: FeatureKind,
    pub trial: Trial,
    pub narrator: Narrator,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Narrator {
    pub sex: Sex,
    pub mean_pitch_hz: f64,
}

/// Applies a real, zero-phase spectral gain to `x` (circular).
fn shape_spectrum(x: &[f64], rate: f64, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = x.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(*v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let bin = k.min(n - k);
        *c *= gain(bin as f64 * rate / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn standardize(x: &mut [f64]) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n).sqrt();
    let s = if sd > 0.0 { 1.0 / sd } else { 0.0 };
    x.iter_mut().for_each(|v| *v = (*v - m) * s);
}

/// Speech-envelope-like positive process: 1/f-tilted noise below ~8 Hz,
/// passed through a softplus.
fn envelope_stimulus(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<f64> {
    let mut x = shape_spectrum(&gaussian(rng, n), rate, |f| {
        if f < 0.3 {
            0.0
        } else {
            1.0 / (f.sqrt() * (1.0 + (f / 8.0).powi(4)))
        }
    });
    standardize(&mut x);
    x.iter().map(|v| (1.0 + (1.5 * v).exp()).ln()).collect()
}

/// Pitch-rate modulation stand-in: noise band-limited to 70–220 Hz.
fn modulation_stimulus(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> Vec<f64> {
    let mut x = shape_spectrum(&gaussian(rng, n), rate, band_gain);
    standardize(&mut x);
    x
}

/// Smooth edges of the 70–220 Hz band.
fn band_gain(f: f64) -> f64 {
    let edge = |x: f64| 0.5 * (1.0 + (PI * x.clamp(-0.5, 0.5)).sin());
    edge((f - 70.0) / 10.0) * edge((220.0 - f) / 20.0)
}

/// Neural response: centred stimulus, lowpass-shaped and delayed by
/// `delay` seconds (circularly, via a linear phase).
fn response(stim: &[f64], rate: f64, delay: f64, corner: f64) -> Vec<f64> {
    let n = stim.len();
    let mean = stim.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = stim.iter().map(|v| v - mean).collect();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = centred.iter().map(|v| Complex::new(*v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        // Signed frequency so the phase stays Hermitian.
        let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * rate / n as f64;
        let lp = 1.0 / (1.0 + (f / corner).powi(2)).sqrt();
        let phase = Complex::from_polar(1.0, -2.0 * PI * f * delay);
        *c *= phase * lp;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Per-participant smooth spatial pattern: a random dipole-like field plus
/// a little channel jitter, scaled to unit mean square.
fn spatial_pattern(rng: &mut ChaCha8Rng, layout: &ChannelLayout) -> Vec<f64> {
    let d: [f64; 3] = [
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(0.5..1.5),
    ];
    let mut a: Vec<f64> = layout
        .positions()
        .iter()
        .map(|p| d[0] * p[0] + d[1] * p[1] + d[2] * p[2] + 0.2 * rng.random_range(-1.0..1.0))
        .collect();
    let ms = (a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64).sqrt();
    a.iter_mut().for_each(|v| *v /= ms);
    a
}

fn noise_shape(kind: FeatureKind) -> impl Fn(f64) -> f64 {
    move |f: f64| {
        let pink = if f < 0.5 { 0.0 } else { 1.0 / f.sqrt() };
        match kind {
            FeatureKind::Envelope => pink + 0.05,
            FeatureKind::EnvelopeModulations => (pink + 0.05) * band_gain(f),
        }
    }
}

/// Spatially mixed plus channel-specific 1/f noise, unit mean power.
fn eeg_noise(rng: &mut ChaCha8Rng, n: usize, rate: f64, kind: FeatureKind) -> Vec<Vec<f64>> {
    let shape = noise_shape(kind);
    let sources: Vec<Vec<f64>> = (0..NOISE_SOURCES)
        .map(|_| {
            let mut s = shape_spectrum(&gaussian(rng, n), rate, &shape);
            standardize(&mut s);
            s
        })
        .collect();
    let mut out = Vec::with_capacity(SYNTH_CHANNELS);
    for _ in 0..SYNTH_CHANNELS {
        let mix: Vec<f64> = (0..NOISE_SOURCES).map(|_| StandardNormal.sample(rng)).collect();
        let mut own = shape_spectrum(&gaussian(rng, n), rate, &shape);
        standardize(&mut own);
        let mut ch = own;
        let norm = (mix.iter().map(|m| m * m).sum::<f64>()).sqrt();
        for (m, s) in mix.iter().zip(&sources) {
            let w = m / norm;
            ch.iter_mut().zip(s).for_each(|(c, v)| *c += w * v);
        }
        standardize(&mut ch);
        out.push(ch);
    }
    out
}

/// Latency range of the synthetic response for each feature kind (s).
pub fn delay_range(kind: FeatureKind) -> (f64, f64) {
    match kind {
        FeatureKind::Envelope => (0.100, 0.300),
        FeatureKind::EnvelopeModulations => (0.004, 0.012),
    }
}

fn corner_hz(kind: FeatureKind) -> f64 {
    match kind {
        FeatureKind::Envelope => 8.0,
        FeatureKind::EnvelopeModulations => 300.0,
    }
}

/// Scale from standardized units to volts.
const MICROVOLT: f64 = 1e-6;

/// Generates every trial in memory. Each (participant, trial, kind) draws
/// from its own seeded stream, so output does not depend on thread count.
pub fn synth_trials(spec: &SynthSpec) -> Result<Vec<SynthTrial>> {
    spec.validate()?;
    let layout = ChannelLayout::biosemi64();
    let mut out = Vec::new();
    for p in 0..spec.participants {
        let mut prng = ChaCha8Rng::seed_from_u64(spec.seed);
        prng.set_stream(p as u64);
        let pattern = spatial_pattern(&mut prng, &layout);
        let fractions: Vec<f64> = spec.kinds.iter().map(|_| prng.random::<f64>()).collect();
        let n_trials = spec.trials_per_participant + spec.competing_trials;
        for t in 0..n_trials {
            let competing = t >= spec.trials_per_participant;
            let narrator = if prng.random::<bool>() {
                Narrator {
                    sex: Sex::Female,
                    mean_pitch_hz: prng.random_range(170.0..230.0),
                }
            } else {
                Narrator {
                    sex: Sex::Male,
                    mean_pitch_hz: prng.random_range(95.0..140.0),
                }
            };
            for (ki, &kind) in spec.kinds.iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_0000);
                rng.set_stream(((p * 4096 + t) * 8 + kind.code() as usize) as u64);
                let rate = kind.rate();
                let n = (spec.minutes_per_trial * 60.0 * rate).round() as usize;
                let (lo, hi) = delay_range(kind);
                let delay = lo + (hi - lo) * fractions[ki];
                let make = |rng: &mut ChaCha8Rng| match kind {
                    FeatureKind::Envelope => envelope_stimulus(rng, n, rate),
                    FeatureKind::EnvelopeModulations => modulation_stimulus(rng, n, rate),
                };
                let attended = make(&mut rng);
                let mut drive = response(&attended, rate, delay, corner_hz(kind));
                standardize(&mut drive);
                let ignored = if competing {
                    let ign = make(&mut rng);
                    let mut r = response(&ign, rate, delay, corner_hz(kind));
                    standardize(&mut r);
                    let g = 1.0 / spec.gain_ratio;
                    drive.iter_mut().zip(&r).for_each(|(d, v)| *d += g * v);
                    Some(ign)
                } else {
                    None
                };
                let (signal_gain, noise_gain) = if spec.snr_db == f64::INFINITY {
                    (1.0, 0.0)
                } else if spec.snr_db == f64::NEG_INFINITY {
                    (0.0, 1.0)
                } else {
                    (1.0, 10f64.powf(-spec.snr_db / 20.0))
                };
                let noise = if noise_gain > 0.0 {
                    eeg_noise(&mut rng, n, rate, kind)
                } else {
                    vec![vec![0.0; n]; SYNTH_CHANNELS]
                };
                let eeg: Vec<Vec<f32>> = noise
                    .iter()
                    .zip(&pattern)
                    .map(|(nz, a)| {
                        nz.iter()
                            .zip(&drive)
                            .map(|(e, d)| ((signal_gain * a * d + noise_gain * e) * MICROVOLT) as f32)
                            .collect()
                    })
                    .collect();
                let stim: Vec<f32> = attended.iter().map(|v| *v as f32).collect();
                let mut trial = Trial::new(
                    format!("p{:02}", p + 1),
                    format!("p{:02}-t{:02}", p + 1, t + 1),
                    rate,
                    eeg,
                    stim,
                )?;
                trial.pitch_hz = Some(narrator.mean_pitch_hz);
                if let Some(ign) = ignored {
                    trial = trial.with_ignored(ign.iter().map(|v| *v as f32).collect())?;
                } else {
                    trial = trial.with_condition(Condition::Quiet);
                }
                out.push(SynthTrial { kind, trial, narrator });
            }
        }
    }
    Ok(out)
}
