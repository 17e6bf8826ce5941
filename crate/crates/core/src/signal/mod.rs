//! Stimulus feature extraction: the compressed broadband envelope (64 Hz)
//! and the high-frequency envelope-modulations feature (512 Hz).

mod features;
pub mod fir;
pub mod gammatone;
pub mod iir;
pub mod resample;

pub use features::{extract_envelope, extract_envelope_modulations, ENVELOPE_INPUT_RATE};
pub use fir::fir_zero_phase;
pub use gammatone::{design_gammatone_bank, erb_rate, GammatoneBank};
pub use resample::resample;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which stimulus feature a series (and a decoder) works with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Envelope,
    EnvelopeModulations,
}

impl FeatureKind {
    /// Sample rate the feature (and the matching EEG) is delivered at.
    pub fn rate(self) -> f64 {
        match self {
            FeatureKind::Envelope => 64.0,
            FeatureKind::EnvelopeModulations => 512.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureKind::Envelope => "envelope",
            FeatureKind::EnvelopeModulations => "modulations",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            FeatureKind::Envelope => 0,
            FeatureKind::EnvelopeModulations => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(FeatureKind::Envelope),
            1 => Some(FeatureKind::EnvelopeModulations),
            _ => None,
        }
    }
}

impl std::str::FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "envelope" | "env" => Ok(FeatureKind::Envelope),
            "modulations" | "ffr" | "envelope_modulations" => Ok(FeatureKind::EnvelopeModulations),
            other => Err(Error::InvalidArgument(format!("unknown feature kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Mono speech waveform.
#[derive(Clone, Debug, PartialEq)]
pub struct AudioWaveform {
    samples: Vec<f64>,
    rate: f64,
}

impl AudioWaveform {
    pub fn new(samples: Vec<f64>, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("audio samples"));
        }
        Ok(Self { samples, rate })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Univariate stimulus feature timeline.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSeries {
    samples: Vec<f64>,
    kind: FeatureKind,
}

impl FeatureSeries {
    /// Wraps samples at the kind's rate. Envelope series must be nonnegative.
    pub fn new(samples: Vec<f64>, kind: FeatureKind) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature samples"));
        }
        if kind == FeatureKind::Envelope && samples.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("envelope must be nonnegative".into()));
        }
        Ok(Self { samples, kind })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn rate(&self) -> f64 {
        self.kind.rate()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Extends `x` by `pad` samples on each side with odd (point) reflection
/// about the end samples: `2·x[0] − x[k]` on the left, likewise on the right.
pub(crate) fn extend_odd(x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n + 2 * pad);
    if n == 0 {
        return out;
    }
    let (first, last) = (x[0], x[n - 1]);
    for k in (1..=pad).rev() {
        let v = if n > 1 { x[k.min(n - 1)] } else { first };
        out.push(2.0 * first - v);
    }
    out.extend_from_slice(x);
    for k in 1..=pad {
        let v = if n > 1 { x[n - 1 - k.min(n - 1)] } else { last };
        out.push(2.0 * last - v);
    }
    out
}
