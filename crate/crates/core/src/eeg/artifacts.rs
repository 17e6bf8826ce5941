use super::EegRecording;
use crate::error::{Error, Result};

/// Per-sample artifact annotations for one recording.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtifactMask {
    /// `[channel][sample]` amplitude glitches that were interpolated.
    pub flags: Vec<Vec<bool>>,
    /// `[sample]` frontal-power events.
    pub global_flags: Vec<bool>,
}

impl ArtifactMask {
    pub fn clean(channels: usize, samples: usize) -> Self {
        Self {
            flags: vec![vec![false; samples]; channels],
            global_flags: vec![false; samples],
        }
    }

    pub fn flagged_global(&self) -> usize {
        self.global_flags.iter().filter(|f| **f).count()
    }

    pub fn flagged_samples(&self) -> usize {
        self.flags.iter().flatten().filter(|f| **f).count()
    }
}

/// Replaces runs where `|x| > thresh` by linear interpolation between the
/// clean samples on either side. Runs touching an edge hold the nearest
/// clean value; a channel that is glitchy everywhere is left untouched.
pub fn threshold_interpolate(x: &EegRecording, thresh: f64) -> Result<(EegRecording, ArtifactMask)> {
    if !(thresh > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold must be positive, got {thresh}"
        )));
    }
    let mut mask = ArtifactMask::clean(x.channels(), x.samples());
    let mut data = x.data().to_vec();
    for (ch, flags) in data.iter_mut().zip(mask.flags.iter_mut()) {
        let n = ch.len();
        let mut i = 0;
        while i < n {
            if ch[i].abs() <= thresh {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && ch[i].abs() > thresh {
                i += 1;
            }
            let end = i; // exclusive
            let before = start.checked_sub(1).map(|j| ch[j]);
            let after = (end < n).then(|| ch[end]);
            let fill = |k: usize| -> Option<f64> {
                match (before, after) {
                    (Some(a), Some(b)) => {
                        let span = (end - start + 1) as f64;
                        let t = (k - start + 1) as f64 / span;
                        Some(a + (b - a) * t)
                    }
                    (Some(a), None) => Some(a),
                    (None, Some(b)) => Some(b),
                    (None, None) => None,
                }
            };
            for k in start..end {
                if let Some(v) = fill(k) {
                    ch[k] = v;
                    flags[k] = true;
                }
            }
        }
    }
    Ok((x.replace(data, x.rate()), mask))
}

/// Flags samples where the instantaneous power of the mean frontal channel
/// exceeds `factor` times its trial-average power.
pub fn frontal_power_mask<S: AsRef<str>>(x: &EegRecording, factor: f64, frontal: &[S]) -> Result<ArtifactMask> {
    let missing: Vec<String> = frontal
        .iter()
        .filter(|n| x.layout().index_of(n.as_ref()).is_none())
        .map(|n| n.as_ref().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingChannels(missing));
    }
    if frontal.is_empty() {
        return Err(Error::InvalidArgument("empty frontal channel set".into()));
    }
    let idx: Vec<usize> = frontal
        .iter()
        .map(|n| x.layout().index_of(n.as_ref()).expect("checked above"))
        .collect();
    let n = x.samples();
    let k = idx.len() as f64;
    let mean: Vec<f64> = (0..n)
        .map(|t| idx.iter().map(|&c| x.data()[c][t]).sum::<f64>() / k)
        .collect();
    let avg_power = if n == 0 {
        0.0
    } else {
        mean.iter().map(|v| v * v).sum::<f64>() / n as f64
    };
    let threshold = factor * avg_power;
    let mut mask = ArtifactMask::clean(x.channels(), n);
    if threshold > 0.0 {
        for (f, v) in mask.global_flags.iter_mut().zip(&mean) {
            *f = v * v > threshold;
        }
    }
    Ok(mask)
}
