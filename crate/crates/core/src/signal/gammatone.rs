//! ERB-spaced 4th-order gammatone filterbank.
//!
//! Each channel is a cascade of four identical complex one-pole resonators
//! with pole `r·e^{jω}`, giving the sampled impulse response
//! `n³ rⁿ e^{jωn}`. The real output is `2·Re(y)` so a sinusoid at the
//! centre frequency passes with unit gain.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Glasberg–Moore ERB-rate (Cams) of a frequency in Hz.
pub fn erb_rate(f: f64) -> f64 {
    21.4 * (1.0 + 0.00437 * f).log10()
}

/// Inverse of [`erb_rate`].
pub fn erb_rate_inverse(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) / 0.00437
}

/// Equivalent rectangular bandwidth in Hz at `f`.
pub fn erb_bandwidth(f: f64) -> f64 {
    24.7 * (1.0 + 0.00437 * f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Resonator {
    /// Pole radius.
    r: f64,
    cos_w: f64,
    sin_w: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammatoneBank {
    center_freqs: Vec<f64>,
    order: usize,
    rate: f64,
    coeffs: Vec<Resonator>,
}

/// Designs `n_filters` gammatone channels equidistant on the ERB-rate scale,
/// the first at `f_lo` and the last at `f_hi`.
pub fn design_gammatone_bank(n_filters: usize, f_lo: f64, f_hi: f64, rate: f64) -> Result<GammatoneBank> {
    if n_filters < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 filters, got {n_filters}"
        )));
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
    }
    if !(f_lo > 0.0 && f_lo < f_hi) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < f_lo < f_hi, got {f_lo}..{f_hi}"
        )));
    }
    if f_hi >= rate / 2.0 {
        return Err(Error::InvalidArgument(format!(
            "f_hi {f_hi} Hz is at or above Nyquist ({} Hz)",
            rate / 2.0
        )));
    }
    let (e_lo, e_hi) = (erb_rate(f_lo), erb_rate(f_hi));
    let step = (e_hi - e_lo) / (n_filters - 1) as f64;
    let center_freqs: Vec<f64> = (0..n_filters)
        .map(|i| match i {
            0 => f_lo,
            i if i == n_filters - 1 => f_hi,
            i => erb_rate_inverse(e_lo + step * i as f64),
        })
        .collect();
    let coeffs = center_freqs
        .iter()
        .map(|&fc| {
            let b = 1.019 * erb_bandwidth(fc);
            let w = 2.0 * PI * fc / rate;
            Resonator {
                r: (-2.0 * PI * b / rate).exp(),
                cos_w: w.cos(),
                sin_w: w.sin(),
            }
        })
        .collect();
    Ok(GammatoneBank {
        center_freqs,
        order: 4,
        rate,
        coeffs,
    })
}

impl GammatoneBank {
    pub fn center_freqs(&self) -> &[f64] {
        &self.center_freqs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn len(&self) -> usize {
        self.center_freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.center_freqs.is_empty()
    }

    /// Filters `x` through channel `ch`, writing the real output to `out`.
    pub fn filter_channel(&self, ch: usize, x: &[f64], out: &mut Vec<f64>) {
        let Resonator { r, cos_w, sin_w } = self.coeffs[ch];
        let (pr, pi) = (r * cos_w, r * sin_w);
        let g = 1.0 - r;
        let mut re = [0.0f64; 4];
        let mut im = [0.0f64; 4];
        out.clear();
        out.reserve(x.len());
        for &v in x {
            let (mut in_re, mut in_im) = (v, 0.0);
            for s in 0..4 {
                let nr = g * in_re + pr * re[s] - pi * im[s];
                let ni = g * in_im + pr * im[s] + pi * re[s];
                re[s] = nr;
                im[s] = ni;
                in_re = nr;
                in_im = ni;
            }
            out.push(2.0 * in_re);
        }
    }

    /// Applies `map` to every channel output and returns the across-channel mean.
    pub fn mean_of_mapped(&self, x: &[f64], map: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut acc = vec![0.0; x.len()];
        let mut buf = Vec::new();
        for ch in 0..self.len() {
            self.filter_channel(ch, x, &mut buf);
            for (a, &y) in acc.iter_mut().zip(&buf) {
                *a += map(y);
            }
        }
        let n = self.len() as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bank_spans_requested_range() {
        let bank = design_gammatone_bank(28, 50.0, 5000.0, 48000.0).unwrap();
        assert_eq!(bank.len(), 28);
        assert_eq!(bank.center_freqs()[0], 50.0);
        assert_eq!(bank.center_freqs()[27], 5000.0);
        let e: Vec<f64> = bank.center_freqs().iter().map(|&f| erb_rate(f)).collect();
        let step = e[1] - e[0];
        for w in e.windows(2) {
            assert!((w[1] - w[0] - step).abs() < 1e-9);
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn three_filter_bank_middle_is_erb_midpoint() {
        let bank = design_gammatone_bank(3, 50.0, 5000.0, 48000.0).unwrap();
        // Midpoint of ERB-rate(50) and ERB-rate(5000), inverted (computed offline).
        assert!((bank.center_freqs()[1] - 978.6317171937535).abs() < 1e-9);
    }

    #[test]
    fn rejects_degenerate_designs() {
        assert!(design_gammatone_bank(2, 100.0, 100.0, 48000.0).is_err());
        assert!(design_gammatone_bank(1, 50.0, 5000.0, 48000.0).is_err());
        assert!(design_gammatone_bank(4, 50.0, 24000.0, 48000.0).is_err());
    }

    #[test]
    fn centre_frequency_gain_is_unity() {
        let rate = 16000.0;
        let bank = design_gammatone_bank(2, 500.0, 2000.0, rate).unwrap();
        for (ch, &fc) in bank.center_freqs().iter().enumerate() {
            let x: Vec<f64> = (0..16000).map(|n| (2.0 * PI * fc * n as f64 / rate).sin()).collect();
            let mut y = Vec::new();
            bank.filter_channel(ch, &x, &mut y);
            let tail = &y[8000..];
            let amp = (2.0 * tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64).sqrt();
            assert!((amp - 1.0).abs() < 0.02, "channel {ch}: {amp}");
        }
    }
}
