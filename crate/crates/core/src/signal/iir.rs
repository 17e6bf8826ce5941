//! First-order Butterworth highpass, applied forward and backward.

use std::f64::consts::PI;

use super::extend_odd;

/// Biquad-free first-order section `y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstOrder {
    pub b0: f64,
    pub b1: f64,
    pub a1: f64,
}

impl FirstOrder {
    /// Bilinear-transform Butterworth highpass with −3 dB at `cutoff`.
    pub fn butterworth_highpass(cutoff: f64, rate: f64) -> Self {
        let k = (PI * cutoff / rate).tan();
        let norm = 1.0 / (1.0 + k);
        Self {
            b0: norm,
            b1: -norm,
            a1: (k - 1.0) * norm,
        }
    }

    /// Single-pass magnitude response at `f`.
    pub fn magnitude(&self, f: f64, rate: f64) -> f64 {
        let w = 2.0 * PI * f / rate;
        let (c, s) = (w.cos(), w.sin());
        let num = ((self.b0 + self.b1 * c).powi(2) + (self.b1 * s).powi(2)).sqrt();
        let den = ((1.0 + self.a1 * c).powi(2) + (self.a1 * s).powi(2)).sqrt();
        num / den
    }

    /// Steady-state filter memory for a unit step (`lfilter_zi`).
    fn zi(&self) -> f64 {
        (self.b1 - self.a1 * self.b0) / (1.0 + self.a1)
    }

    fn run(&self, x: &[f64], z0: f64) -> Vec<f64> {
        let mut z = z0;
        x.iter()
            .map(|&v| {
                let y = self.b0 * v + z;
                z = self.b1 * v - self.a1 * y;
                y
            })
            .collect()
    }

    /// Zero-phase forward-backward filtering with odd-extension padding and
    /// steady-state initial conditions.
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        if x.is_empty() {
            return Vec::new();
        }
        let pad = 6.min(x.len() - 1);
        let ext = extend_odd(x, pad);
        let zi = self.zi();
        let mut y = self.run(&ext, zi * ext[0]);
        y.reverse();
        let first = y[0];
        let mut y = self.run(&y, zi * first);
        y.reverse();
        y[pad..pad + x.len()].to_vec()
    }
}
