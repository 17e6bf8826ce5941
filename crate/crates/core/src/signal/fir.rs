//! Windowed-sinc FIR design and zero-phase (forward-backward) application.

use std::f64::consts::PI;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};

use super::extend_odd;

fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

/// Hamming-windowed sinc lowpass with unit DC gain.
fn lowpass(taps: usize, cutoff: f64, rate: f64) -> Vec<f64> {
    let half = (taps - 1) as f64 / 2.0;
    let fc = cutoff / rate;
    let w = hamming(taps);
    let mut h: Vec<f64> = (0..taps)
        .map(|i| {
            let t = i as f64 - half;
            let s = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * t).sin() / (PI * t)
            };
            s * w[i]
        })
        .collect();
    let dc: f64 = h.iter().sum();
    h.iter_mut().for_each(|v| *v /= dc);
    h
}

/// Frequency response magnitude of a linear-phase FIR at `f`.
pub fn fir_magnitude(h: &[f64], f: f64, rate: f64) -> f64 {
    let w = 2.0 * PI * f / rate;
    let (mut re, mut im) = (0.0, 0.0);
    for (n, &c) in h.iter().enumerate() {
        re += c * (w * n as f64).cos();
        im -= c * (w * n as f64).sin();
    }
    (re * re + im * im).sqrt()
}

/// Type-I bandpass (or lowpass when `lo == 0`) with exactly zero DC gain for
/// bandpass designs and unit gain at the band centre.
pub fn design_bandpass(lo: f64, hi: f64, taps: usize, rate: f64) -> Result<Vec<f64>> {
    if taps.is_multiple_of(2) || taps == 0 {
        return Err(Error::InvalidArgument(format!(
            "FIR length must be odd (type I), got {taps}"
        )));
    }
    if !(lo >= 0.0 && lo < hi && hi < rate / 2.0) {
        return Err(Error::InvalidArgument(format!(
            "band {lo}..{hi} Hz must satisfy 0 <= lo < hi < {} Hz",
            rate / 2.0
        )));
    }
    if lo == 0.0 {
        return Ok(lowpass(taps, hi, rate));
    }
    let upper = lowpass(taps, hi, rate);
    let lower = lowpass(taps, lo, rate);
    let mut h: Vec<f64> = upper.iter().zip(&lower).map(|(a, b)| a - b).collect();
    let g = fir_magnitude(&h, (lo + hi) / 2.0, rate);
    h.iter_mut().for_each(|v| *v /= g);
    Ok(h)
}

/// Centred ("same") convolution with an odd-length kernel.
pub fn convolve_same(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let half = kernel.len() / 2;
    if x.is_empty() {
        return Vec::new();
    }
    if x.len().saturating_mul(kernel.len()) < 1 << 16 {
        return (0..x.len())
            .map(|n| {
                let mut acc = 0.0;
                for (k, &h) in kernel.iter().enumerate() {
                    let idx = n as isize + half as isize - k as isize;
                    if idx >= 0 && (idx as usize) < x.len() {
                        acc += h * x[idx as usize];
                    }
                }
                acc
            })
            .collect();
    }
    let full = x.len() + kernel.len() - 1;
    let size = full.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    a.resize(size, Complex::new(0.0, 0.0));
    let mut b: Vec<Complex<f64>> = kernel.iter().map(|&v| Complex::new(v, 0.0)).collect();
    b.resize(size, Complex::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (u, v) in a.iter_mut().zip(&b) {
        *u *= v;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a[half..half + x.len()].iter().map(|c| c.re * scale).collect()
}

/// Applies a symmetric FIR forward and then backward in time.
///
/// The input is extended by one filter length on each side (odd
/// reflection) and cropped afterwards, so the output length equals the
/// input length and the net phase is zero.
pub fn filtfilt_fir(x: &[f64], h: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let pad = h.len().min(x.len() - 1);
    let ext = extend_odd(x, pad);
    // Two passes of a symmetric kernel equal one pass of its self-convolution.
    let hh = convolve_same_full(h, h);
    let y = convolve_same(&ext, &hh);
    y[pad..pad + x.len()].to_vec()
}

fn convolve_same_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &u) in a.iter().enumerate() {
        for (j, &v) in b.iter().enumerate() {
            out[i + j] += u * v;
        }
    }
    out
}

/// Zero-phase windowed-sinc (Hamming) bandpass of `x` sampled at `rate`.
pub fn fir_zero_phase(x: &[f64], rate: f64, band: (f64, f64), taps: usize) -> Result<Vec<f64>> {
    let h = design_bandpass(band.0, band.1, taps, rate)?;
    Ok(filtfilt_fir(x, &h))
}
