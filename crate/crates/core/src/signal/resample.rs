//! Rational-ratio polyphase resampling with a Kaiser-windowed sinc.

use crate::error::{Error, Result};

use super::extend_odd;

/// Kaiser window shape parameter.
pub const KAISER_BETA: f64 = 8.6;
/// Prototype taps per polyphase branch.
pub const TAPS_PER_PHASE: usize = 64;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn as_integer_rate(rate: f64) -> Result<u64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidArgument(format!("rate must be positive, got {rate}")));
    }
    let r = rate.round();
    if (rate - r).abs() > 1e-9 * rate.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "rate {rate} Hz is not an integer; only rational ratios of integer rates are supported"
        )));
    }
    Ok(r as u64)
}

/// Up/down factors for a conversion.
pub fn ratio(source_rate: f64, target_rate: f64) -> Result<(usize, usize)> {
    let s = as_integer_rate(source_rate)?;
    let t = as_integer_rate(target_rate)?;
    let g = gcd(s, t);
    Ok(((t / g) as usize, (s / g) as usize))
}

/// Anti-aliasing prototype for up `l` / down `m`, gain `l`, length
/// `TAPS_PER_PHASE · max(l, m) + 1`.
pub fn design_prototype(l: usize, m: usize) -> Vec<f64> {
    let factor = l.max(m);
    let half = TAPS_PER_PHASE / 2 * factor;
    let n = 2 * half + 1;
    let cutoff = 0.5 / factor as f64; // cycles per sample at the upsampled rate
    let i0b = bessel_i0(KAISER_BETA);
    (0..n)
        .map(|i| {
            let t = i as f64 - half as f64;
            let arg = 2.0 * cutoff * t;
            let sinc = if t == 0.0 {
                1.0
            } else {
                (std::f64::consts::PI * arg).sin() / (std::f64::consts::PI * arg)
            };
            let ratio = t / half as f64;
            let w = bessel_i0(KAISER_BETA * (1.0 - ratio * ratio).max(0.0).sqrt()) / i0b;
            l as f64 * 2.0 * cutoff * sinc * w
        })
        .collect()
}

/// Resamples `x` from `source_rate` to `target_rate`.
///
/// The output has `ceil(len · target / source)` samples aligned to the
/// input's first sample. Edges are extended by odd reflection so a
/// sinusoid stays smooth through the boundary.
pub fn resample(x: &[f64], source_rate: f64, target_rate: f64) -> Result<Vec<f64>> {
    let (l, m) = ratio(source_rate, target_rate)?;
    if l == m {
        return Ok(x.to_vec());
    }
    if x.is_empty() {
        return Ok(Vec::new());
    }
    let h = design_prototype(l, m);
    Ok(resample_with(x, l, m, &h))
}

/// Resamples every row of a channel-major buffer (shared prototype).
pub fn resample_rows(rows: &[Vec<f64>], source_rate: f64, target_rate: f64) -> Result<Vec<Vec<f64>>> {
    let (l, m) = ratio(source_rate, target_rate)?;
    if l == m {
        return Ok(rows.to_vec());
    }
    let h = design_prototype(l, m);
    Ok(rows
        .iter()
        .map(|x| {
            if x.is_empty() {
                Vec::new()
            } else {
                resample_with(x, l, m, &h)
            }
        })
        .collect())
}

fn resample_with(x: &[f64], l: usize, m: usize, h: &[f64]) -> Vec<f64> {
    let n_taps = h.len();
    let half = (n_taps - 1) / 2;
    let out_len = (x.len() * l).div_ceil(m);
    let pad = n_taps / l + 2;
    let ext = extend_odd(x, pad);
    let mut out = Vec::with_capacity(out_len);
    for k in 0..out_len {
        // Upsampled-domain index of the filter centre.
        let base = k * m + half;
        let i_hi = base / l;
        let phase = base - i_hi * l;
        let mut acc = 0.0;
        let mut n = phase;
        // i = i_hi - j in input index space, shifted by `pad` in `ext`.
        let mut idx = (i_hi + pad) as isize;
        while n < n_taps {
            if idx >= 0 && (idx as usize) < ext.len() {
                acc += h[n] * ext[idx as usize];
            }
            n += l;
            idx -= 1;
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        let ma = a.iter().sum::<f64>() / n as f64;
        let mb = b.iter().sum::<f64>() / n as f64;
        let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
        for (x, y) in a.iter().zip(b) {
            sab += (x - ma) * (y - mb);
            saa += (x - ma) * (x - ma);
            sbb += (y - mb) * (y - mb);
        }
        sab / (saa * sbb).sqrt()
    }

    #[test]
    fn identity_rate_is_a_copy() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(resample(&x, 64.0, 64.0).unwrap(), x);
    }

    #[test]
    fn sine_survives_decimation() {
        let x: Vec<f64> = (0..5120).map(|n| (2.0 * PI * 10.0 * n as f64 / 512.0).sin()).collect();
        let y = resample(&x, 512.0, 64.0).unwrap();
        assert_eq!(y.len(), 640);
        let truth: Vec<f64> = (0..640).map(|n| (2.0 * PI * 10.0 * n as f64 / 64.0).sin()).collect();
        assert!(corr(&y, &truth) > 0.999);
    }

    #[test]
    fn output_length_follows_the_rate_ratio() {
        let x = vec![0.0; 480_000];
        assert_eq!(resample(&x, 48_000.0, 64.0).unwrap().len(), 640);
        assert_eq!(resample(&vec![0.0; 1000], 500.0, 512.0).unwrap().len(), 1024);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(resample(&[1.0], 0.0, 64.0).is_err());
        assert!(resample(&[1.0], 64.0, -1.0).is_err());
        assert!(resample(&[1.0], 64.5, 64.0).is_err());
    }

    #[test]
    fn round_trip_keeps_band_limited_content() {
        // Content below 80 % of the 64 Hz Nyquist.
        let x: Vec<f64> = (0..4096)
            .map(|n| {
                let t = n as f64 / 256.0;
                (2.0 * PI * 3.0 * t).sin()
                    + 0.5 * (2.0 * PI * 11.0 * t + 0.3).cos()
                    + 0.25 * (2.0 * PI * 25.0 * t).sin()
            })
            .collect();
        let down = resample(&x, 256.0, 64.0).unwrap();
        let back = resample(&down, 64.0, 256.0).unwrap();
        assert!(corr(&x, &back) > 0.999, "{}", corr(&x, &back));
    }
}
