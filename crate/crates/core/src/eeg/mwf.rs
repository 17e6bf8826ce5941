use nalgebra::{DMatrix, SymmetricEigen};

use super::{ArtifactMask, EegRecording};
use crate::error::{Error, Result};

/// Relative ridge added to the clean covariance before inversion.
pub const MWF_RIDGE: f64 = 1e-9;

/// Second-moment matrix over the selected samples.
fn covariance(x: &EegRecording, keep: impl Fn(usize) -> bool) -> (DMatrix<f64>, usize) {
    let c = x.channels();
    let mut cov = DMatrix::<f64>::zeros(c, c);
    let mut count = 0usize;
    let mut col = vec![0.0; c];
    for t in 0..x.samples() {
        if !keep(t) {
            continue;
        }
        for (v, ch) in col.iter_mut().zip(x.data()) {
            *v = ch[t];
        }
        for i in 0..c {
            let xi = col[i];
            if xi == 0.0 {
                continue;
            }
            for j in i..c {
                cov[(i, j)] += xi * col[j];
            }
        }
        count += 1;
    }
    for i in 0..c {
        for j in 0..i {
            cov[(i, j)] = cov[(j, i)];
        }
    }
    if count > 0 {
        cov /= count as f64;
    }
    (cov, count)
}

/// Clamps negative eigenvalues of a symmetric matrix to zero.
fn psd_projection(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m);
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose()
}

/// Multichannel Wiener filter artifact suppression driven by
/// `mask.global_flags`. Returns the input unchanged (with a warning) when
/// either the clean or the contaminated region has fewer than twice as
/// many samples as channels.
pub fn mwf_suppress(x: &EegRecording, mask: &ArtifactMask) -> Result<EegRecording> {
    let (c, n) = (x.channels(), x.samples());
    if mask.global_flags.len() != n {
        return Err(Error::Shape(format!(
            "mask covers {} samples, recording has {n}",
            mask.global_flags.len()
        )));
    }
    let flagged = mask.flagged_global();
    let min = 2 * c;
    if flagged < min || n - flagged < min {
        if flagged > 0 {
            log::warn!(
                "trial {}: {flagged} flagged samples, need {min} flagged and clean; skipping Wiener filter",
                x.trial_id
            );
        }
        return Ok(x.clone());
    }
    let flags = &mask.global_flags;
    let (c_clean, _) = covariance(x, |t| !flags[t]);
    let (c_dirty, _) = covariance(x, |t| flags[t]);
    let c_art = psd_projection(&c_dirty - &c_clean);
    if c_art.iter().all(|v| *v == 0.0) {
        return Ok(x.clone());
    }
    let ridge = MWF_RIDGE * c_clean.trace() / c as f64;
    let mut total = &c_clean + &c_art;
    for i in 0..c {
        total[(i, i)] += ridge;
    }
    let inv = total
        .clone()
        .cholesky()
        .map(|ch| ch.inverse())
        .or_else(|| total.try_inverse())
        .ok_or_else(|| Error::Singular("Wiener filter covariance".into()))?;
    let w = inv * &c_art;
    // Artifact estimate per sample is Wᵀx; subtract it.
    let wt = w.transpose();
    let mut out = x.data().to_vec();
    let mut col = vec![0.0; c];
    for t in 0..n {
        for (v, ch) in col.iter_mut().zip(x.data()) {
            *v = ch[t];
        }
        for (i, row) in out.iter_mut().enumerate() {
            let est: f64 = (0..c).map(|j| wt[(i, j)] * col[j]).sum();
            row[t] = col[i] - est;
        }
    }
    Ok(x.replace(out, x.rate()))
}
