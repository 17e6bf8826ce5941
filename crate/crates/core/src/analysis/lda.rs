use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-class linear discriminant on (p_f, p_e) decoder probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    /// `(w_f, w_e)`.
    pub weights: [f64; 2],
    /// Decision threshold `c`: class 1 when `w·p > c`.
    pub offset: f64,
    pub means: [[f64; 2]; 2],
    pub covariance: [[f64; 2]; 2],
}

/// Relative ridge on the pooled covariance.
pub const LDA_RIDGE: f64 = 1e-6;

pub fn lda_fit(points: &[[f64; 2]], labels: &[u8]) -> Result<LdaModel> {
    if points.len() != labels.len() {
        return Err(Error::Shape("points and labels differ in length".into()));
    }
    let mut means = [[0.0; 2]; 2];
    let mut counts = [0usize; 2];
    for (p, &y) in points.iter().zip(labels) {
        if y > 1 {
            return Err(Error::InvalidArgument(format!("label {y} is not 0/1")));
        }
        let k = y as usize;
        counts[k] += 1;
        means[k][0] += p[0];
        means[k][1] += p[1];
    }
    if counts.iter().any(|c| *c < 3) {
        return Err(Error::InsufficientData(format!(
            "each class needs 3 points, got {counts:?}"
        )));
    }
    for k in 0..2 {
        means[k][0] /= counts[k] as f64;
        means[k][1] /= counts[k] as f64;
    }
    let mut cov = [[0.0; 2]; 2];
    for (p, &y) in points.iter().zip(labels) {
        let m = means[y as usize];
        let d = [p[0] - m[0], p[1] - m[1]];
        for i in 0..2 {
            for j in 0..2 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    let dof = (points.len() - 2) as f64;
    for row in &mut cov {
        for v in row.iter_mut() {
            *v /= dof;
        }
    }
    let ridge = LDA_RIDGE * (cov[0][0] + cov[1][1]) / 2.0;
    let (a, b, c, d) = (cov[0][0] + ridge, cov[0][1], cov[1][0], cov[1][1] + ridge);
    let det = a * d - b * c;
    if !(det.abs() > f64::MIN_POSITIVE) {
        return Err(Error::Singular("pooled LDA covariance".into()));
    }
    let diff = [means[1][0] - means[0][0], means[1][1] - means[0][1]];
    let weights = [(d * diff[0] - b * diff[1]) / det, (-c * diff[0] + a * diff[1]) / det];
    let mid = [(means[0][0] + means[1][0]) / 2.0, (means[0][1] + means[1][1]) / 2.0];
    let offset = weights[0] * mid[0] + weights[1] * mid[1];
    Ok(LdaModel {
        weights,
        offset,
        means,
        covariance: cov,
    })
}

impl LdaModel {
    /// Model with the decision boundary `w_f·p_f + w_e·p_e = c`.
    pub fn from_boundary(w_f: f64, w_e: f64, c: f64) -> Self {
        Self {
            weights: [w_f, w_e],
            offset: c,
            means: [[0.0; 2]; 2],
            covariance: [[0.0; 2]; 2],
        }
    }

    /// Signed discriminant score `w·p − c`.
    pub fn score(&self, p_f: f64, p_e: f64) -> f64 {
        self.weights[0] * p_f + self.weights[1] * p_e - self.offset
    }

    /// Weights and threshold divided by `w_f + w_e`, so the weights sum to 1.
    pub fn normalized(&self) -> ([f64; 2], f64) {
        let s = self.weights[0] + self.weights[1];
        ([self.weights[0] / s, self.weights[1] / s], self.offset / s)
    }

    /// Boundary in the form `0.39 p_f + 0.61 p_e = 0.5`.
    pub fn describe(&self) -> String {
        let ([wf, we], c) = self.normalized();
        format!("{wf:.2} p_f + {we:.2} p_e = {c:.2}")
    }
}

/// Composite class probability (logistic of the discriminant score) and class.
pub fn composite_predict(lda: &LdaModel, p_f: f64, p_e: f64) -> (f64, u8) {
    let s = lda.score(p_f, p_e);
    let p = 1.0 / (1.0 + (-s).exp());
    (p, u8::from(s > 0.0))
}
