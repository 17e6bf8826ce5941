use super::evaluate::ExamplePrediction;
use super::lda::{composite_predict, lda_fit, LdaModel};
use crate::error::{Error, Result};

fn check_aligned(ffr: &[ExamplePrediction], env: &[ExamplePrediction]) -> Result<()> {
    if ffr.len() != env.len() {
        return Err(Error::Shape(format!(
            "{} FFR predictions vs {} envelope predictions",
            ffr.len(),
            env.len()
        )));
    }
    for (f, e) in ffr.iter().zip(env) {
        if f.trial != e.trial || (f.onset_seconds - e.onset_seconds).abs() > 1e-9 {
            return Err(Error::Shape(format!(
                "predictions not aligned: {}@{} vs {}@{}",
                f.trial, f.onset_seconds, e.trial, e.onset_seconds
            )));
        }
    }
    Ok(())
}

/// Fits the composite on aligned predictions. Every example is used twice:
/// as given (class 1) and with the candidates swapped, `1 − p` (class 0).
pub fn fit_composite(ffr: &[ExamplePrediction], env: &[ExamplePrediction]) -> Result<LdaModel> {
    check_aligned(ffr, env)?;
    let mut points = Vec::with_capacity(2 * ffr.len());
    let mut labels = Vec::with_capacity(2 * ffr.len());
    for (f, e) in ffr.iter().zip(env) {
        points.push([f.probability, e.probability]);
        labels.push(1);
        points.push([1.0 - f.probability, 1.0 - e.probability]);
        labels.push(0);
    }
    lda_fit(&points, &labels)
}

/// Composite predictions on aligned decoder outputs.
pub fn apply_composite(
    lda: &LdaModel,
    ffr: &[ExamplePrediction],
    env: &[ExamplePrediction],
) -> Result<Vec<ExamplePrediction>> {
    check_aligned(ffr, env)?;
    Ok(ffr
        .iter()
        .zip(env)
        .map(|(f, e)| ExamplePrediction {
            probability: composite_predict(lda, f.probability, e.probability).0,
            ..e.clone()
        })
        .collect())
}
