use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::evaluate::ExamplePrediction;
use super::stats::mean_with_margin;
use crate::error::{Error, Result};

/// Mean of several instances' sigmoid outputs, example by example.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsemblePrediction {
    pub instance_ids: Vec<usize>,
    pub per_instance: Vec<Vec<f64>>,
    pub averaged: Vec<f64>,
}

impl EnsemblePrediction {
    /// Class decisions; an exact 0.5 goes to class 0.
    pub fn decisions(&self) -> Vec<u8> {
        self.averaged.iter().map(|p| u8::from(*p > 0.5)).collect()
    }
}

pub fn average_sigmoids(predictions: &[Vec<f64>]) -> Result<EnsemblePrediction> {
    let first = predictions
        .first()
        .ok_or_else(|| Error::InvalidArgument("no instances to average".into()))?;
    if predictions.iter().any(|p| p.len() != first.len()) {
        return Err(Error::Shape("instances predict different example counts".into()));
    }
    let n = predictions.len() as f64;
    let averaged = (0..first.len())
        .map(|i| predictions.iter().map(|p| p[i]).sum::<f64>() / n)
        .collect();
    Ok(EnsemblePrediction {
        instance_ids: (0..predictions.len()).collect(),
        per_instance: predictions.to_vec(),
        averaged,
    })
}

/// Averages aligned per-instance prediction lists into one list.
pub fn average_predictions(instances: &[Vec<ExamplePrediction>]) -> Result<Vec<ExamplePrediction>> {
    let probs: Vec<Vec<f64>> = instances
        .iter()
        .map(|ps| ps.iter().map(|p| p.probability).collect())
        .collect();
    let avg = average_sigmoids(&probs)?;
    let template = &instances[0];
    for inst in instances {
        for (a, b) in inst.iter().zip(template) {
            if a.trial != b.trial || a.onset_seconds != b.onset_seconds {
                return Err(Error::Shape("instances were evaluated on different examples".into()));
            }
        }
    }
    Ok(template
        .iter()
        .zip(avg.averaged)
        .map(|(t, p)| ExamplePrediction {
            probability: p,
            ..t.clone()
        })
        .collect())
}

/// Mean of per-participant accuracies.
pub fn participant_average_accuracy(preds: &[ExamplePrediction]) -> f64 {
    let mut acc: std::collections::BTreeMap<&str, (usize, usize)> = Default::default();
    for p in preds {
        let e = acc.entry(p.participant.as_str()).or_default();
        e.0 += usize::from(p.correct());
        e.1 += 1;
    }
    let v: Vec<f64> = acc.values().map(|(ok, n)| *ok as f64 / *n as f64).collect();
    mean_with_margin(&v, 0.95).0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

/// For every `n`, draws `draws` subsets of `n` distinct instances, averages
/// their outputs and records the participant-average accuracy.
pub fn bootstrap_averaging_curve(
    instances: &[Vec<ExamplePrediction>],
    n_values: &[usize],
    draws: usize,
    seed: u64,
) -> Result<Vec<CurvePoint>> {
    if draws == 0 {
        return Err(Error::InvalidArgument("draws must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    n_values
        .iter()
        .map(|&n| {
            if n == 0 || n > instances.len() {
                return Err(Error::InvalidArgument(format!(
                    "cannot draw {n} of {} instances",
                    instances.len()
                )));
            }
            let accs = (0..draws)
                .map(|_| {
                    let pick: Vec<Vec<ExamplePrediction>> = sample(&mut rng, instances.len(), n)
                        .into_iter()
                        .map(|i| instances[i].clone())
                        .collect();
                    Ok(participant_average_accuracy(&average_predictions(&pick)?))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(CurvePoint {
                n,
                mean: accs.iter().sum::<f64>() / accs.len() as f64,
                min: accs.iter().copied().fold(f64::INFINITY, f64::min),
                max: accs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        })
        .collect()
}

/// Two-column `n accuracy` text (plus min/max) for plotting.
pub fn curve_table(points: &[CurvePoint]) -> String {
    let mut s = String::from("# n mean min max\n");
    for p in points {
        s.push_str(&format!("{} {:.6} {:.6} {:.6}\n", p.n, p.mean, p.min, p.max));
    }
    s
}
