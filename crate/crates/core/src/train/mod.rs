//! Training: hard-negative example sampling, balanced batching, Adam with
//! a step learning-rate schedule, early stopping and fine-tuning.

mod adam;
mod early_stop;
mod examples;

pub use adam::{adam_step, AdamState};
pub use early_stop::EarlyStopState;
pub use examples::{balanced_batches, enumerate_examples, ExamplePair, LabeledExample, SegmentPlan};

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autodiff::kernels::bce;
use crate::data::{write_atomic, Trial};
use crate::error::{Error, Result};
use crate::model::{save_checkpoint, DecoderParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub segment_seconds: f64,
    pub segment_stride_seconds: f64,
    pub gap_seconds: f64,
    /// Stride between validation examples (non-overlapping by default).
    pub validation_stride_seconds: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            initial_lr: 1e-3,
            lr_decay_every: 7,
            lr_decay_factor: 10.0,
            patience: 5,
            max_epochs: 50,
            segment_seconds: 3.0,
            segment_stride_seconds: 1.0,
            gap_seconds: 1.0,
            validation_stride_seconds: 3.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size < 2 || !self.batch_size.is_multiple_of(2) {
            return bad("batch_size must be a positive even number");
        }
        if !(self.initial_lr >= 0.0) || !(self.lr_decay_factor > 0.0) || self.lr_decay_every == 0 {
            return bad("learning-rate settings must be positive");
        }
        if self.patience == 0 {
            return bad("patience must be positive");
        }
        if !(self.segment_seconds > 0.0)
            || !(self.segment_stride_seconds > 0.0)
            || self.segment_stride_seconds > self.segment_seconds
            || !(self.gap_seconds >= 0.0)
            || !(self.validation_stride_seconds > 0.0)
        {
            return bad("segment, stride and gap must be positive with stride <= segment");
        }
        Ok(())
    }

    pub fn train_plan(&self, rate: f64) -> SegmentPlan {
        SegmentPlan::from_seconds(
            self.segment_seconds,
            self.segment_stride_seconds,
            self.gap_seconds,
            rate,
        )
    }

    pub fn validation_plan(&self, rate: f64) -> SegmentPlan {
        SegmentPlan::from_seconds(
            self.segment_seconds,
            self.validation_stride_seconds,
            self.gap_seconds,
            rate,
        )
    }
}

/// `initial_lr / factor^floor(epoch / every)` for a zero-based epoch.
pub fn lr_schedule(epoch: usize, cfg: &TrainConfig) -> f64 {
    cfg.initial_lr / cfg.lr_decay_factor.powi((epoch / cfg.lr_decay_every) as i32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// One-based epoch number.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub lr: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: DecoderParams<f32>,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
    pub skipped_updates: u64,
}

impl FitResult {
    /// Tab-separated `epoch train_loss val_loss lr` rows with a header.
    pub fn metrics_table(&self) -> String {
        let mut s = String::from("epoch\ttrain_loss\tval_loss\tlr\n");
        for r in &self.history {
            let _ = writeln!(s, "{}\t{:.6}\t{:.6}\t{:e}", r.epoch, r.train_loss, r.val_loss, r.lr);
        }
        s
    }

    /// Writes `config.toml`, `metrics.tsv` and `best.mmd` into `dir`.
    pub fn write_run_dir(&self, dir: &Path, config_snapshot: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_atomic(&dir.join("config.toml"), config_snapshot.as_bytes())?;
        write_atomic(&dir.join("metrics.tsv"), self.metrics_table().as_bytes())?;
        save_checkpoint(&self.params, &dir.join("best.mmd"))
    }
}

fn example_tensors(
    trials: &[Trial],
    pair: &ExamplePair,
    matched_first: bool,
) -> (
    crate::autodiff::Tensor<f32>,
    crate::autodiff::Tensor<f32>,
    crate::autodiff::Tensor<f32>,
) {
    let t = &trials[pair.trial];
    let eeg = t.eeg_segment(pair.matched_onset, pair.len);
    let m = t.stimulus_segment(pair.matched_onset, pair.len);
    let mm = t.stimulus_segment(pair.mismatched_onset, pair.len);
    if matched_first {
        (eeg, m, mm)
    } else {
        (eeg, mm, m)
    }
}

fn all_examples(trials: &[Trial], plan_for: impl Fn(f64) -> SegmentPlan) -> Vec<ExamplePair> {
    trials
        .iter()
        .enumerate()
        .flat_map(|(i, t)| enumerate_examples(i, t.samples(), plan_for(t.rate())))
        .collect()
}

/// Mean BCE of the matched-first validation examples.
pub fn validation_loss(params: &DecoderParams<f32>, trials: &[Trial], cfg: &TrainConfig) -> Result<f64> {
    let examples = all_examples(trials, |r| cfg.validation_plan(r));
    if examples.is_empty() {
        return Err(Error::InsufficientData(
            "validation trials are too short for a single example".into(),
        ));
    }
    let losses = examples
        .par_iter()
        .map(|pair| {
            let (eeg, a, b) = example_tensors(trials, pair, true);
            let p = params.forward(&eeg, &a, &b)?.probability;
            Ok(bce(p as f64, 1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(losses.iter().sum::<f64>() / losses.len() as f64)
}

/// Mean loss and gradient over one batch. Per-example gradients may be
/// computed in parallel; they are summed in batch order.
fn batch_gradient(
    params: &DecoderParams<f32>,
    trials: &[Trial],
    batch: &[LabeledExample],
) -> Result<(f64, Vec<Vec<f32>>)> {
    let parts = batch
        .par_iter()
        .map(|ex| {
            let (eeg, a, b) = example_tensors(trials, &ex.pair, ex.label == 1);
            params.loss_and_grad(eeg, a, b, f32::from(ex.label))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0f64;
    let mut sum: Vec<Vec<f32>> = params.arrays().iter().map(|a| vec![0.0; a.len()]).collect();
    for (loss, g) in &parts {
        total += *loss as f64;
        for (s, gi) in sum.iter_mut().zip(g) {
            for (a, b) in s.iter_mut().zip(gi) {
                *a += b;
            }
        }
    }
    let scale = 1.0 / batch.len() as f32;
    sum.iter_mut().flatten().for_each(|v| *v *= scale);
    Ok((total / batch.len() as f64, sum))
}

/// Trains from `init` and returns the parameters with the best validation
/// loss. Deterministic for a given `cfg.seed`.
pub fn fit(init: &DecoderParams<f32>, train: &[Trial], val: &[Trial], cfg: &TrainConfig) -> Result<FitResult> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::InsufficientData(
            "training and validation trials are required".into(),
        ));
    }
    let mut result = FitResult {
        params: init.clone(),
        history: Vec::new(),
        best_epoch: None,
        stopped_early: false,
        skipped_updates: 0,
    };
    if cfg.max_epochs == 0 {
        return Ok(result);
    }
    let per_trial: Vec<Vec<ExamplePair>> = train
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let ex = enumerate_examples(i, t.samples(), cfg.train_plan(t.rate()));
            if ex.is_empty() {
                log::warn!("trial {} is too short for a training example", t.trial_id);
            }
            ex
        })
        .collect();
    let total: usize = per_trial.iter().map(Vec::len).sum();
    if total < cfg.batch_size {
        return Err(Error::InsufficientData(format!(
            "{total} training examples, need at least one batch of {}",
            cfg.batch_size
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = init.clone();
    let sizes: Vec<usize> = params.arrays().iter().map(|a| a.len()).collect();
    let mut adam = AdamState::<f32>::new(&sizes);
    let mut stop = EarlyStopState::new(cfg.patience);
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 0..cfg.max_epochs {
        let lr = lr_schedule(epoch, cfg);
        order.shuffle(&mut rng);
        let epoch_examples: Vec<ExamplePair> = order.iter().flat_map(|&i| per_trial[i].iter().copied()).collect();
        let batches = balanced_batches(&epoch_examples, cfg.batch_size, &mut rng);
        let mut loss_sum = 0.0;
        for batch in &batches {
            let (loss, grads) = batch_gradient(&params, train, batch)?;
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch: epoch + 1, loss });
            }
            loss_sum += loss;
            let mut slices: Vec<&mut [f32]> = params.arrays_mut().iter_mut().map(|a| a.data_mut()).collect();
            adam_step(&mut slices, &grads, &mut adam, lr);
        }
        if params.arrays().iter().any(|a| a.data().iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged {
                epoch: epoch + 1,
                loss: f64::NAN,
            });
        }
        let train_loss = loss_sum / batches.len() as f64;
        let val_loss = validation_loss(&params, val, cfg)?;
        if !val_loss.is_finite() {
            return Err(Error::Diverged {
                epoch: epoch + 1,
                loss: val_loss,
            });
        }
        log::info!("epoch {}: train {train_loss:.4} val {val_loss:.4} lr {lr:e}", epoch + 1);
        result.history.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            val_loss,
            lr,
        });
        if stop.update(epoch + 1, val_loss, &params) {
            result.stopped_early = true;
            break;
        }
    }
    result.best_epoch = stop.best_epoch;
    result.params = stop.best.unwrap_or(params);
    result.skipped_updates = adam.skipped;
    Ok(result)
}

/// Continues training `population` on one participant's trials with a
/// fresh optimizer and learning-rate schedule. The input is not modified.
pub fn fine_tune(
    population: &DecoderParams<f32>,
    train: &[Trial],
    val: &[Trial],
    cfg: &TrainConfig,
) -> Result<FitResult> {
    fit(population, train, val, cfg)
}
