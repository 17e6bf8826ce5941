use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SplitFractions;
use crate::error::{Error, Result};
use crate::model::DecoderConfig;
use crate::signal::FeatureKind;
use crate::train::TrainConfig;

/// Every tunable of a run, as one flat TOML table. Unknown keys are errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub feature_kind: FeatureKind,
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub segment_seconds: f64,
    pub segment_stride_seconds: f64,
    pub gap_seconds: f64,
    pub validation_stride_seconds: f64,
    pub split_train: f64,
    pub split_validation: f64,
    pub split_test: f64,
    /// Standardize each trial's channels before training/evaluation.
    pub standardize: bool,
    pub eval_segment_seconds: Vec<f64>,
    pub ensemble_draws: usize,
    pub ensemble_sizes: Vec<usize>,
    pub glitch_threshold_volts: f64,
    pub frontal_factor: f64,
    pub frontal_channels: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let s = SplitFractions::default();
        Self {
            seed: 0,
            feature_kind: FeatureKind::Envelope,
            batch_size: t.batch_size,
            initial_lr: t.initial_lr,
            lr_decay_every: t.lr_decay_every,
            lr_decay_factor: t.lr_decay_factor,
            patience: t.patience,
            max_epochs: t.max_epochs,
            segment_seconds: t.segment_seconds,
            segment_stride_seconds: t.segment_stride_seconds,
            gap_seconds: t.gap_seconds,
            validation_stride_seconds: t.validation_stride_seconds,
            split_train: s.train,
            split_validation: s.validation,
            split_test: s.test,
            standardize: true,
            eval_segment_seconds: vec![3.0, 5.0, 10.0],
            ensemble_draws: 50,
            ensemble_sizes: vec![1, 2, 5, 10, 25],
            glitch_threshold_volts: 500e-6,
            frontal_factor: 5.0,
            frontal_channels: crate::eeg::layout::FRONTAL_CHANNELS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        self.split().validate()?;
        self.decoder_config().validate()?;
        if self.eval_segment_seconds.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Config("evaluation segment lengths must be positive".into()));
        }
        if self.ensemble_draws == 0 || self.ensemble_sizes.contains(&0) {
            return Err(Error::Config("ensemble draws and sizes must be positive".into()));
        }
        if !(self.glitch_threshold_volts > 0.0) || !(self.frontal_factor > 0.0) {
            return Err(Error::Config("artifact thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            initial_lr: self.initial_lr,
            lr_decay_every: self.lr_decay_every,
            lr_decay_factor: self.lr_decay_factor,
            patience: self.patience,
            max_epochs: self.max_epochs,
            segment_seconds: self.segment_seconds,
            segment_stride_seconds: self.segment_stride_seconds,
            gap_seconds: self.gap_seconds,
            validation_stride_seconds: self.validation_stride_seconds,
            seed: self.seed,
        }
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        DecoderConfig {
            segment_seconds: self.segment_seconds,
            ..DecoderConfig::new(self.feature_kind)
        }
    }

    pub fn split(&self) -> SplitFractions {
        SplitFractions {
            train: self.split_train,
            validation: self.split_validation,
            test: self.split_test,
        }
    }
}
