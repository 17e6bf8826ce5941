//! Trials, file formats, manifests, run configuration and the synthetic
//! dataset generator.

mod config;
mod manifest;
pub mod synth;
mod timeseries;
mod trial;

pub use config::RunConfig;
pub use manifest::{load_record, synth_generate, write_preprocessed, DatasetManifest, Stage, TrialRecord};
pub use synth::{synth_trials, Narrator, Sex, SynthSpec, SynthTrial};
pub use timeseries::{
    decode_timeseries, encode_timeseries, read_timeseries, write_atomic, write_timeseries, Timeseries, TimeseriesHeader,
};
pub use trial::{split_trials, Condition, Portion, SplitFractions, Splits, Trial};
