//! Ensembling, the LDA composite, evaluation reports and statistics.

mod composite;
mod ensemble;
mod evaluate;
mod lda;
mod stats;

pub use composite::{apply_composite, fit_composite};
pub use ensemble::{
    average_predictions, average_sigmoids, bootstrap_averaging_curve, curve_table, participant_average_accuracy,
    CurvePoint, EnsemblePrediction,
};
pub use evaluate::{
    accuracy, evaluate, mode_name, predict, EvalMode, EvalReport, EvalSettings, ExamplePrediction, ParticipantAccuracy,
};
pub use lda::{composite_predict, lda_fit, LdaModel, LDA_RIDGE};
pub use stats::{
    mean_with_margin, pearson_corr, pitch_accuracy_regression, random_classifier_interval, t_test, Regression,
    StatsResult, Tails,
};
