//! Duration prediction from historical runs: feature encoding, linear models,
//! cross-validated penalty tuning, metrics and duration-table construction.

mod baseline;
mod correlation;
mod features;
mod linear;
mod metrics;
mod table;
mod tune;

use thiserror::Error;

pub use baseline::HistoricalMeanModel;
pub use correlation::{correlations, FeatureCorrelation};
pub use features::{extract_features, Dataset, Feature, FeatureSchema, JobFeatures, RunRecord, TaskType};
pub use linear::{fit, predict, Family, FitSpec, LinearModel, Moments, CD_MAX_SWEEPS, CD_TOLERANCE, DEFAULT_FLOOR_S};
pub use metrics::{evaluate, mean_absolute_error, regression_metrics, RegressionMetrics};
pub use table::{build_duration_table, config_features, MIN_CELL_SECONDS};
pub use tune::{fine_grid, fold_assignment, tune_alpha, AlphaScore, CrossValidator, TuneConfig, TuneResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("missing feature `{0}`")]
    MissingFeature(String),
    #[error("expected {expected} values, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("design matrix is rank deficient; use a positive penalty")]
    DegenerateDesign,
    #[error("no sample has a positive target")]
    NoValidSamples,
    #[error("{0}")]
    InvalidSpec(String),
}
