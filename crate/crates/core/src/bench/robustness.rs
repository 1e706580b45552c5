use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::records::{generate_records, RecordConfig};
use crate::predictor::{
    evaluate, fit, tune_alpha, Dataset, FeatureSchema, FitSpec, PredictError, TuneConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessConfig {
    pub records: RecordConfig,
    pub trials: usize,
    pub outlier_fraction: f64,
    /// Corrupted durations are multiplied by this.
    pub outlier_multiplier: f64,
    /// Trailing share of rows kept clean for scoring.
    pub holdout_fraction: f64,
    pub tune: TuneConfig,
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self {
            records: RecordConfig::default(),
            trials: 50,
            outlier_fraction: 0.05,
            outlier_multiplier: 10.0,
            holdout_fraction: 0.2,
            tune: TuneConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub trials: usize,
    pub outlier_fraction: f64,
    /// `(max - min) / median` of holdout MAE across trials, percent.
    pub ridge_mae_spread: f64,
    pub lasso_mae_spread: f64,
    pub ridge_mae: Vec<f64>,
    pub lasso_mae: Vec<f64>,
    pub ridge_alpha: Vec<f64>,
    pub lasso_alpha: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobustnessError {
    #[error("need at least 10 trials, got {0}")]
    TooFewTrials(usize),
    #[error("outlier fraction must lie in [0, 1), got {0}")]
    BadFraction(f64),
    #[error(transparent)]
    Predict(#[from] PredictError),
}

/// Relative spread `(max - min) / median` in percent.
pub fn spread_percent(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    100.0 * (v[n - 1] - v[0]) / median
}

struct TrialResult {
    ridge_mae: f64,
    lasso_mae: f64,
    ridge_alpha: f64,
    lasso_alpha: f64,
}

/// Monte-Carlo outlier experiment on one planted dataset.
///
/// Each trial corrupts a fresh seeded subset of the training rows, tunes and
/// fits ridge and lasso, and scores both on the clean holdout.
pub fn robustness_trial(cfg: &RobustnessConfig) -> Result<RobustnessReport, RobustnessError> {
    if cfg.trials < 10 {
        return Err(RobustnessError::TooFewTrials(cfg.trials));
    }
    if !(0.0..1.0).contains(&cfg.outlier_fraction) {
        return Err(RobustnessError::BadFraction(cfg.outlier_fraction));
    }
    let (records, _) = generate_records(&cfg.records);
    let data = Dataset::from_records(&records, &FeatureSchema::default())?;
    let n_hold = ((data.len() as f64) * cfg.holdout_fraction).round() as usize;
    let n_train = data.len() - n_hold;
    let train: Vec<usize> = (0..n_train).collect();
    let hold: Vec<usize> = (n_train..data.len()).collect();
    let clean = data.subset(&train);
    let holdout = data.subset(&hold);
    let n_bad = ((n_train as f64) * cfg.outlier_fraction).round() as usize;

    let results = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.records.seed ^ (0xa5a5_0000 + t as u64));
            let mut corrupted = clean.clone();
            for i in sample(&mut rng, n_train, n_bad) {
                corrupted.targets[i] *= cfg.outlier_multiplier;
            }
            let score = |base: FitSpec| -> Result<(f64, f64), PredictError> {
                let tuned = tune_alpha(&corrupted, base, &cfg.tune)?;
                let model = fit(&corrupted, &base.with_alpha(tuned.best_alpha))?;
                Ok((evaluate(&model, &holdout)?.mae, tuned.best_alpha))
            };
            let (ridge_mae, ridge_alpha) = score(FitSpec::ridge(1.0))?;
            let (lasso_mae, lasso_alpha) = score(FitSpec::lasso(1.0))?;
            Ok(TrialResult {
                ridge_mae,
                lasso_mae,
                ridge_alpha,
                lasso_alpha,
            })
        })
        .collect::<Result<Vec<_>, PredictError>>()?;

    let ridge_mae: Vec<f64> = results.iter().map(|r| r.ridge_mae).collect();
    let lasso_mae: Vec<f64> = results.iter().map(|r| r.lasso_mae).collect();
    Ok(RobustnessReport {
        trials: cfg.trials,
        outlier_fraction: cfg.outlier_fraction,
        ridge_mae_spread: spread_percent(&ridge_mae),
        lasso_mae_spread: spread_percent(&lasso_mae),
        ridge_alpha: results.iter().map(|r| r.ridge_alpha).collect(),
        lasso_alpha: results.iter().map(|r| r.lasso_alpha).collect(),
        ridge_mae,
        lasso_mae,
    })
}
