use serde::{Deserialize, Serialize};

use super::features::Dataset;
use super::linear::LinearModel;
use super::PredictError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub mae: f64,
    pub mse: f64,
    /// Percent, over samples with a positive target; absent when there are none.
    pub mape: Option<f64>,
    pub rmse: f64,
    pub n: usize,
}

pub fn regression_metrics(truth: &[f64], predicted: &[f64]) -> Result<RegressionMetrics, PredictError> {
    if truth.len() != predicted.len() {
        return Err(PredictError::ArityMismatch {
            expected: truth.len(),
            got: predicted.len(),
        });
    }
    let n = truth.len();
    if n == 0 {
        return Err(PredictError::TooFewSamples { needed: 1, got: 0 });
    }
    let nf = n as f64;
    let (mut abs, mut sq, mut pct, mut valid) = (0.0, 0.0, 0.0, 0usize);
    for (&y, &p) in truth.iter().zip(predicted) {
        let e = y - p;
        abs += e.abs();
        sq += e * e;
        if y > 0.0 {
            pct += 100.0 * (e / y).abs();
            valid += 1;
        }
    }
    let mse = sq / nf;
    Ok(RegressionMetrics {
        mae: abs / nf,
        mse,
        mape: (valid > 0).then(|| pct / valid as f64),
        rmse: mse.sqrt(),
        n,
    })
}

pub fn evaluate(model: &LinearModel, data: &Dataset) -> Result<RegressionMetrics, PredictError> {
    let predicted = data
        .rows
        .iter()
        .map(|x| model.predict(x))
        .collect::<Result<Vec<_>, _>>()?;
    regression_metrics(&data.targets, &predicted)
}

/// Mean absolute error without the other metrics.
pub fn mean_absolute_error(truth: &[f64], predicted: &[f64]) -> f64 {
    truth.iter().zip(predicted).map(|(y, p)| (y - p).abs()).sum::<f64>() / truth.len() as f64
}
