use serde::{Deserialize, Serialize};

use super::features::Dataset;
use super::PredictError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: String,
    pub r: f64,
    /// The feature or the target is constant; `r` is reported as 0.
    pub degenerate: bool,
}

/// Product-moment correlation of every column with the target, strongest first.
pub fn correlations(data: &Dataset) -> Result<Vec<FeatureCorrelation>, PredictError> {
    let n = data.len();
    if n < 2 {
        return Err(PredictError::TooFewSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let ybar = data.targets.iter().sum::<f64>() / nf;
    let syy: f64 = data.targets.iter().map(|y| (y - ybar).powi(2)).sum();
    let mut out: Vec<FeatureCorrelation> = (0..data.arity())
        .map(|j| {
            let xbar = data.rows.iter().map(|r| r[j]).sum::<f64>() / nf;
            let (mut sxx, mut sxy) = (0.0, 0.0);
            for (row, y) in data.rows.iter().zip(&data.targets) {
                let dx = row[j] - xbar;
                sxx += dx * dx;
                sxy += dx * (y - ybar);
            }
            let degenerate = !(sxx > 0.0 && syy > 0.0);
            let r = if degenerate { 0.0 } else { (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0) };
            FeatureCorrelation {
                feature: data.columns[j].clone(),
                r,
                degenerate,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.r.abs()
            .total_cmp(&a.r.abs())
            .then_with(|| a.feature.cmp(&b.feature))
    });
    Ok(out)
}
