use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::features::RunRecord;
use super::PredictError;

/// Per-job historical mean duration, falling back to the global mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoricalMeanModel {
    pub job_means: BTreeMap<String, f64>,
    pub global_mean: f64,
}

impl HistoricalMeanModel {
    pub fn fit(records: &[RunRecord]) -> Result<Self, PredictError> {
        if records.is_empty() {
            return Err(PredictError::TooFewSamples { needed: 1, got: 0 });
        }
        let mut sums: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for r in records {
            let e = sums.entry(r.job_id.clone()).or_default();
            e.0 += r.observed_duration_s;
            e.1 += 1;
        }
        let total: f64 = records.iter().map(|r| r.observed_duration_s).sum();
        Ok(Self {
            job_means: sums.into_iter().map(|(k, (s, c))| (k, s / c as f64)).collect(),
            global_mean: total / records.len() as f64,
        })
    }

    pub fn predict(&self, job_id: &str) -> f64 {
        self.job_means.get(job_id).copied().unwrap_or(self.global_mean)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::JobFeatures;

    fn rec(id: &str, y: f64) -> RunRecord {
        RunRecord {
            job_id: id.into(),
            features: JobFeatures::default(),
            observed_duration_s: y,
        }
    }

    #[test]
    fn per_job_and_global_means() {
        let m = HistoricalMeanModel::fit(&[rec("a", 10.0), rec("a", 20.0), rec("b", 60.0)]).unwrap();
        assert_eq!(m.predict("a"), 15.0);
        assert_eq!(m.predict("b"), 60.0);
        assert_eq!(m.predict("zzz"), 30.0);
    }
}
