use std::collections::BTreeMap;

use super::features::{FeatureSchema, JobFeatures};
use super::linear::LinearModel;
use super::PredictError;
use crate::problem::{ConfigOption, DurationTable};

/// Shortest duration a table cell may hold, in seconds.
pub const MIN_CELL_SECONDS: f64 = 1.0;

/// A workflow's static features combined with a configuration's resources.
pub fn config_features(static_features: &JobFeatures, cfg: &ConfigOption) -> JobFeatures {
    let b = f64::from(cfg.device_count);
    JobFeatures {
        cpu_cores: Some(b * cfg.cpu_cores),
        memory_gb: Some(b * cfg.memory_gb),
        ..static_features.clone()
    }
}

/// Predicted hours for every (workflow, config) pair.
///
/// `static_features` supplies the job-level features of each workflow; cpu
/// and memory come from the configuration.
pub fn build_duration_table(
    model: &LinearModel,
    schema: &FeatureSchema,
    workflow_ids: &[String],
    configs: &[ConfigOption],
    static_features: &BTreeMap<String, JobFeatures>,
) -> Result<DurationTable, PredictError> {
    if schema.arity() != model.arity() {
        return Err(PredictError::ArityMismatch {
            expected: model.arity(),
            got: schema.arity(),
        });
    }
    let mut table = DurationTable::new();
    for w in workflow_ids {
        let base = static_features
            .get(w)
            .ok_or_else(|| PredictError::MissingFeature(format!("features of workflow `{w}`")))?;
        for cfg in configs {
            let x = schema.encode(&config_features(base, cfg))?;
            let seconds = model.predict(&x)?.max(MIN_CELL_SECONDS);
            table.insert(w, &cfg.device_id, &cfg.config_id, seconds / 3600.0);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{Family, Feature};

    fn cpu_model(coef: f64, intercept: f64) -> LinearModel {
        LinearModel {
            family: Family::Ols,
            columns: vec!["cpu_cores".into()],
            coefficients: vec![coef],
            intercept,
            alpha: 0.0,
            l1_ratio: 0.0,
            means: vec![0.0],
            stds: vec![1.0],
            floor_s: 1.0,
        }
    }

    fn setup() -> (FeatureSchema, Vec<String>, Vec<ConfigOption>, BTreeMap<String, JobFeatures>) {
        let schema = FeatureSchema::new(vec![Feature::CpuCores]);
        let configs = vec![
            ConfigOption::new("d", "k0", 1).with_shape(4.0, 16.0),
            ConfigOption::new("d", "k1", 2).with_shape(4.0, 16.0),
            ConfigOption::new("d", "k2", 4).with_shape(4.0, 16.0),
        ];
        let feats = BTreeMap::from([("w".to_string(), JobFeatures::default())]);
        (schema, vec!["w".into()], configs, feats)
    }

    #[test]
    fn constant_model_gives_one_hour() {
        let (s, w, c, f) = setup();
        let t = build_duration_table(&cpu_model(0.0, 3600.0), &s, &w, &c, &f).unwrap();
        assert_eq!(t.len(), 3);
        assert!(t.iter().all(|(_, h)| h == 1.0));
    }

    #[test]
    fn negative_cell_is_floored() {
        let (s, w, c, f) = setup();
        let t = build_duration_table(&cpu_model(-1000.0, 3600.0), &s, &w, &c, &f).unwrap();
        assert_eq!(t.get("w", "d", "k2"), Some(1.0 / 3600.0));
        assert!((t.get("w", "d", "k0").unwrap() - (3600.0 - 4000.0f64).max(1.0) / 3600.0).abs() < 1e-15);
    }

    #[test]
    fn durations_follow_cpu_sign() {
        let (s, w, c, f) = setup();
        let t = build_duration_table(&cpu_model(-10.0, 3600.0), &s, &w, &c, &f).unwrap();
        let h: Vec<f64> = ["k0", "k1", "k2"].iter().map(|k| t.get("w", "d", k).unwrap()).collect();
        assert!(h[0] > h[1] && h[1] > h[2]);
    }

    #[test]
    fn unknown_workflow_features() {
        let (s, _, c, f) = setup();
        assert!(matches!(
            build_duration_table(&cpu_model(0.0, 1.0), &s, &["x".into()], &c, &f),
            Err(PredictError::MissingFeature(_))
        ));
    }
}
