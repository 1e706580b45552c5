use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::predictor::{FeatureSchema, JobFeatures, RunRecord, TaskType};

/// Linear ground truth over the default feature schema's columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub intercept: f64,
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
}

impl Default for PlantedTruth {
    fn default() -> Self {
        let columns = FeatureSchema::default().columns();
        // cpu, memory, parallelism, subtasks, tables, code, dataset, disk, io, compute
        let coefficients = vec![-3.0, -0.2, -2.0, 25.0, 8.0, 0.02, 0.0, 1.5, 150.0, 0.0];
        Self {
            intercept: 600.0,
            columns,
            coefficients,
        }
    }
}

impl PlantedTruth {
    pub fn duration(&self, x: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecordConfig {
    pub n: usize,
    /// Standard deviation of the additive Gaussian noise, seconds.
    pub noise_sigma: f64,
    /// Runs per distinct job, on average.
    pub runs_per_job: usize,
    pub seed: u64,
    #[serde(default)]
    pub truth: PlantedTruth,
}

impl Default for RecordConfig {
    fn default() -> Self {
        Self {
            n: 5000,
            noise_sigma: 60.0,
            runs_per_job: 5,
            seed: 0,
            truth: PlantedTruth::default(),
        }
    }
}

struct Job {
    parallelism: f64,
    subtasks: f64,
    tables: f64,
    code: f64,
    dataset: f64,
    disk: f64,
    task: TaskType,
}

/// Seeded run records whose durations follow the planted truth plus noise.
///
/// Jobs fix their workload features; each run draws its own resources.
/// Memory tracks cores, disk tracks dataset volume and subtasks track
/// parallelism, so the design is correlated but full rank.
pub fn generate_records(cfg: &RecordConfig) -> (Vec<RunRecord>, PlantedTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sigma.max(0.0)).expect("finite sigma");
    let job_count = cfg.n.div_ceil(cfg.runs_per_job.max(1)).max(1);
    let width = job_count.saturating_sub(1).to_string().len();
    let jobs: Vec<Job> = (0..job_count)
        .map(|_| {
            let parallelism = f64::from(rng.random_range(1..=16u32));
            let dataset = rng.random_range(1.0..500.0);
            Job {
                parallelism,
                subtasks: parallelism * f64::from(rng.random_range(1..=8u32)) + f64::from(rng.random_range(0..=5u32)),
                tables: f64::from(rng.random_range(1..=20u32)),
                code: f64::from(rng.random_range(200..=20_000u32)),
                dataset,
                disk: dataset * rng.random_range(1.2..2.0) + rng.random_range(0.0..50.0),
                task: if rng.random_bool(0.5) { TaskType::IoIntensive } else { TaskType::ComputeIntensive },
            }
        })
        .collect();

    let schema = FeatureSchema::default();
    let records = (0..cfg.n)
        .map(|_| {
            let j = rng.random_range(0..job_count);
            let job = &jobs[j];
            let cpu = f64::from(4u32 << rng.random_range(0..5u32));
            let features = JobFeatures {
                cpu_cores: Some(cpu),
                memory_gb: Some(cpu * rng.random_range(2.0..8.0)),
                parallelism: Some(job.parallelism),
                subtask_count: Some(job.subtasks),
                table_count: Some(job.tables),
                code_length: Some(job.code),
                dataset_volume_gb: Some(job.dataset),
                disk_volume_gb: Some(job.disk),
                task_type: Some(job.task),
            };
            let x = schema.encode(&features).expect("complete features");
            let eps = if cfg.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            RunRecord {
                job_id: format!("job{j:0width$}"),
                features,
                observed_duration_s: (cfg.truth.duration(&x) + eps).max(1.0),
            }
        })
        .collect();
    (records, cfg.truth.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{fit, Dataset, FitSpec};

    #[test]
    fn same_seed_same_records() {
        let cfg = RecordConfig {
            n: 200,
            ..RecordConfig::default()
        };
        assert_eq!(generate_records(&cfg).0, generate_records(&cfg).0);
    }

    #[test]
    fn noiseless_ols_recovers_truth() {
        let cfg = RecordConfig {
            n: 500,
            noise_sigma: 0.0,
            ..RecordConfig::default()
        };
        let (records, truth) = generate_records(&cfg);
        let d = Dataset::from_records(&records, &FeatureSchema::default()).unwrap();
        let m = fit(&d, &FitSpec::ols()).unwrap();
        let raw = m.raw_coefficients();
        for (j, (got, want)) in raw.iter().zip(&truth.coefficients).enumerate() {
            // the reference slot is absorbed into the intercept
            if j == 9 {
                continue;
            }
            assert!((got - want).abs() < 1e-6, "{}: {got} vs {want}", truth.columns[j]);
        }
        assert!((m.raw_intercept() - truth.intercept).abs() < 1e-6);
    }

    #[test]
    fn residual_spread_matches_sigma() {
        let cfg = RecordConfig {
            n: 10_000,
            noise_sigma: 40.0,
            ..RecordConfig::default()
        };
        let (records, _) = generate_records(&cfg);
        let d = Dataset::from_records(&records, &FeatureSchema::default()).unwrap();
        let m = fit(&d, &FitSpec::ols()).unwrap();
        let mse: f64 = d
            .rows
            .iter()
            .zip(&d.targets)
            .map(|(x, y)| (y - m.predict_raw(x).unwrap()).powi(2))
            .sum::<f64>()
            / d.len() as f64;
        let ratio = mse.sqrt() / 40.0;
        assert!((0.8..1.2).contains(&ratio), "{ratio}");
    }
}
