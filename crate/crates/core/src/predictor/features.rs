use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PredictError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskType {
    IoIntensive,
    ComputeIntensive,
}

impl TaskType {
    pub const ALL: [TaskType; 2] = [TaskType::IoIntensive, TaskType::ComputeIntensive];

    pub fn name(self) -> &'static str {
        match self {
            Self::IoIntensive => "io_intensive",
            Self::ComputeIntensive => "compute_intensive",
        }
    }
}

impl fmt::Display for TaskType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| s.to_string())
    }
}

/// Job descriptors; any field may be absent in raw data.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobFeatures {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_cores: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtask_count: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table_count: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_volume_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disk_volume_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task_type: Option<TaskType>,
}

/// One historical run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub job_id: String,
    pub features: JobFeatures,
    pub observed_duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    CpuCores,
    MemoryGb,
    Parallelism,
    SubtaskCount,
    TableCount,
    CodeLength,
    DatasetVolumeGb,
    DiskVolumeGb,
    /// One-hot over [`TaskType::ALL`].
    TaskType,
}

impl Feature {
    pub const NUMERIC: [Feature; 8] = [
        Feature::CpuCores,
        Feature::MemoryGb,
        Feature::Parallelism,
        Feature::SubtaskCount,
        Feature::TableCount,
        Feature::CodeLength,
        Feature::DatasetVolumeGb,
        Feature::DiskVolumeGb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::CpuCores => "cpu_cores",
            Self::MemoryGb => "memory_gb",
            Self::Parallelism => "parallelism",
            Self::SubtaskCount => "subtask_count",
            Self::TableCount => "table_count",
            Self::CodeLength => "code_length",
            Self::DatasetVolumeGb => "dataset_volume_gb",
            Self::DiskVolumeGb => "disk_volume_gb",
            Self::TaskType => "task_type",
        }
    }

    fn numeric(self, f: &JobFeatures) -> Option<f64> {
        match self {
            Self::CpuCores => f.cpu_cores,
            Self::MemoryGb => f.memory_gb,
            Self::Parallelism => f.parallelism,
            Self::SubtaskCount => f.subtask_count,
            Self::TableCount => f.table_count,
            Self::CodeLength => f.code_length,
            Self::DatasetVolumeGb => f.dataset_volume_gb,
            Self::DiskVolumeGb => f.disk_volume_gb,
            Self::TaskType => None,
        }
    }
}

/// Ordered features and their encoding into a numeric vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<Feature>,
}

impl Default for FeatureSchema {
    fn default() -> Self {
        let mut features = Feature::NUMERIC.to_vec();
        features.push(Feature::TaskType);
        Self { features }
    }
}

impl FeatureSchema {
    pub fn new(features: Vec<Feature>) -> Self {
        Self { features }
    }

    /// Encoded column names, one-hot slots as `task_type=<value>`.
    pub fn columns(&self) -> Vec<String> {
        let mut out = Vec::new();
        for f in &self.features {
            match f {
                Feature::TaskType => {
                    out.extend(TaskType::ALL.iter().map(|t| format!("task_type={t}")));
                }
                _ => out.push(f.name().to_string()),
            }
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.features
            .iter()
            .map(|f| if *f == Feature::TaskType { TaskType::ALL.len() } else { 1 })
            .sum()
    }

    /// Column ranges of every one-hot group.
    pub fn one_hot_groups(&self) -> Vec<Range<usize>> {
        let mut at = 0;
        let mut out = Vec::new();
        for f in &self.features {
            if *f == Feature::TaskType {
                out.push(at..at + TaskType::ALL.len());
                at += TaskType::ALL.len();
            } else {
                at += 1;
            }
        }
        out
    }

    pub fn encode(&self, f: &JobFeatures) -> Result<Vec<f64>, PredictError> {
        let mut out = Vec::with_capacity(self.arity());
        for &feat in &self.features {
            if feat == Feature::TaskType {
                let t = f
                    .task_type
                    .ok_or_else(|| PredictError::MissingFeature(feat.name().into()))?;
                out.extend(TaskType::ALL.iter().map(|&x| if x == t { 1.0 } else { 0.0 }));
            } else {
                out.push(
                    feat.numeric(f)
                        .ok_or_else(|| PredictError::MissingFeature(feat.name().into()))?,
                );
            }
        }
        Ok(out)
    }
}

pub fn extract_features(r: &RunRecord, schema: &FeatureSchema) -> Result<Vec<f64>, PredictError> {
    schema.encode(&r.features)
}

/// Encoded design matrix with targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Column ranges that form one-hot groups.
    pub groups: Vec<Range<usize>>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, PredictError> {
        if rows.len() != targets.len() {
            return Err(PredictError::ArityMismatch {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(PredictError::ArityMismatch {
                expected: columns.len(),
                got: r.len(),
            });
        }
        Ok(Self {
            columns,
            rows,
            targets,
            groups: Vec::new(),
        })
    }

    /// Unnamed columns `x0, x1, ...`.
    pub fn unnamed(rows: Vec<Vec<f64>>, targets: Vec<f64>) -> Result<Self, PredictError> {
        let p = rows.first().map_or(0, Vec::len);
        Self::new((0..p).map(|j| format!("x{j}")).collect(), rows, targets)
    }

    pub fn from_records(records: &[RunRecord], schema: &FeatureSchema) -> Result<Self, PredictError> {
        let rows = records
            .iter()
            .map(|r| extract_features(r, schema))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            columns: schema.columns(),
            rows,
            targets: records.iter().map(|r| r.observed_duration_s).collect(),
            groups: schema.one_hot_groups(),
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.columns.len()
    }

    /// Rows at the given indices, in that order.
    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            columns: self.columns.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            groups: self.groups.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(cpu: f64, t: TaskType) -> JobFeatures {
        JobFeatures {
            cpu_cores: Some(cpu),
            memory_gb: Some(32.0),
            parallelism: Some(4.0),
            subtask_count: Some(10.0),
            table_count: Some(3.0),
            code_length: Some(1200.0),
            dataset_volume_gb: Some(50.0),
            disk_volume_gb: Some(80.0),
            task_type: Some(t),
        }
    }

    #[test]
    fn default_encoding_layout() {
        let schema = FeatureSchema::default();
        assert_eq!(schema.arity(), 10);
        let v = schema.encode(&full(8.0, TaskType::IoIntensive)).unwrap();
        assert_eq!(v[0], 8.0);
        assert_eq!(&v[8..], &[1.0, 0.0]);
        assert_eq!(schema.columns()[8], "task_type=io_intensive");
        assert_eq!(schema.one_hot_groups(), vec![8..10]);
    }

    #[test]
    fn task_type_only_moves_one_hot() {
        let schema = FeatureSchema::default();
        let a = schema.encode(&full(8.0, TaskType::IoIntensive)).unwrap();
        let b = schema.encode(&full(8.0, TaskType::ComputeIntensive)).unwrap();
        let diff: Vec<usize> = (0..a.len()).filter(|&j| a[j] != b[j]).collect();
        assert_eq!(diff, vec![8, 9]);
    }

    #[test]
    fn missing_field_is_named() {
        let mut f = full(8.0, TaskType::IoIntensive);
        f.disk_volume_gb = None;
        assert_eq!(
            FeatureSchema::default().encode(&f),
            Err(PredictError::MissingFeature("disk_volume_gb".into()))
        );
    }

    #[test]
    fn task_type_parses_literals_only() {
        assert_eq!("io_intensive".parse(), Ok(TaskType::IoIntensive));
        assert_eq!("gpu".parse::<TaskType>(), Err("gpu".to_string()));
    }
}
