use serde::Deserialize;

use super::IoError;
use crate::predictor::{JobFeatures, RunRecord, TaskType};

pub const RECORD_HEADER: [&str; 11] = [
    "job_id",
    "cpu_cores",
    "memory_gb",
    "parallelism",
    "subtask_count",
    "table_count",
    "code_length",
    "dataset_volume_gb",
    "disk_volume_gb",
    "task_type",
    "observed_duration_s",
];

#[derive(Deserialize)]
struct Row {
    job_id: String,
    cpu_cores: Option<f64>,
    memory_gb: Option<f64>,
    parallelism: Option<f64>,
    subtask_count: Option<f64>,
    table_count: Option<f64>,
    code_length: Option<f64>,
    dataset_volume_gb: Option<f64>,
    disk_volume_gb: Option<f64>,
    task_type: Option<String>,
    observed_duration_s: f64,
}

/// Reads run records from CSV with the exact [`RECORD_HEADER`]. Empty cells
/// become absent features.
pub fn load_records(text: &str) -> Result<Vec<RunRecord>, IoError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| csv_error(&e, 1))?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(IoError::BadHeader {
            expected: RECORD_HEADER.join(","),
        });
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(|e| csv_error(&e, 0))?;
        let line = out.len() as u64 + 2;
        let task_type = match row.task_type.as_deref() {
            None => None,
            Some(s) => Some(
                s.parse::<TaskType>()
                    .map_err(|value| IoError::BadEnum { line, value })?,
            ),
        };
        let features = JobFeatures {
            cpu_cores: row.cpu_cores,
            memory_gb: row.memory_gb,
            parallelism: row.parallelism,
            subtask_count: row.subtask_count,
            table_count: row.table_count,
            code_length: row.code_length,
            dataset_volume_gb: row.dataset_volume_gb,
            disk_volume_gb: row.disk_volume_gb,
            task_type,
        };
        let numeric = [
            ("cpu_cores", features.cpu_cores),
            ("memory_gb", features.memory_gb),
            ("parallelism", features.parallelism),
            ("subtask_count", features.subtask_count),
            ("table_count", features.table_count),
            ("code_length", features.code_length),
            ("dataset_volume_gb", features.dataset_volume_gb),
            ("disk_volume_gb", features.disk_volume_gb),
        ];
        for (name, v) in numeric {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(IoError::Record {
                        line,
                        message: format!("{name} must be a finite non-negative number, got {v}"),
                    });
                }
            }
        }
        if !(row.observed_duration_s > 0.0 && row.observed_duration_s.is_finite()) {
            return Err(IoError::Record {
                line,
                message: format!("observed_duration_s must be positive, got {}", row.observed_duration_s),
            });
        }
        out.push(RunRecord {
            job_id: row.job_id,
            features,
            observed_duration_s: row.observed_duration_s,
        });
    }
    Ok(out)
}

fn csv_error(e: &csv::Error, fallback_line: u64) -> IoError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    let message = match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(f) => format!("field {}: {}", RECORD_HEADER.get(f as usize).unwrap_or(&"?"), err.kind()),
            None => err.kind().to_string(),
        },
        _ => e.to_string(),
    };
    IoError::Record { line, message }
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn save_records(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RECORD_HEADER).expect("in-memory write");
    for r in records {
        let f = &r.features;
        w.write_record([
            r.job_id.clone(),
            cell(f.cpu_cores),
            cell(f.memory_gb),
            cell(f.parallelism),
            cell(f.subtask_count),
            cell(f.table_count),
            cell(f.code_length),
            cell(f.dataset_volume_gb),
            cell(f.disk_volume_gb),
            f.task_type.map_or_else(String::new, |t| t.name().to_string()),
            r.observed_duration_s.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
