//! File formats for problems, records, models, schedules and reports, and the
//! orchestration metrics computed from run logs.

mod documents;
mod metrics;
mod records;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::error::Category;
use thiserror::Error;

use crate::cost::AssignmentError;
use crate::problem::ValidationErrors;

pub use documents::{
    load_model, load_problem, load_report, load_run_log, load_schedule, load_tune, parse_problem,
    parse_schedule, save_model, save_problem, save_report, save_run_log, save_schedule, save_tune,
    AssignmentEntry, CostDocument, DeviceCostEntry, DurationEntry, JobOutcome, JobStatus,
    ModelDocument, ProblemDocument, RunLog, ScheduleDocument, TimingEntry, TuneDocument,
};
pub use metrics::{
    compute_ccr, compute_reliability, compute_throughput, orchestration_report, MetricError,
    OrchestrationReport,
};
pub use records::{load_records, save_records, RECORD_HEADER};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unsupported format_version {0}, expected {FORMAT_VERSION}")]
    UnsupportedVersion(u32),
    #[error("{0}")]
    Validation(#[from] ValidationErrors),
    #[error("line {line}: {message}")]
    Record { line: u64, message: String },
    #[error("line {line}: task_type `{value}` is not io_intensive or compute_intensive")]
    BadEnum { line: u64, value: String },
    #[error("record header must be exactly `{expected}`")]
    BadHeader { expected: String },
    #[error("problem document has no durations block")]
    MissingDurations,
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            Category::Data => schema_error(&path, &inner),
            _ => parse_error(&inner),
        }
    })?;
    de.end().map_err(|e| parse_error(&e))?;
    Ok(value)
}

fn parse_error(e: &serde_json::Error) -> IoError {
    IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: bare_message(e),
    }
}

fn schema_error(path: &str, e: &serde_json::Error) -> IoError {
    let message = bare_message(e);
    let missing = message
        .strip_prefix("missing field `")
        .and_then(|rest| rest.split('`').next());
    let path = match (path, missing) {
        (".", Some(field)) => field.to_string(),
        (p, Some(field)) => format!("{p}.{field}"),
        (p, None) => p.to_string(),
    };
    IoError::Schema { path, message }
}

/// Error text without serde_json's position suffix.
fn bare_message(e: &serde_json::Error) -> String {
    let full = e.to_string();
    match full.rfind(" at line ") {
        Some(at) => full[..at].to_string(),
        None => full,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

fn check_version(v: u32) -> Result<(), IoError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(IoError::UnsupportedVersion(v))
    }
}
