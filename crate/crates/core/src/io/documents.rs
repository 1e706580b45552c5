use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::metrics::OrchestrationReport;
use super::{check_version, from_json, to_json, IoError, FORMAT_VERSION};
use crate::cost::{Assignment, Choice, CostBreakdown};
use crate::predictor::{FeatureSchema, LinearModel, RegressionMetrics, TuneResult};
use crate::problem::{
    ConfigOption, DeviceCatalogEntry, DurationTable, Problem, ValidatedProblem, WorkflowSpec,
};
use crate::schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DurationEntry {
    pub workflow_id: String,
    pub device_id: String,
    pub config_id: String,
    pub hours: f64,
}

/// On-disk problem; `durations` may be left out when a model fills them in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub format_version: u32,
    pub workflows: Vec<WorkflowSpec>,
    pub devices: Vec<DeviceCatalogEntry>,
    pub configs: Vec<ConfigOption>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<Vec<DurationEntry>>,
}

impl ProblemDocument {
    pub fn from_problem(p: &Problem) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            workflows: p.workflows.clone(),
            devices: p.devices.clone(),
            configs: p.configs.clone(),
            durations: Some(
                p.durations
                    .iter()
                    .map(|(k, hours)| DurationEntry {
                        workflow_id: k.workflow_id.clone(),
                        device_id: k.device_id.clone(),
                        config_id: k.config_id.clone(),
                        hours,
                    })
                    .collect(),
            ),
        }
    }

    pub fn has_durations(&self) -> bool {
        self.durations.is_some()
    }

    /// The problem, with an empty table when durations are absent.
    pub fn to_problem(&self) -> Problem {
        let mut durations = DurationTable::new();
        for e in self.durations.iter().flatten() {
            durations.insert(&e.workflow_id, &e.device_id, &e.config_id, e.hours);
        }
        Problem {
            workflows: self.workflows.clone(),
            devices: self.devices.clone(),
            configs: self.configs.clone(),
            durations,
        }
    }

    pub fn with_durations(mut self, table: &DurationTable) -> Self {
        let mut p = self.to_problem();
        p.durations = table.clone();
        self.durations = ProblemDocument::from_problem(&p).durations;
        self
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemDocument, IoError> {
    let doc: ProblemDocument = from_json(text)?;
    check_version(doc.format_version)?;
    Ok(doc)
}

/// Parses and validates a problem that carries its own durations.
pub fn load_problem(text: &str) -> Result<ValidatedProblem, IoError> {
    let doc = parse_problem(text)?;
    if !doc.has_durations() {
        return Err(IoError::MissingDurations);
    }
    Ok(doc.to_problem().validate()?)
}

pub fn save_problem(p: &Problem) -> String {
    to_json(&ProblemDocument::from_problem(p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentEntry {
    pub workflow_id: String,
    pub device_id: String,
    pub config_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingEntry {
    pub workflow_id: String,
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceCostEntry {
    pub device_id: String,
    pub usage: f64,
    pub tier_pivot: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostDocument {
    pub per_device: Vec<DeviceCostEntry>,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDocument {
    pub format_version: u32,
    pub assignment: Vec<AssignmentEntry>,
    pub timing: Vec<TimingEntry>,
    pub cost: CostDocument,
}

fn assignment_entries(a: &Assignment) -> Vec<AssignmentEntry> {
    a.choice
        .iter()
        .map(|(w, c)| AssignmentEntry {
            workflow_id: w.clone(),
            device_id: c.device_id.clone(),
            config_id: c.config_id.clone(),
        })
        .collect()
}

fn assignment_of(entries: &[AssignmentEntry]) -> Assignment {
    let mut a = Assignment::new();
    for e in entries {
        a.set(e.workflow_id.clone(), Choice::new(e.device_id.clone(), e.config_id.clone()));
    }
    a
}

impl ScheduleDocument {
    pub fn new(schedule: &Schedule, cost: &CostBreakdown) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            assignment: assignment_entries(&schedule.assignment),
            timing: schedule
                .start
                .iter()
                .map(|(w, &start)| TimingEntry {
                    workflow_id: w.clone(),
                    start,
                    finish: schedule.finish.get(w).copied().unwrap_or(f64::NAN),
                })
                .collect(),
            cost: CostDocument {
                per_device: cost
                    .usage
                    .iter()
                    .map(|(d, &usage)| DeviceCostEntry {
                        device_id: d.clone(),
                        usage,
                        tier_pivot: cost.tier_pivot[d],
                        cost: cost.device_cost[d],
                    })
                    .collect(),
                total: cost.total,
            },
        }
    }

    pub fn assignment(&self) -> Assignment {
        assignment_of(&self.assignment)
    }

    /// The schedule, with durations taken from the problem's table.
    pub fn to_schedule(&self, vp: &ValidatedProblem) -> Result<Schedule, IoError> {
        let assignment = self.assignment();
        let picks = vp.picks_of(&assignment)?;
        let mut duration = BTreeMap::new();
        for (i, &p) in picks.iter().enumerate() {
            duration.insert(vp.workflow(i).id.clone(), vp.choices(i)[p].hours);
        }
        Ok(Schedule {
            assignment,
            start: self.timing.iter().map(|t| (t.workflow_id.clone(), t.start)).collect(),
            finish: self.timing.iter().map(|t| (t.workflow_id.clone(), t.finish)).collect(),
            duration,
        })
    }
}

pub fn save_schedule(schedule: &Schedule, cost: &CostBreakdown) -> String {
    to_json(&ScheduleDocument::new(schedule, cost))
}

pub fn parse_schedule(text: &str) -> Result<ScheduleDocument, IoError> {
    let doc: ScheduleDocument = from_json(text)?;
    check_version(doc.format_version)?;
    Ok(doc)
}

pub fn load_schedule(text: &str, vp: &ValidatedProblem) -> Result<Schedule, IoError> {
    parse_schedule(text)?.to_schedule(vp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub format_version: u32,
    pub schema: FeatureSchema,
    pub model: LinearModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_metrics: Option<RegressionMetrics>,
}

pub fn save_model(schema: &FeatureSchema, model: &LinearModel, metrics: Option<&RegressionMetrics>) -> String {
    to_json(&ModelDocument {
        format_version: FORMAT_VERSION,
        schema: schema.clone(),
        model: model.clone(),
        training_metrics: metrics.cloned(),
    })
}

pub fn load_model(text: &str) -> Result<ModelDocument, IoError> {
    let doc: ModelDocument = from_json(text)?;
    check_version(doc.format_version)?;
    if doc.schema.arity() != doc.model.arity() {
        return Err(IoError::Schema {
            path: "model.coefficients".into(),
            message: format!("{} coefficients for a schema of arity {}", doc.model.arity(), doc.schema.arity()),
        });
    }
    Ok(doc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneDocument {
    pub format_version: u32,
    pub tune: TuneResult,
}

pub fn save_tune(t: &TuneResult) -> String {
    to_json(&TuneDocument {
        format_version: FORMAT_VERSION,
        tune: t.clone(),
    })
}

pub fn load_tune(text: &str) -> Result<TuneResult, IoError> {
    let doc: TuneDocument = from_json(text)?;
    check_version(doc.format_version)?;
    Ok(doc.tune)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Success,
    /// Failed once, then completed after recovery.
    Recovered,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobOutcome {
    pub workflow_id: String,
    pub status: JobStatus,
}

/// Record of one scheduled execution: the instance, the assignment that ran,
/// per-job outcomes and wall-clock time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLog {
    pub format_version: u32,
    pub problem: ProblemDocument,
    pub assignment: Vec<AssignmentEntry>,
    pub jobs: Vec<JobOutcome>,
    pub elapsed_s: f64,
}

impl RunLog {
    pub fn new(problem: &Problem, assignment: &Assignment, jobs: Vec<JobOutcome>, elapsed_s: f64) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            problem: ProblemDocument::from_problem(problem),
            assignment: assignment_entries(assignment),
            jobs,
            elapsed_s,
        }
    }

    pub fn assignment(&self) -> Assignment {
        assignment_of(&self.assignment)
    }
}

pub fn save_run_log(log: &RunLog) -> String {
    to_json(log)
}

pub fn load_run_log(text: &str) -> Result<RunLog, IoError> {
    let log: RunLog = from_json(text)?;
    check_version(log.format_version)?;
    check_version(log.problem.format_version)?;
    Ok(log)
}

fn fixed6(x: f64) -> Box<RawValue> {
    // adding 0.0 turns -0.0 into 0.0
    RawValue::from_string(format!("{:.6}", x + 0.0)).expect("decimal literal")
}

#[derive(Serialize)]
struct ReportOut {
    format_version: u32,
    jobs_completed: u64,
    elapsed_s: Box<RawValue>,
    throughput_jobs_per_s: Box<RawValue>,
    successes: u64,
    fault_recovered: u64,
    total_requests: u64,
    reliability: Box<RawValue>,
    initial_cost: Box<RawValue>,
    final_cost: Box<RawValue>,
    cost_change_rate: Box<RawValue>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportIn {
    format_version: u32,
    jobs_completed: u64,
    elapsed_s: f64,
    throughput_jobs_per_s: f64,
    successes: u64,
    fault_recovered: u64,
    total_requests: u64,
    reliability: f64,
    initial_cost: f64,
    final_cost: f64,
    cost_change_rate: f64,
}

/// Report JSON with every real number written to 6 decimal places.
pub fn save_report(r: &OrchestrationReport) -> String {
    to_json(&ReportOut {
        format_version: FORMAT_VERSION,
        jobs_completed: r.jobs_completed,
        elapsed_s: fixed6(r.elapsed_s),
        throughput_jobs_per_s: fixed6(r.throughput_jobs_per_s),
        successes: r.successes,
        fault_recovered: r.fault_recovered,
        total_requests: r.total_requests,
        reliability: fixed6(r.reliability),
        initial_cost: fixed6(r.initial_cost),
        final_cost: fixed6(r.final_cost),
        cost_change_rate: fixed6(r.cost_change_rate),
    })
}

pub fn load_report(text: &str) -> Result<OrchestrationReport, IoError> {
    let d: ReportIn = from_json(text)?;
    check_version(d.format_version)?;
    Ok(OrchestrationReport {
        jobs_completed: d.jobs_completed,
        elapsed_s: d.elapsed_s,
        throughput_jobs_per_s: d.throughput_jobs_per_s,
        successes: d.successes,
        fault_recovered: d.fault_recovered,
        total_requests: d.total_requests,
        reliability: d.reliability,
        initial_cost: d.initial_cost,
        final_cost: d.final_cost,
        cost_change_rate: d.cost_change_rate,
    })
}
