use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::documents::{JobStatus, RunLog};
use super::IoError;
use crate::cost::evaluate_cost;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MetricError {
    #[error("elapsed time must be positive")]
    ZeroElapsed,
    #[error("total request count must be positive")]
    ZeroTotal,
    #[error("successes plus recoveries exceed the total request count")]
    Overcount,
    #[error("initial cost must be positive")]
    ZeroInitialCost,
}

/// Jobs completed per second.
pub fn compute_throughput(jobs: u64, elapsed_s: f64) -> Result<f64, MetricError> {
    if !(elapsed_s > 0.0) {
        return Err(MetricError::ZeroElapsed);
    }
    Ok(jobs as f64 / elapsed_s)
}

/// Share of requests that succeeded outright or after recovery.
pub fn compute_reliability(successes: u64, recovered: u64, total: u64) -> Result<f64, MetricError> {
    if total == 0 {
        return Err(MetricError::ZeroTotal);
    }
    if successes + recovered > total {
        return Err(MetricError::Overcount);
    }
    Ok((successes + recovered) as f64 / total as f64)
}

/// Cost change rate as a savings fraction: `(initial - final) / initial`.
pub fn compute_ccr(initial_cost: f64, final_cost: f64) -> Result<f64, MetricError> {
    if !(initial_cost > 0.0) {
        return Err(MetricError::ZeroInitialCost);
    }
    Ok((initial_cost - final_cost) / initial_cost)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrchestrationReport {
    pub jobs_completed: u64,
    pub elapsed_s: f64,
    pub throughput_jobs_per_s: f64,
    pub successes: u64,
    pub fault_recovered: u64,
    pub total_requests: u64,
    pub reliability: f64,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub cost_change_rate: f64,
}

/// Aggregates a run log. The initial cost prices the default assignment
/// (each workflow on its first choice); the final cost prices the logged one.
pub fn orchestration_report(log: &RunLog) -> Result<OrchestrationReport, IoError> {
    if !log.problem.has_durations() {
        return Err(IoError::MissingDurations);
    }
    let vp = log.problem.to_problem().validate()?;
    let initial = evaluate_cost(&vp, &vp.assignment_from_picks(&vp.default_picks()))?.total;
    let final_cost = evaluate_cost(&vp, &log.assignment())?.total;
    let count = |s: JobStatus| log.jobs.iter().filter(|j| j.status == s).count() as u64;
    let successes = count(JobStatus::Success);
    let recovered = count(JobStatus::Recovered);
    let total = log.jobs.len() as u64;
    let completed = successes + recovered;
    Ok(OrchestrationReport {
        jobs_completed: completed,
        elapsed_s: log.elapsed_s,
        throughput_jobs_per_s: compute_throughput(completed, log.elapsed_s)?,
        successes,
        fault_recovered: recovered,
        total_requests: total,
        reliability: compute_reliability(successes, recovered, total)?,
        initial_cost: initial,
        final_cost,
        cost_change_rate: compute_ccr(initial, final_cost)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput() {
        assert_eq!(compute_throughput(10, 2.0), Ok(5.0));
        assert_eq!(compute_throughput(0, 3.0), Ok(0.0));
        assert_eq!(compute_throughput(1, 0.0), Err(MetricError::ZeroElapsed));
        let t = compute_throughput(7050, 6.0256).unwrap();
        assert!((t / 1000.0 - 1.17).abs() < 0.005, "{t}");
    }

    #[test]
    fn reliability() {
        assert_eq!(compute_reliability(9, 1, 10), Ok(1.0));
        assert_eq!(compute_reliability(97, 0, 100), Ok(0.97));
        assert_eq!(compute_reliability(0, 0, 5), Ok(0.0));
        assert_eq!(compute_reliability(0, 0, 0), Err(MetricError::ZeroTotal));
        assert_eq!(compute_reliability(5, 1, 5), Err(MetricError::Overcount));
    }

    #[test]
    fn cost_change_rate() {
        assert!((compute_ccr(52.6, 42.6).unwrap() - 0.1901).abs() < 1e-4);
        assert!((compute_ccr(446.7, 352.9).unwrap() - 0.2100).abs() < 1e-4);
        assert_eq!(compute_ccr(3.0, 3.0), Ok(0.0));
        assert_eq!(compute_ccr(0.0, 1.0), Err(MetricError::ZeroInitialCost));
    }
}
