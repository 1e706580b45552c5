//! Earliest-start scheduling and constraint checking for a fixed assignment.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cost::{Assignment, AssignmentError};
use crate::problem::ValidatedProblem;

/// Absolute slack, in hours, allowed on every timing comparison.
pub const TIME_TOLERANCE: f64 = 1e-6;

/// Start, finish and duration per workflow for an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub assignment: Assignment,
    pub start: BTreeMap<String, f64>,
    pub finish: BTreeMap<String, f64>,
    pub duration: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Culprit {
    pub workflow: String,
    /// Hours by which the earliest finish overshoots the deadline.
    pub deficit_hours: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infeasibility {
    pub culprits: Vec<Culprit>,
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "deadline missed by")?;
        for (n, c) in self.culprits.iter().enumerate() {
            let sep = if n == 0 { " " } else { ", " };
            write!(f, "{sep}`{}` ({:.6} h)", c.workflow, c.deficit_hours)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("infeasible: {0}")]
    Infeasible(Infeasibility),
}

/// Which timing or selection rule a schedule breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConstraintKind {
    /// Exactly one known (device, config) per workflow.
    SingleChoice,
    /// `finish = start + duration`.
    FinishTime,
    /// Duration equals the table entry of the chosen configuration.
    DurationMatch,
    /// `finish(i) <= start(j)` for each precedence pair.
    Precedence,
    /// `earliest_start <= start`.
    EarliestStart,
    /// `finish <= deadline`.
    Deadline,
}

impl ConstraintKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SingleChoice => "single-choice",
            Self::FinishTime => "finish-time",
            Self::DurationMatch => "duration-match",
            Self::Precedence => "precedence",
            Self::EarliestStart => "earliest-start",
            Self::Deadline => "deadline",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: ConstraintKind,
    pub workflows: Vec<String>,
    /// Size of the breach in hours; NaN when a value is missing altogether.
    pub amount: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated by {} ({})",
            self.constraint.name(),
            self.workflows.join(", "),
            self.amount
        )
    }
}

impl ValidatedProblem {
    /// Earliest start/finish times for the given picks, in topological order.
    pub fn earliest_times(&self, picks: &[usize], start: &mut [f64], finish: &mut [f64]) {
        for &i in self.topological_order() {
            let ready = self
                .predecessors(i)
                .iter()
                .map(|&j| finish[j])
                .fold(self.workflow(i).earliest_start, f64::max);
            start[i] = ready;
            finish[i] = ready + self.choices(i)[picks[i]].hours;
        }
    }

    /// Whether every workflow meets its deadline under the earliest schedule.
    pub fn picks_feasible(&self, picks: &[usize], start: &mut [f64], finish: &mut [f64]) -> bool {
        self.earliest_times(picks, start, finish);
        (0..self.workflow_count()).all(|i| finish[i] - self.workflow(i).deadline <= TIME_TOLERANCE)
    }

    fn culprits(&self, finish: &[f64]) -> Vec<Culprit> {
        (0..self.workflow_count())
            .filter_map(|i| {
                let deficit = finish[i] - self.workflow(i).deadline;
                (deficit > TIME_TOLERANCE).then(|| Culprit {
                    workflow: self.workflow(i).id.clone(),
                    deficit_hours: deficit,
                })
            })
            .collect()
    }

    /// Per-workflow position of the shortest-duration choice (first on ties).
    pub fn fastest_picks(&self) -> Vec<usize> {
        (0..self.workflow_count())
            .map(|i| {
                let slots = self.choices(i);
                (0..slots.len())
                    .min_by(|&a, &b| slots[a].hours.total_cmp(&slots[b].hours))
                    .unwrap_or(0)
            })
            .collect()
    }
}

pub fn earliest_schedule(p: &ValidatedProblem, a: &Assignment) -> Result<Schedule, ScheduleError> {
    let picks = p.picks_of(a)?;
    schedule_for_picks(p, &picks)
}

pub(crate) fn schedule_for_picks(p: &ValidatedProblem, picks: &[usize]) -> Result<Schedule, ScheduleError> {
    let n = p.workflow_count();
    let (mut start, mut finish) = (vec![0.0; n], vec![0.0; n]);
    p.earliest_times(picks, &mut start, &mut finish);
    let culprits = p.culprits(&finish);
    if !culprits.is_empty() {
        return Err(ScheduleError::Infeasible(Infeasibility { culprits }));
    }
    let mut schedule = Schedule {
        assignment: p.assignment_from_picks(picks),
        start: BTreeMap::new(),
        finish: BTreeMap::new(),
        duration: BTreeMap::new(),
    };
    for i in 0..n {
        let id = p.workflow(i).id.clone();
        schedule.start.insert(id.clone(), start[i]);
        schedule.finish.insert(id.clone(), finish[i]);
        schedule
            .duration
            .insert(id, p.choices(i)[picks[i]].hours);
    }
    Ok(schedule)
}

/// Explains why no assignment at all can meet the deadlines.
///
/// Durations only enter timing monotonically, so the instance is infeasible
/// exactly when the all-fastest assignment is. Returns `None` when feasible.
pub fn diagnose_infeasibility(p: &ValidatedProblem) -> Option<Infeasibility> {
    let picks = p.fastest_picks();
    match schedule_for_picks(p, &picks) {
        Ok(_) => None,
        Err(ScheduleError::Infeasible(inf)) => Some(inf),
        Err(ScheduleError::Assignment(_)) => unreachable!("fastest picks are in range"),
    }
}

/// Lists every rule the schedule breaks; empty means valid.
pub fn check_schedule(p: &ValidatedProblem, s: &Schedule) -> Vec<Violation> {
    let mut out = Vec::new();
    let tol = TIME_TOLERANCE;

    for id in s.assignment.choice.keys() {
        if p.workflow_index(id).is_none() {
            out.push(Violation {
                constraint: ConstraintKind::SingleChoice,
                workflows: vec![id.clone()],
                amount: f64::NAN,
            });
        }
    }

    let n = p.workflow_count();
    let mut start = vec![f64::NAN; n];
    let mut finish = vec![f64::NAN; n];
    for i in 0..n {
        let w = p.workflow(i);
        let id = &w.id;
        let hours = s.assignment.get(id).and_then(|c| {
            let cfg = p.config_index(&c.device_id, &c.config_id)?;
            let pos = p.choice_position(i, cfg)?;
            Some(p.choices(i)[pos].hours)
        });
        if hours.is_none() {
            out.push(Violation {
                constraint: ConstraintKind::SingleChoice,
                workflows: vec![id.clone()],
                amount: f64::NAN,
            });
        }
        let (Some(&st), Some(&fi), Some(&g)) = (s.start.get(id), s.finish.get(id), s.duration.get(id)) else {
            out.push(Violation {
                constraint: ConstraintKind::FinishTime,
                workflows: vec![id.clone()],
                amount: f64::NAN,
            });
            continue;
        };
        start[i] = st;
        finish[i] = fi;
        let gap = (st + g - fi).abs();
        if !(gap <= tol) {
            out.push(Violation {
                constraint: ConstraintKind::FinishTime,
                workflows: vec![id.clone()],
                amount: gap,
            });
        }
        if let Some(h) = hours {
            let gap = (g - h).abs();
            if !(gap <= tol) {
                out.push(Violation {
                    constraint: ConstraintKind::DurationMatch,
                    workflows: vec![id.clone()],
                    amount: gap,
                });
            }
        }
        let early = w.earliest_start - st;
        if !(early <= tol) {
            out.push(Violation {
                constraint: ConstraintKind::EarliestStart,
                workflows: vec![id.clone()],
                amount: early,
            });
        }
        let late = fi - w.deadline;
        if !(late <= tol) {
            out.push(Violation {
                constraint: ConstraintKind::Deadline,
                workflows: vec![id.clone()],
                amount: late,
            });
        }
    }

    for (i, j) in p.precedence_pairs() {
        if finish[i].is_nan() || start[j].is_nan() {
            continue;
        }
        let overlap = finish[i] - start[j];
        if !(overlap <= tol) {
            out.push(Violation {
                constraint: ConstraintKind::Precedence,
                workflows: vec![p.workflow(i).id.clone(), p.workflow(j).id.clone()],
                amount: overlap,
            });
        }
    }
    out
}
