//! The scheduling MILP and its LP-relaxation branch-and-bound solver.

mod model;
mod search;

use std::collections::BTreeMap;
use std::time::Duration;

use thiserror::Error;

use crate::cost::{cost_of_picks, Assignment, CostBreakdown};
use crate::schedule::Schedule;
use crate::simplex::{LpError, DEFAULT_FEASIBILITY_TOLERANCE};

pub use model::{build_milp, build_milp_with_caps, MilpModel, ModelRow, RowKind, Symbol, VarKind, Variable};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Distance from 0 or 1 under which a binary counts as integral.
    pub integrality_tolerance: f64,
    /// Nodes whose bound is within this of the incumbent are discarded.
    pub absolute_gap: f64,
    pub node_limit: u64,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub lp_tolerance: f64,
    /// Disable to explore every node not proven infeasible.
    pub prune: bool,
    /// Keep a [`NodeRecord`] for every processed node.
    pub record_tree: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            integrality_tolerance: 1e-6,
            absolute_gap: 1e-6,
            node_limit: 1_000_000,
            time_limit: None,
            lp_tolerance: DEFAULT_FEASIBILITY_TOLERANCE,
            prune: true,
            record_tree: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    TimeLimit,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            Self::Optimal => "optimal",
            Self::Infeasible => "infeasible",
            Self::NodeLimit => "node_limit",
            Self::TimeLimit => "time_limit",
        }
    }
}

/// Best integral LP point found, with its objective (offset included).
#[derive(Debug, Clone, PartialEq)]
pub struct Incumbent {
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeResult {
    /// Split on the variable with this index.
    Branched(usize),
    Integral,
    Infeasible,
    Pruned,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub inherited_bound: f64,
    /// LP bound of this node; `None` when the LP was not solved or infeasible.
    pub bound: Option<f64>,
    pub result: NodeResult,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub nodes_explored: u64,
    pub nodes_pruned: u64,
    pub best_bound: f64,
    pub wall_time: Duration,
    pub tree: Vec<NodeRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub incumbent: Option<Incumbent>,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("LP relaxation is unbounded")]
    UnboundedRelaxation,
    #[error("no incumbent to extract")]
    NoIncumbent,
    #[error("incumbent is not a valid selection: {0}")]
    InvalidSelection(String),
    #[error("recomputed cost {recomputed} differs from objective {objective}")]
    InconsistentIncumbent { objective: f64, recomputed: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub assignment: Assignment,
    pub schedule: Schedule,
    pub cost: CostBreakdown,
}

/// Branch-and-bound over the LP relaxation of `model`.
pub fn solve(model: &MilpModel, cfg: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    search::run(model, cfg)
}

const COST_MATCH: f64 = 1e-6;

/// Turns an incumbent into an assignment, schedule and recomputed cost.
pub fn extract_solution(model: &MilpModel, outcome: &SolveOutcome, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    let inc = outcome.incumbent.as_ref().ok_or(SolveError::NoIncumbent)?;
    let vp = model.problem();
    let n = vp.workflow_count();
    let mut picks = Vec::with_capacity(n);
    for i in 0..n {
        let chosen: Vec<usize> = (0..vp.choices(i).len())
            .filter(|&p| inc.values[model.select_var(i, p)] >= 1.0 - cfg.integrality_tolerance)
            .collect();
        match chosen.as_slice() {
            [p] => picks.push(*p),
            _ => {
                return Err(SolveError::InvalidSelection(format!(
                    "workflow `{}` has {} selected choices",
                    vp.workflow(i).id,
                    chosen.len()
                )))
            }
        }
    }

    let cost = cost_of_picks(vp, &picks);
    if (cost.total - inc.objective).abs() > COST_MATCH {
        return Err(SolveError::InconsistentIncumbent {
            objective: inc.objective,
            recomputed: cost.total,
        });
    }

    let assignment = vp.assignment_from_picks(&picks);
    let mut schedule = Schedule {
        assignment: assignment.clone(),
        start: BTreeMap::new(),
        finish: BTreeMap::new(),
        duration: BTreeMap::new(),
    };
    for (i, &p) in picks.iter().enumerate() {
        let id = vp.workflow(i).id.clone();
        let start = inc.values[model.start_var(i)];
        let hours = vp.choices(i)[p].hours;
        schedule.start.insert(id.clone(), start);
        schedule.finish.insert(id.clone(), start + hours);
        schedule.duration.insert(id, hours);
    }
    Ok(Solution {
        assignment,
        schedule,
        cost,
    })
}
