use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use super::model::{MilpModel, VarKind};
use super::{
    Incumbent, NodeRecord, NodeResult, SolveError, SolveOutcome, SolveReport, SolveStatus,
    SolverConfig,
};
use crate::simplex::{solve_lp, Bounds, FeasibilityTolerance, LpOutcome};

struct Node {
    id: usize,
    parent: Option<usize>,
    depth: usize,
    /// LP bound inherited from the parent; a valid lower bound for the subtree.
    bound: f64,
    fixings: Vec<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// BinaryHeap pops the maximum, so "better" compares greater.
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

pub(super) fn run(model: &MilpModel, cfg: &SolverConfig) -> Result<SolveOutcome, SolveError> {
    let clock = Instant::now();
    let deadline = cfg.time_limit.map(Duration::from_secs_f64);
    let tol = FeasibilityTolerance(cfg.lp_tolerance);
    let root_bounds = model.root_bounds();
    let mut lp = model.relaxation(&root_bounds);
    let binaries: Vec<usize> = model
        .variables
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| j)
        .collect();

    let mut report = SolveReport::default();
    let mut incumbent: Option<Incumbent> = None;
    let mut heap = BinaryHeap::new();
    let mut created = 1usize;
    heap.push(Node {
        id: 0,
        parent: None,
        depth: 0,
        bound: f64::NEG_INFINITY,
        fixings: Vec::new(),
    });
    let mut status = None;

    let cutoff = |inc: &Option<Incumbent>| {
        inc.as_ref()
            .map_or(f64::INFINITY, |i| i.objective - cfg.absolute_gap)
    };

    while let Some(node) = heap.peek() {
        if cfg.prune && node.bound >= cutoff(&incumbent) {
            let node = heap.pop().expect("peeked");
            report.nodes_pruned += 1;
            record(cfg, &mut report, &node, None, NodeResult::Pruned);
            continue;
        }
        if report.nodes_explored >= cfg.node_limit {
            status = Some(SolveStatus::NodeLimit);
            break;
        }
        if deadline.is_some_and(|d| clock.elapsed() >= d) {
            status = Some(SolveStatus::TimeLimit);
            break;
        }
        let node = heap.pop().expect("peeked");
        report.nodes_explored += 1;

        for (j, b) in lp.bounds.iter_mut().enumerate() {
            *b = root_bounds[j];
        }
        for &(j, v) in &node.fixings {
            lp.bounds[j] = Bounds::new(v, v);
        }
        let solution = match solve_lp(&lp, tol)? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => {
                record(cfg, &mut report, &node, None, NodeResult::Infeasible);
                continue;
            }
            LpOutcome::Unbounded => return Err(SolveError::UnboundedRelaxation),
        };
        let bound = solution.objective + model.objective_offset;

        if cfg.prune && bound >= cutoff(&incumbent) {
            report.nodes_pruned += 1;
            record(cfg, &mut report, &node, Some(bound), NodeResult::Pruned);
            continue;
        }

        let mut branch: Option<(usize, f64)> = None;
        for &j in &binaries {
            let v = solution.values[j];
            let dist = (v - v.round()).abs();
            if dist > cfg.integrality_tolerance && branch.is_none_or(|(_, best)| dist > best) {
                branch = Some((j, dist));
            }
        }

        match branch {
            None => {
                if incumbent.as_ref().is_none_or(|i| bound < i.objective) {
                    incumbent = Some(Incumbent {
                        values: solution.values,
                        objective: bound,
                    });
                }
                record(cfg, &mut report, &node, Some(bound), NodeResult::Integral);
            }
            Some((j, _)) => {
                record(cfg, &mut report, &node, Some(bound), NodeResult::Branched(j));
                for value in [0.0, 1.0] {
                    let mut fixings = node.fixings.clone();
                    fixings.push((j, value));
                    heap.push(Node {
                        id: created,
                        parent: Some(node.id),
                        depth: node.depth + 1,
                        bound,
                        fixings,
                    });
                    created += 1;
                }
            }
        }
    }

    let open_bound = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let status = status.unwrap_or(if incumbent.is_some() {
        SolveStatus::Optimal
    } else {
        SolveStatus::Infeasible
    });
    report.best_bound = match (&incumbent, status) {
        (Some(i), _) => i.objective.min(open_bound),
        (None, SolveStatus::Infeasible) => f64::INFINITY,
        (None, _) => open_bound,
    };
    report.wall_time = clock.elapsed();
    Ok(SolveOutcome {
        status,
        incumbent,
        report,
    })
}

fn record(cfg: &SolverConfig, report: &mut SolveReport, node: &Node, bound: Option<f64>, result: NodeResult) {
    if cfg.record_tree {
        report.tree.push(NodeRecord {
            id: node.id,
            parent: node.parent,
            depth: node.depth,
            inherited_bound: node.bound,
            bound,
            result,
        });
    }
}
