use std::collections::BTreeMap;
use std::fmt;

use crate::problem::ValidatedProblem;
use crate::simplex::{Bounds, LpProblem, LpRow, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// The entity and role a model variable stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Workflow runs on (device, config).
    Select {
        workflow: String,
        device: String,
        config: String,
    },
    Start(String),
    Finish(String),
    Duration(String),
    Usage(String),
    TierPivot(String),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Select {
                workflow,
                device,
                config,
            } => write!(f, "x[{workflow}|{device}|{config}]"),
            Symbol::Start(w) => write!(f, "s[{w}]"),
            Symbol::Finish(w) => write!(f, "t[{w}]"),
            Symbol::Duration(w) => write!(f, "g[{w}]"),
            Symbol::Usage(d) => write!(f, "u[{d}]"),
            Symbol::TierPivot(d) => write!(f, "u1[{d}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub symbol: Symbol,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RowKind {
    /// Exactly one selection per workflow.
    SingleChoice(String),
    /// Device usage equals the device-hours of its selections.
    UsageBalance(String),
    /// Usage stays under the tier pivot (or a hard cap).
    UsageCap(String),
    /// Pre-purchased hours stay under the tier pivot.
    Prepurchase(String),
    /// `start + duration = finish`.
    FinishLink(String),
    /// Duration equals the selected table entry.
    DurationLink(String),
    Precedence { before: String, after: String },
    EarliestStart(String),
    Deadline(String),
}

/// A sparse linear row over model variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRow {
    pub kind: RowKind,
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// The scheduling MILP over a validated problem.
///
/// Variable layout: one binary per (workflow, choice) in workflow-then-choice
/// order, which is lexicographic in (workflow, device, config); then
/// `s, t, g` per workflow; then `u, u1` per device.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub variables: Vec<Variable>,
    pub rows: Vec<ModelRow>,
    /// Linear objective coefficients per variable.
    pub objective: Vec<f64>,
    /// Constant term `-Σ A_d (c1_d - c0_d)` of the cost objective.
    pub objective_offset: f64,
    problem: ValidatedProblem,
    names: BTreeMap<String, usize>,
    select_base: Vec<usize>,
    timing_base: usize,
    device_base: usize,
}

impl MilpModel {
    pub fn problem(&self) -> &ValidatedProblem {
        &self.problem
    }

    pub fn variable_by_name(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn variable_name(&self, index: usize) -> String {
        self.variables[index].symbol.to_string()
    }

    pub fn binary_count(&self) -> usize {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .count()
    }

    pub fn continuous_count(&self) -> usize {
        self.variables.len() - self.binary_count()
    }

    pub fn rows_of<'a>(&'a self, pred: impl Fn(&RowKind) -> bool + 'a) -> impl Iterator<Item = &'a ModelRow> + 'a {
        self.rows.iter().filter(move |r| pred(&r.kind))
    }

    /// Index of the selection binary for workflow `i`, choice position `p`.
    pub fn select_var(&self, i: usize, p: usize) -> usize {
        self.select_base[i] + p
    }

    pub fn start_var(&self, i: usize) -> usize {
        self.timing_base + 3 * i
    }

    pub fn finish_var(&self, i: usize) -> usize {
        self.timing_base + 3 * i + 1
    }

    pub fn duration_var(&self, i: usize) -> usize {
        self.timing_base + 3 * i + 2
    }

    pub fn usage_var(&self, d: usize) -> usize {
        self.device_base + 2 * d
    }

    pub fn pivot_var(&self, d: usize) -> usize {
        self.device_base + 2 * d + 1
    }

    /// Objective value of a full variable vector, offset included.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(c, x)| c * x)
            .sum::<f64>()
            + self.objective_offset
    }

    /// Dense LP relaxation with the given bounds on every variable.
    pub fn relaxation(&self, bounds: &[Bounds]) -> LpProblem {
        let n = self.variables.len();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut coefficients = vec![0.0; n];
                for &(j, a) in &r.terms {
                    coefficients[j] += a;
                }
                LpRow::new(coefficients, r.relation, r.rhs)
            })
            .collect();
        LpProblem {
            objective: self.objective.clone(),
            rows,
            bounds: bounds.to_vec(),
        }
    }

    pub fn root_bounds(&self) -> Vec<Bounds> {
        self.variables
            .iter()
            .map(|v| Bounds::new(v.lower, v.upper))
            .collect()
    }
}

/// Builds the scheduling MILP with the tier pivot as a free decision variable.
pub fn build_milp(vp: &ValidatedProblem) -> MilpModel {
    build(vp, &BTreeMap::new())
}

/// Like [`build_milp`], but for each listed device the usage row is bounded
/// by the given constant instead of the tier pivot.
pub fn build_milp_with_caps(vp: &ValidatedProblem, caps: &BTreeMap<String, f64>) -> MilpModel {
    build(vp, caps)
}

fn build(vp: &ValidatedProblem, caps: &BTreeMap<String, f64>) -> MilpModel {
    let nw = vp.workflow_count();
    let nd = vp.device_count();
    let mut variables = Vec::new();
    let mut select_base = Vec::with_capacity(nw);

    for i in 0..nw {
        select_base.push(variables.len());
        let wid = &vp.workflow(i).id;
        for slot in vp.choices(i) {
            let cfg = vp.config(slot.config);
            variables.push(Variable {
                symbol: Symbol::Select {
                    workflow: wid.clone(),
                    device: cfg.device_id.clone(),
                    config: cfg.config_id.clone(),
                },
                kind: VarKind::Binary,
                lower: 0.0,
                upper: 1.0,
            });
        }
    }

    // Timing variables only need a finite lower bound below every window.
    let time_floor = (0..nw)
        .map(|i| vp.workflow(i).earliest_start)
        .fold(0.0, f64::min);
    let timing_base = variables.len();
    for i in 0..nw {
        let wid = &vp.workflow(i).id;
        for (symbol, lower) in [
            (Symbol::Start(wid.clone()), time_floor),
            (Symbol::Finish(wid.clone()), time_floor),
            (Symbol::Duration(wid.clone()), 0.0),
        ] {
            variables.push(Variable {
                symbol,
                kind: VarKind::Continuous,
                lower,
                upper: f64::INFINITY,
            });
        }
    }
    let device_base = variables.len();
    for d in 0..nd {
        let did = &vp.device(d).id;
        for symbol in [Symbol::Usage(did.clone()), Symbol::TierPivot(did.clone())] {
            variables.push(Variable {
                symbol,
                kind: VarKind::Continuous,
                lower: 0.0,
                upper: f64::INFINITY,
            });
        }
    }

    let mut objective = vec![0.0; variables.len()];
    let mut objective_offset = 0.0;
    for d in 0..nd {
        let dev = vp.device(d);
        let spread = dev.overflow_rate - dev.base_rate;
        objective[device_base + 2 * d + 1] = spread;
        objective[device_base + 2 * d] = dev.base_rate;
        objective_offset -= dev.prepurchased_hours * spread;
    }

    let start = |i: usize| timing_base + 3 * i;
    let finish = |i: usize| timing_base + 3 * i + 1;
    let duration = |i: usize| timing_base + 3 * i + 2;
    let usage = |d: usize| device_base + 2 * d;
    let pivot = |d: usize| device_base + 2 * d + 1;

    let mut rows = Vec::new();
    for i in 0..nw {
        let wid = vp.workflow(i).id.clone();
        rows.push(ModelRow {
            kind: RowKind::SingleChoice(wid),
            terms: (0..vp.choices(i).len())
                .map(|p| (select_base[i] + p, 1.0))
                .collect(),
            relation: Relation::Eq,
            rhs: 1.0,
        });
    }
    for d in 0..nd {
        let dev = vp.device(d);
        let mut terms = Vec::new();
        for i in 0..nw {
            for (p, slot) in vp.choices(i).iter().enumerate() {
                let cfg = vp.indexed_config(slot.config);
                if cfg.device == d {
                    terms.push((select_base[i] + p, slot.hours * f64::from(cfg.device_count)));
                }
            }
        }
        terms.push((usage(d), -1.0));
        rows.push(ModelRow {
            kind: RowKind::UsageBalance(dev.id.clone()),
            terms,
            relation: Relation::Eq,
            rhs: 0.0,
        });
        let cap_row = match caps.get(&dev.id) {
            Some(&cap) => ModelRow {
                kind: RowKind::UsageCap(dev.id.clone()),
                terms: vec![(usage(d), 1.0)],
                relation: Relation::Le,
                rhs: cap,
            },
            None => ModelRow {
                kind: RowKind::UsageCap(dev.id.clone()),
                terms: vec![(usage(d), 1.0), (pivot(d), -1.0)],
                relation: Relation::Le,
                rhs: 0.0,
            },
        };
        rows.push(cap_row);
        rows.push(ModelRow {
            kind: RowKind::Prepurchase(dev.id.clone()),
            terms: vec![(pivot(d), 1.0)],
            relation: Relation::Ge,
            rhs: dev.prepurchased_hours,
        });
    }
    for i in 0..nw {
        let w = vp.workflow(i);
        rows.push(ModelRow {
            kind: RowKind::FinishLink(w.id.clone()),
            terms: vec![(start(i), 1.0), (duration(i), 1.0), (finish(i), -1.0)],
            relation: Relation::Eq,
            rhs: 0.0,
        });
        let mut terms: Vec<(usize, f64)> = vp
            .choices(i)
            .iter()
            .enumerate()
            .map(|(p, slot)| (select_base[i] + p, slot.hours))
            .collect();
        terms.push((duration(i), -1.0));
        rows.push(ModelRow {
            kind: RowKind::DurationLink(w.id.clone()),
            terms,
            relation: Relation::Eq,
            rhs: 0.0,
        });
    }
    for (i, j) in vp.precedence_pairs() {
        rows.push(ModelRow {
            kind: RowKind::Precedence {
                before: vp.workflow(i).id.clone(),
                after: vp.workflow(j).id.clone(),
            },
            terms: vec![(finish(i), 1.0), (start(j), -1.0)],
            relation: Relation::Le,
            rhs: 0.0,
        });
    }
    for i in 0..nw {
        let w = vp.workflow(i);
        rows.push(ModelRow {
            kind: RowKind::EarliestStart(w.id.clone()),
            terms: vec![(start(i), 1.0)],
            relation: Relation::Ge,
            rhs: w.earliest_start,
        });
        rows.push(ModelRow {
            kind: RowKind::Deadline(w.id.clone()),
            terms: vec![(finish(i), 1.0)],
            relation: Relation::Le,
            rhs: w.deadline,
        });
    }

    let names = variables
        .iter()
        .enumerate()
        .map(|(j, v)| (v.symbol.to_string(), j))
        .collect();

    MilpModel {
        variables,
        rows,
        objective,
        objective_offset,
        problem: vp.clone(),
        names,
        select_base,
        timing_base,
        device_base,
    }
}
