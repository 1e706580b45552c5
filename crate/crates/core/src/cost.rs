//! Device usage and tiered-tariff cost of an assignment.
//!
//! Cost depends only on which configuration each workflow runs on, never on
//! when it runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::ValidatedProblem;

/// A (device, config) selection for one workflow.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Choice {
    pub device_id: String,
    pub config_id: String,
}

impl Choice {
    pub fn new(device_id: impl Into<String>, config_id: impl Into<String>) -> Self {
        Self {
            device_id: device_id.into(),
            config_id: config_id.into(),
        }
    }
}

/// One choice per workflow, keyed by workflow id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub choice: BTreeMap<String, Choice>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, workflow_id: impl Into<String>, choice: Choice) {
        self.choice.insert(workflow_id.into(), choice);
    }

    pub fn get(&self, workflow_id: &str) -> Option<&Choice> {
        self.choice.get(workflow_id)
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssignmentError {
    #[error("assignment has no choice for workflow `{0}`")]
    Incomplete(String),
    #[error("assignment names unknown workflow `{0}`")]
    UnknownWorkflow(String),
    #[error("workflow `{workflow}` has no duration entry for ({device}, {config})")]
    UnknownChoice {
        workflow: String,
        device: String,
        config: String,
    },
}

/// Per-device usage and billing for one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    /// Device-hours per device.
    pub usage: BTreeMap<String, f64>,
    /// `max(usage, prepurchased_hours)` per device.
    pub tier_pivot: BTreeMap<String, f64>,
    pub device_cost: BTreeMap<String, f64>,
    pub base_cost: f64,
    pub overflow_cost: f64,
    pub total: f64,
}

/// Split of one device's bill into the base and overflow tiers.
pub fn tiered_cost(usage: f64, prepurchased: f64, base_rate: f64, overflow_rate: f64) -> (f64, f64) {
    let base = usage.min(prepurchased) * base_rate;
    let overflow = (usage - prepurchased).max(0.0) * overflow_rate;
    (base, overflow)
}

/// The same bill written through the tier pivot `max(usage, prepurchased)`:
/// `(pivot - A)(c1 - c0) + usage * c0`.
pub fn pivot_form_cost(usage: f64, prepurchased: f64, base_rate: f64, overflow_rate: f64) -> f64 {
    let pivot = usage.max(prepurchased);
    (pivot - prepurchased) * (overflow_rate - base_rate) + usage * base_rate
}

impl ValidatedProblem {
    /// Converts an assignment into per-workflow positions within
    /// [`ValidatedProblem::choices`].
    pub fn picks_of(&self, a: &Assignment) -> Result<Vec<usize>, AssignmentError> {
        for id in a.choice.keys() {
            if self.workflow_index(id).is_none() {
                return Err(AssignmentError::UnknownWorkflow(id.clone()));
            }
        }
        (0..self.workflow_count())
            .map(|i| {
                let id = &self.workflow(i).id;
                let choice = a
                    .get(id)
                    .ok_or_else(|| AssignmentError::Incomplete(id.clone()))?;
                self.config_index(&choice.device_id, &choice.config_id)
                    .and_then(|c| self.choice_position(i, c))
                    .ok_or_else(|| AssignmentError::UnknownChoice {
                        workflow: id.clone(),
                        device: choice.device_id.clone(),
                        config: choice.config_id.clone(),
                    })
            })
            .collect()
    }

    pub fn assignment_from_picks(&self, picks: &[usize]) -> Assignment {
        let choice = picks
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let cfg = self.config(self.choices(i)[p].config);
                (
                    self.workflow(i).id.clone(),
                    Choice::new(cfg.device_id.clone(), cfg.config_id.clone()),
                )
            })
            .collect();
        Assignment { choice }
    }

    /// Device-hours per device index for the given picks, accumulated in
    /// workflow index order.
    pub fn usage_of_picks(&self, picks: &[usize], usage: &mut [f64]) {
        usage.iter_mut().for_each(|u| *u = 0.0);
        for (i, &p) in picks.iter().enumerate() {
            let slot = self.choices(i)[p];
            let cfg = self.indexed_config(slot.config);
            usage[cfg.device] += slot.hours * f64::from(cfg.device_count);
        }
    }

    /// Total tiered cost of per-device usage.
    pub fn total_of_usage(&self, usage: &[f64]) -> f64 {
        usage
            .iter()
            .enumerate()
            .map(|(d, &u)| {
                let dev = self.device(d);
                let (base, overflow) = tiered_cost(u, dev.prepurchased_hours, dev.base_rate, dev.overflow_rate);
                base + overflow
            })
            .sum()
    }

    /// Baseline assignment: each workflow on its lexicographically first
    /// (device, config) choice.
    pub fn default_picks(&self) -> Vec<usize> {
        vec![0; self.workflow_count()]
    }
}

/// Device-hours per device id; devices with nothing assigned report 0.
pub fn device_usage(p: &ValidatedProblem, a: &Assignment) -> Result<BTreeMap<String, f64>, AssignmentError> {
    let picks = p.picks_of(a)?;
    let mut usage = vec![0.0; p.device_count()];
    p.usage_of_picks(&picks, &mut usage);
    Ok(usage
        .into_iter()
        .enumerate()
        .map(|(d, u)| (p.device(d).id.clone(), u))
        .collect())
}

pub fn evaluate_cost(p: &ValidatedProblem, a: &Assignment) -> Result<CostBreakdown, AssignmentError> {
    let picks = p.picks_of(a)?;
    Ok(cost_of_picks(p, &picks))
}

pub(crate) fn cost_of_picks(p: &ValidatedProblem, picks: &[usize]) -> CostBreakdown {
    let mut usage = vec![0.0; p.device_count()];
    p.usage_of_picks(picks, &mut usage);
    let mut out = CostBreakdown {
        usage: BTreeMap::new(),
        tier_pivot: BTreeMap::new(),
        device_cost: BTreeMap::new(),
        base_cost: 0.0,
        overflow_cost: 0.0,
        total: 0.0,
    };
    for (d, &u) in usage.iter().enumerate() {
        let dev = p.device(d);
        let (base, overflow) = tiered_cost(u, dev.prepurchased_hours, dev.base_rate, dev.overflow_rate);
        out.usage.insert(dev.id.clone(), u);
        out.tier_pivot
            .insert(dev.id.clone(), u.max(dev.prepurchased_hours));
        out.device_cost.insert(dev.id.clone(), base + overflow);
        out.base_cost += base;
        out.overflow_cost += overflow;
    }
    out.total = p.total_of_usage(&usage);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ConfigOption, DeviceCatalogEntry, DurationTable, Problem, WorkflowSpec};
    use proptest::prelude::*;

    fn problem(rates: (f64, f64, f64), cells: &[(&str, &str, f64)], configs: &[(&str, u32)]) -> ValidatedProblem {
        let mut durations = DurationTable::new();
        let mut workflows: Vec<WorkflowSpec> = Vec::new();
        for (w, k, h) in cells {
            durations.insert(w, "d", k, *h);
            if !workflows.iter().any(|x| x.id == *w) {
                workflows.push(WorkflowSpec::new(*w, 0.0, 100.0));
            }
        }
        Problem {
            workflows,
            devices: vec![
                DeviceCatalogEntry::new("d", rates.0, rates.1, rates.2),
                DeviceCatalogEntry::new("idle", 1.0, 1.0, 0.0),
            ],
            configs: configs
                .iter()
                .map(|(k, b)| ConfigOption::new("d", *k, *b))
                .collect(),
            durations,
        }
        .validate()
        .unwrap()
    }

    fn assign(pairs: &[(&str, &str)]) -> Assignment {
        let mut a = Assignment::new();
        for (w, k) in pairs {
            a.set(*w, Choice::new("d", *k));
        }
        a
    }

    #[test]
    fn usage_single_workflow() {
        let vp = problem((1.0, 2.0, 10.0), &[("w", "k", 2.0)], &[("k", 3)]);
        let u = device_usage(&vp, &assign(&[("w", "k")])).unwrap();
        assert_eq!(u["d"], 6.0);
        assert_eq!(u["idle"], 0.0);
    }

    #[test]
    fn usage_two_workflows() {
        let vp = problem(
            (1.0, 2.0, 10.0),
            &[("a", "k1", 1.0), ("b", "k2", 3.0)],
            &[("k1", 2), ("k2", 1)],
        );
        let u = device_usage(&vp, &assign(&[("a", "k1"), ("b", "k2")])).unwrap();
        assert_eq!(u["d"], 5.0);
    }

    #[test]
    fn cost_within_base_tier() {
        // u = 8 device-hours, A = 10.
        let vp = problem((1.0, 2.0, 10.0), &[("w", "k", 8.0)], &[("k", 1)]);
        let c = evaluate_cost(&vp, &assign(&[("w", "k")])).unwrap();
        assert_eq!(c.total, 8.0);
        assert_eq!(c.overflow_cost, 0.0);
        assert_eq!(c.tier_pivot["d"], 10.0);
    }

    #[test]
    fn cost_with_overflow() {
        let vp = problem((1.0, 2.0, 10.0), &[("w", "k", 15.0)], &[("k", 1)]);
        let c = evaluate_cost(&vp, &assign(&[("w", "k")])).unwrap();
        assert_eq!(c.total, 20.0);
        assert_eq!(c.base_cost, 10.0);
        assert_eq!(c.overflow_cost, 10.0);
        assert_eq!(c.tier_pivot["d"], 15.0);
        assert_eq!(pivot_form_cost(15.0, 10.0, 1.0, 2.0), 20.0);
    }

    #[test]
    fn zero_usage_costs_nothing() {
        let vp = Problem {
            devices: vec![DeviceCatalogEntry::new("d", 1.0, 2.0, 5.0)],
            ..Problem::default()
        }
        .validate()
        .unwrap();
        let c = evaluate_cost(&vp, &Assignment::new()).unwrap();
        assert_eq!(c.total, 0.0);
        assert_eq!(c.usage["d"], 0.0);
    }

    #[test]
    fn assignment_errors() {
        let vp = problem((1.0, 2.0, 10.0), &[("w", "k", 1.0)], &[("k", 1), ("j", 1)]);
        assert_eq!(
            evaluate_cost(&vp, &Assignment::new()).unwrap_err(),
            AssignmentError::Incomplete("w".into())
        );
        assert!(matches!(
            evaluate_cost(&vp, &assign(&[("w", "j")])).unwrap_err(),
            AssignmentError::UnknownChoice { .. }
        ));
        assert_eq!(
            device_usage(&vp, &assign(&[("w", "k"), ("x", "k")])).unwrap_err(),
            AssignmentError::UnknownWorkflow("x".into())
        );
    }

    #[test]
    fn picks_round_trip() {
        let vp = problem(
            (1.0, 2.0, 10.0),
            &[("a", "k1", 1.0), ("a", "k2", 1.0), ("b", "k2", 3.0)],
            &[("k1", 2), ("k2", 1)],
        );
        let a = assign(&[("a", "k2"), ("b", "k2")]);
        let picks = vp.picks_of(&a).unwrap();
        assert_eq!(picks, vec![1, 0]);
        assert_eq!(vp.assignment_from_picks(&picks), a);
    }

    proptest! {
        #[test]
        fn both_cost_forms_agree(u in 0.0f64..1e4, a in 0.0f64..1e4, c0 in 0.0f64..50.0, extra in 0.0f64..50.0) {
            let c1 = c0 + extra;
            let (base, over) = tiered_cost(u, a, c0, c1);
            let piecewise = base + over;
            let pivot = pivot_form_cost(u, a, c0, c1);
            let scale = piecewise.abs().max(pivot.abs()).max(f64::MIN_POSITIVE);
            prop_assert!((piecewise - pivot).abs() <= 1e-9 * scale + 1e-12);
        }

        #[test]
        fn cost_is_monotone(u in 0.0f64..1e3, du in 0.0f64..1e3, a in 0.0f64..1e3, da in 0.0f64..1e3,
                            c0 in 0.0f64..10.0, extra in 0.0f64..10.0) {
            let c1 = c0 + extra;
            let total = |u: f64, a: f64| { let (b, o) = tiered_cost(u, a, c0, c1); b + o };
            prop_assert!(total(u + du, a) >= total(u, a) - 1e-9);
            prop_assert!(total(u, a + da) <= total(u, a) + 1e-9);
        }
    }
}
