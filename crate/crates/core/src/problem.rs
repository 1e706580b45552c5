//! Optimization instances: workflows, the device catalog, configuration
//! options and the duration table, plus validation into an indexed form the
//! cost, scheduling and solver code work against.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::cmp::Reverse;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A schedulable job with its time window and predecessors.
///
/// Times are hours measured from a problem-level epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowSpec {
    pub id: String,
    pub earliest_start: f64,
    pub deadline: f64,
    #[serde(default)]
    pub predecessors: BTreeSet<String>,
}

impl WorkflowSpec {
    pub fn new(id: impl Into<String>, earliest_start: f64, deadline: f64) -> Self {
        Self {
            id: id.into(),
            earliest_start,
            deadline,
            predecessors: BTreeSet::new(),
        }
    }

    pub fn after<I, S>(mut self, predecessors: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.predecessors
            .extend(predecessors.into_iter().map(Into::into));
        self
    }
}

/// A device type and its two-tier tariff.
///
/// The first `prepurchased_hours` device-hours bill at `base_rate`, the rest at
/// `overflow_rate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceCatalogEntry {
    pub id: String,
    pub base_rate: f64,
    pub overflow_rate: f64,
    pub prepurchased_hours: f64,
}

impl DeviceCatalogEntry {
    pub fn new(id: impl Into<String>, base_rate: f64, overflow_rate: f64, prepurchased_hours: f64) -> Self {
        Self {
            id: id.into(),
            base_rate,
            overflow_rate,
            prepurchased_hours,
        }
    }
}

/// One concrete sizing of a device type.
///
/// `cpu_cores` and `memory_gb` describe a single device; a configuration
/// running `device_count` devices exposes `device_count` times that shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOption {
    pub device_id: String,
    pub config_id: String,
    pub device_count: u32,
    pub cpu_cores: f64,
    pub memory_gb: f64,
}

impl ConfigOption {
    pub fn new(device_id: impl Into<String>, config_id: impl Into<String>, device_count: u32) -> Self {
        Self {
            device_id: device_id.into(),
            config_id: config_id.into(),
            device_count,
            cpu_cores: 0.0,
            memory_gb: 0.0,
        }
    }

    pub fn with_shape(mut self, cpu_cores: f64, memory_gb: f64) -> Self {
        self.cpu_cores = cpu_cores;
        self.memory_gb = memory_gb;
        self
    }
}

/// Key of a duration-table cell: (workflow, device, config).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub workflow_id: String,
    pub device_id: String,
    pub config_id: String,
}

impl CellKey {
    pub fn new(workflow_id: impl Into<String>, device_id: impl Into<String>, config_id: impl Into<String>) -> Self {
        Self {
            workflow_id: workflow_id.into(),
            device_id: device_id.into(),
            config_id: config_id.into(),
        }
    }
}

/// Execution hours per (workflow, device, config).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DurationTable {
    entries: BTreeMap<CellKey, f64>,
}

impl DurationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, workflow_id: &str, device_id: &str, config_id: &str, hours: f64) -> Option<f64> {
        self.entries
            .insert(CellKey::new(workflow_id, device_id, config_id), hours)
    }

    pub fn get(&self, workflow_id: &str, device_id: &str, config_id: &str) -> Option<f64> {
        // BTreeMap lookups need an owned key; tables are small.
        self.entries
            .get(&CellKey::new(workflow_id, device_id, config_id))
            .copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellKey, f64)> {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(CellKey, f64)> for DurationTable {
    fn from_iter<T: IntoIterator<Item = (CellKey, f64)>>(iter: T) -> Self {
        Self {
            entries: iter.into_iter().collect(),
        }
    }
}

/// A complete, unvalidated optimization instance.
///
/// The precedence relation is carried on each workflow's `predecessors`;
/// [`Problem::precedence`] returns it as ordered `(before, after)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Problem {
    pub workflows: Vec<WorkflowSpec>,
    pub devices: Vec<DeviceCatalogEntry>,
    pub configs: Vec<ConfigOption>,
    pub durations: DurationTable,
}

impl Problem {
    pub fn precedence(&self) -> BTreeSet<(String, String)> {
        self.workflows
            .iter()
            .flat_map(|w| w.predecessors.iter().map(|p| (p.clone(), w.id.clone())))
            .collect()
    }

    pub fn validate(self) -> Result<ValidatedProblem, ValidationErrors> {
        validate_problem(self)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("precedence cycle: {}", .cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },
    #[error("{context} references unknown {kind} `{id}`")]
    DanglingReference {
        context: String,
        kind: &'static str,
        id: String,
    },
    #[error("workflow `{workflow}` has no usable configuration")]
    EmptyConfigSet { workflow: String },
    #[error("duration for ({workflow}, {device}, {config}) must be finite and positive, got {hours}")]
    NonPositiveDuration {
        workflow: String,
        device: String,
        config: String,
        hours: f64,
    },
    #[error("workflow `{workflow}` window is empty: earliest start {earliest_start} >= deadline {deadline}")]
    WindowInverted {
        workflow: String,
        earliest_start: f64,
        deadline: f64,
    },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("device `{device}` has an invalid tariff: {reason}")]
    InvalidTariff { device: String, reason: String },
    #[error("config ({device}, {config}) is invalid: {reason}")]
    InvalidConfig {
        device: String,
        config: String,
        reason: String,
    },
}

/// Every violation found while validating a [`Problem`].
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl ValidationErrors {
    pub fn iter(&self) -> impl Iterator<Item = &ValidationError> {
        self.0.iter()
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} validation error(s)", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

/// A selectable (device, config) pair for one workflow, with its duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiceSlot {
    /// Index into [`ValidatedProblem::config`].
    pub config: usize,
    pub hours: f64,
}

/// Validated configuration, indexed by position in the sorted config list.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedConfig {
    pub device: usize,
    pub device_count: u32,
}

/// A [`Problem`] whose invariants have been checked.
///
/// Workflows, devices and configs are indexed in lexicographic id order
/// (configs by `(device_id, config_id)`), and each workflow's choices are the
/// configs it has a duration entry for, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedProblem {
    problem: Problem,
    workflow_order: Vec<usize>,
    device_order: Vec<usize>,
    config_order: Vec<usize>,
    configs: Vec<IndexedConfig>,
    choices: Vec<Vec<ChoiceSlot>>,
    predecessors: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl ValidatedProblem {
    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn into_problem(self) -> Problem {
        self.problem
    }

    pub fn workflow_count(&self) -> usize {
        self.workflow_order.len()
    }

    pub fn device_count(&self) -> usize {
        self.device_order.len()
    }

    pub fn config_count(&self) -> usize {
        self.config_order.len()
    }

    pub fn workflow(&self, i: usize) -> &WorkflowSpec {
        &self.problem.workflows[self.workflow_order[i]]
    }

    pub fn device(&self, d: usize) -> &DeviceCatalogEntry {
        &self.problem.devices[self.device_order[d]]
    }

    pub fn config(&self, c: usize) -> &ConfigOption {
        &self.problem.configs[self.config_order[c]]
    }

    pub fn indexed_config(&self, c: usize) -> &IndexedConfig {
        &self.configs[c]
    }

    pub fn choices(&self, i: usize) -> &[ChoiceSlot] {
        &self.choices[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.predecessors[i]
    }

    /// Topological order, ties broken by workflow id.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Precedence pairs `(before, after)` as workflow indices, sorted.
    pub fn precedence_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .predecessors
            .iter()
            .enumerate()
            .flat_map(|(j, preds)| preds.iter().map(move |&i| (i, j)))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn workflow_index(&self, id: &str) -> Option<usize> {
        self.workflow_order
            .binary_search_by(|&w| self.problem.workflows[w].id.as_str().cmp(id))
            .ok()
    }

    pub fn device_index(&self, id: &str) -> Option<usize> {
        self.device_order
            .binary_search_by(|&d| self.problem.devices[d].id.as_str().cmp(id))
            .ok()
    }

    pub fn config_index(&self, device_id: &str, config_id: &str) -> Option<usize> {
        self.config_order
            .binary_search_by(|&c| {
                let cfg = &self.problem.configs[c];
                (cfg.device_id.as_str(), cfg.config_id.as_str()).cmp(&(device_id, config_id))
            })
            .ok()
    }

    /// Position of `config` within workflow `i`'s choices.
    pub fn choice_position(&self, i: usize, config: usize) -> Option<usize> {
        self.choices[i]
            .binary_search_by(|slot| slot.config.cmp(&config))
            .ok()
    }

    /// Product of per-workflow choice counts, saturating.
    pub fn assignment_space(&self) -> u128 {
        self.choices
            .iter()
            .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128))
    }
}

/// Checks every invariant of `raw` and builds the indexed form.
///
/// All violations are collected before returning.
pub fn validate_problem(raw: Problem) -> Result<ValidatedProblem, ValidationErrors> {
    let mut errors = Vec::new();

    let workflow_order = sorted_unique(
        &raw.workflows,
        |w| w.id.as_str(),
        "workflow",
        &mut errors,
    );
    let device_order = sorted_unique(&raw.devices, |d| d.id.as_str(), "device", &mut errors);

    let workflow_pos: BTreeMap<&str, usize> = workflow_order
        .iter()
        .enumerate()
        .map(|(i, &w)| (raw.workflows[w].id.as_str(), i))
        .collect();
    let device_pos: BTreeMap<&str, usize> = device_order
        .iter()
        .enumerate()
        .map(|(i, &d)| (raw.devices[d].id.as_str(), i))
        .collect();

    for w in &raw.workflows {
        let window_ok = w.earliest_start.is_finite() && w.deadline.is_finite() && w.earliest_start < w.deadline;
        if !window_ok {
            errors.push(ValidationError::WindowInverted {
                workflow: w.id.clone(),
                earliest_start: w.earliest_start,
                deadline: w.deadline,
            });
        }
    }

    for d in &raw.devices {
        let mut reasons = Vec::new();
        if !(d.base_rate.is_finite() && d.base_rate >= 0.0) {
            reasons.push(format!("base rate {} must be finite and non-negative", d.base_rate));
        }
        if !(d.overflow_rate.is_finite() && d.overflow_rate >= d.base_rate) {
            reasons.push(format!(
                "overflow rate {} must be finite and at least the base rate {}",
                d.overflow_rate, d.base_rate
            ));
        }
        if !(d.prepurchased_hours.is_finite() && d.prepurchased_hours >= 0.0) {
            reasons.push(format!(
                "prepurchased hours {} must be finite and non-negative",
                d.prepurchased_hours
            ));
        }
        for reason in reasons {
            errors.push(ValidationError::InvalidTariff {
                device: d.id.clone(),
                reason,
            });
        }
    }

    // Configs: sorted by (device, config), deduplicated.
    let mut config_order: Vec<usize> = (0..raw.configs.len()).collect();
    config_order.sort_by(|&a, &b| {
        let (ca, cb) = (&raw.configs[a], &raw.configs[b]);
        (&ca.device_id, &ca.config_id).cmp(&(&cb.device_id, &cb.config_id))
    });
    let mut kept_configs = Vec::with_capacity(config_order.len());
    let mut configs = Vec::with_capacity(config_order.len());
    for (n, &c) in config_order.iter().enumerate() {
        let cfg = &raw.configs[c];
        if n > 0 {
            let prev = &raw.configs[config_order[n - 1]];
            if prev.device_id == cfg.device_id && prev.config_id == cfg.config_id {
                errors.push(ValidationError::DuplicateId {
                    kind: "config",
                    id: format!("{}/{}", cfg.device_id, cfg.config_id),
                });
                continue;
            }
        }
        let Some(&device) = device_pos.get(cfg.device_id.as_str()) else {
            errors.push(ValidationError::DanglingReference {
                context: format!("config `{}`", cfg.config_id),
                kind: "device",
                id: cfg.device_id.clone(),
            });
            continue;
        };
        if cfg.device_count == 0 {
            errors.push(ValidationError::InvalidConfig {
                device: cfg.device_id.clone(),
                config: cfg.config_id.clone(),
                reason: "device count must be at least 1".into(),
            });
        }
        for (label, value) in [("cpu_cores", cfg.cpu_cores), ("memory_gb", cfg.memory_gb)] {
            if !(value.is_finite() && value >= 0.0) {
                errors.push(ValidationError::InvalidConfig {
                    device: cfg.device_id.clone(),
                    config: cfg.config_id.clone(),
                    reason: format!("{label} must be finite and non-negative, got {value}"),
                });
            }
        }
        kept_configs.push(c);
        configs.push(IndexedConfig {
            device,
            device_count: cfg.device_count,
        });
    }
    let config_order = kept_configs;
    let config_pos: BTreeMap<(&str, &str), usize> = config_order
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let cfg = &raw.configs[c];
            ((cfg.device_id.as_str(), cfg.config_id.as_str()), i)
        })
        .collect();

    let mut choices: Vec<Vec<ChoiceSlot>> = vec![Vec::new(); workflow_order.len()];
    for (key, hours) in raw.durations.iter() {
        let workflow = workflow_pos.get(key.workflow_id.as_str()).copied();
        if workflow.is_none() {
            errors.push(ValidationError::DanglingReference {
                context: "duration table".into(),
                kind: "workflow",
                id: key.workflow_id.clone(),
            });
        }
        let config = config_pos
            .get(&(key.device_id.as_str(), key.config_id.as_str()))
            .copied();
        if config.is_none() {
            errors.push(ValidationError::DanglingReference {
                context: format!("duration table entry for `{}`", key.workflow_id),
                kind: "config",
                id: format!("{}/{}", key.device_id, key.config_id),
            });
        }
        if !(hours.is_finite() && hours > 0.0) {
            errors.push(ValidationError::NonPositiveDuration {
                workflow: key.workflow_id.clone(),
                device: key.device_id.clone(),
                config: key.config_id.clone(),
                hours,
            });
            continue;
        }
        if let (Some(w), Some(c)) = (workflow, config) {
            choices[w].push(ChoiceSlot { config: c, hours });
        }
    }
    for (i, slots) in choices.iter_mut().enumerate() {
        slots.sort_by_key(|s| s.config);
        if slots.is_empty() {
            errors.push(ValidationError::EmptyConfigSet {
                workflow: raw.workflows[workflow_order[i]].id.clone(),
            });
        }
    }

    let mut predecessors: Vec<Vec<usize>> = vec![Vec::new(); workflow_order.len()];
    for (j, &w) in workflow_order.iter().enumerate() {
        let spec = &raw.workflows[w];
        for p in &spec.predecessors {
            match workflow_pos.get(p.as_str()) {
                Some(&i) if i == j => errors.push(ValidationError::CycleDetected {
                    cycle: vec![spec.id.clone(), spec.id.clone()],
                }),
                Some(&i) => predecessors[j].push(i),
                None => errors.push(ValidationError::DanglingReference {
                    context: format!("predecessors of `{}`", spec.id),
                    kind: "workflow",
                    id: p.clone(),
                }),
            }
        }
        predecessors[j].sort_unstable();
    }

    let topo = match topological_order(&predecessors) {
        Ok(order) => order,
        Err(cycle) => {
            errors.push(ValidationError::CycleDetected {
                cycle: cycle
                    .into_iter()
                    .map(|i| raw.workflows[workflow_order[i]].id.clone())
                    .collect(),
            });
            Vec::new()
        }
    };

    if !errors.is_empty() {
        return Err(ValidationErrors(errors));
    }

    Ok(ValidatedProblem {
        problem: raw,
        workflow_order,
        device_order,
        config_order,
        configs,
        choices,
        predecessors,
        topo,
    })
}

fn sorted_unique<T>(
    items: &[T],
    id: impl Fn(&T) -> &str,
    kind: &'static str,
    errors: &mut Vec<ValidationError>,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| id(&items[a]).cmp(id(&items[b])));
    let mut out: Vec<usize> = Vec::with_capacity(order.len());
    for idx in order {
        if let Some(&last) = out.last() {
            if id(&items[last]) == id(&items[idx]) {
                errors.push(ValidationError::DuplicateId {
                    kind,
                    id: id(&items[idx]).to_string(),
                });
                continue;
            }
        }
        out.push(idx);
    }
    out
}

/// Kahn's algorithm with smallest-index-first tie breaking. On failure returns
/// one cycle as a closed walk `a, b, ..., a` starting at its smallest node.
fn topological_order(predecessors: &[Vec<usize>]) -> Result<Vec<usize>, Vec<usize>> {
    let n = predecessors.len();
    let mut indegree: Vec<usize> = predecessors.iter().map(Vec::len).collect();
    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, preds) in predecessors.iter().enumerate() {
        for &i in preds {
            successors[i].push(j);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(i)) = ready.pop() {
        order.push(i);
        for &j in &successors[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse(j));
            }
        }
    }
    if order.len() == n {
        return Ok(order);
    }

    // Every remaining node has a remaining predecessor; walking backwards
    // must revisit a node.
    let remaining: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] > 0).collect();
    let start = *remaining.iter().next().expect("cycle implies remaining nodes");
    let mut walk = vec![start];
    let mut seen_at: BTreeMap<usize, usize> = BTreeMap::from([(start, 0)]);
    let mut current = start;
    let closing = loop {
        let prev = *predecessors[current]
            .iter()
            .find(|p| remaining.contains(p))
            .expect("remaining node has a remaining predecessor");
        if let Some(&pos) = seen_at.get(&prev) {
            break pos;
        }
        seen_at.insert(prev, walk.len());
        walk.push(prev);
        current = prev;
    };
    let mut cycle: Vec<usize> = walk[closing..].to_vec();
    cycle.reverse();
    let min_pos = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, &v)| v)
        .map(|(p, _)| p)
        .unwrap_or(0);
    cycle.rotate_left(min_pos);
    cycle.push(cycle[0]);
    Err(cycle)
}
