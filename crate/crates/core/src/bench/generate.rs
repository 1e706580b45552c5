use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::problem::{ConfigOption, DeviceCatalogEntry, DurationTable, Problem, WorkflowSpec};

/// Shape and value ranges of a synthetic scheduling instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub workflow_count: usize,
    pub device_count: usize,
    pub configs_per_device: usize,
    /// Probability of an edge between any two workflows (in generation order).
    pub precedence_density: f64,
    /// Deadline stretch over the fastest earliest finish; at least 1.
    pub window_slack_factor: f64,
    pub base_rate: (f64, f64),
    /// Overflow rate as a multiple of the base rate.
    pub overflow_markup: (f64, f64),
    /// Single-device hours of work per workflow.
    pub work_hours: (f64, f64),
    /// Releases are drawn from `[0, release_spread]` hours.
    pub release_spread: f64,
    /// Pre-purchased hours as a fraction of one device's share of total work.
    pub prepurchase_fraction: (f64, f64),
    pub max_device_count: u32,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            workflow_count: 5,
            device_count: 2,
            configs_per_device: 3,
            precedence_density: 0.3,
            window_slack_factor: 1.5,
            base_rate: (0.5, 3.0),
            overflow_markup: (1.0, 2.5),
            work_hours: (0.5, 8.0),
            release_spread: 4.0,
            prepurchase_fraction: (0.0, 1.0),
            max_device_count: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid generator config: {0}")]
pub struct GeneratorError(pub String);

impl GeneratorConfig {
    pub fn check(&self) -> Result<(), GeneratorError> {
        let fail = |m: &str| Err(GeneratorError(m.to_string()));
        if self.workflow_count == 0 || self.device_count == 0 || self.configs_per_device == 0 {
            return fail("counts must be at least 1");
        }
        if self.configs_per_device > self.max_device_count as usize {
            return fail("configs_per_device exceeds max_device_count");
        }
        if !(0.0..=1.0).contains(&self.precedence_density) {
            return fail("precedence_density must lie in [0, 1]");
        }
        if !(self.window_slack_factor >= 1.0) {
            return fail("window_slack_factor must be at least 1");
        }
        for (name, (lo, hi), floor) in [
            ("base_rate", self.base_rate, 0.0),
            ("overflow_markup", self.overflow_markup, 1.0),
            ("work_hours", self.work_hours, f64::MIN_POSITIVE),
            ("prepurchase_fraction", self.prepurchase_fraction, 0.0),
        ] {
            if !(lo >= floor && lo <= hi && hi.is_finite()) {
                return Err(GeneratorError(format!("{name} range is empty or out of domain")));
            }
        }
        if !(self.release_spread >= 0.0 && self.release_spread.is_finite()) {
            return fail("release_spread must be non-negative");
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn padded(prefix: char, i: usize, count: usize) -> String {
    let width = count.saturating_sub(1).to_string().len();
    format!("{prefix}{i:0width$}")
}

/// Generates a seeded instance that always admits a feasible assignment.
///
/// Durations shrink sublinearly with device count, so larger configs finish
/// sooner but burn more device-hours. Deadlines are set from the earliest
/// schedule of the all-fastest assignment, stretched by the slack factor.
pub fn generate_problem(cfg: &GeneratorConfig) -> Result<Problem, GeneratorError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nw = cfg.workflow_count;

    let mut devices = Vec::with_capacity(cfg.device_count);
    let mut configs = Vec::new();
    let mut speed = Vec::with_capacity(cfg.device_count);
    for d in 0..cfg.device_count {
        let id = padded('d', d, cfg.device_count);
        let base = draw(&mut rng, cfg.base_rate);
        let overflow = base * draw(&mut rng, cfg.overflow_markup);
        devices.push(DeviceCatalogEntry::new(id.clone(), base, overflow, 0.0));
        speed.push(rng.random_range(0.6..1.4));
        let mut counts: Vec<u32> = (1..=cfg.max_device_count).collect();
        counts.shuffle(&mut rng);
        let cores = f64::from(4u32 << rng.random_range(0..3u32));
        for (k, &b) in counts.iter().take(cfg.configs_per_device).enumerate() {
            configs.push(
                ConfigOption::new(id.clone(), padded('k', k, cfg.configs_per_device), b)
                    .with_shape(cores, cores * 4.0),
            );
        }
    }

    let work: Vec<f64> = (0..nw).map(|_| draw(&mut rng, cfg.work_hours)).collect();
    let mut durations = DurationTable::new();
    let mut fastest = vec![f64::INFINITY; nw];
    let wid: Vec<String> = (0..nw).map(|i| padded('w', i, nw)).collect();
    for (i, id) in wid.iter().enumerate() {
        for c in &configs {
            let d = devices.iter().position(|x| x.id == c.device_id).expect("own device");
            let h = work[i] * speed[d] / f64::from(c.device_count).powf(0.8) * rng.random_range(0.9..1.1);
            durations.insert(id, &c.device_id, &c.config_id, h);
            fastest[i] = fastest[i].min(h);
        }
    }

    let mut predecessors = vec![Vec::new(); nw];
    for j in 0..nw {
        for i in 0..j {
            if cfg.precedence_density > 0.0 && rng.random_bool(cfg.precedence_density) {
                predecessors[j].push(i);
            }
        }
    }

    let release: Vec<f64> = (0..nw).map(|_| draw(&mut rng, (0.0, cfg.release_spread))).collect();
    let mut finish = vec![0.0; nw];
    let mut workflows = Vec::with_capacity(nw);
    for i in 0..nw {
        let start = predecessors[i].iter().map(|&p| finish[p]).fold(release[i], f64::max);
        finish[i] = start + fastest[i];
        let deadline = release[i] + cfg.window_slack_factor * (finish[i] - release[i]);
        workflows.push(
            WorkflowSpec::new(wid[i].clone(), release[i], deadline)
                .after(predecessors[i].iter().map(|&p| wid[p].clone())),
        );
    }

    let total_work: f64 = work.iter().sum();
    for dev in &mut devices {
        dev.prepurchased_hours = draw(&mut rng, cfg.prepurchase_fraction) * total_work / cfg.device_count as f64;
    }

    Ok(Problem {
        workflows,
        devices,
        configs,
        durations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_problem() {
        let cfg = GeneratorConfig {
            seed: 42,
            ..GeneratorConfig::default()
        };
        assert_eq!(generate_problem(&cfg).unwrap(), generate_problem(&cfg).unwrap());
        let other = GeneratorConfig { seed: 43, ..cfg.clone() };
        assert_ne!(generate_problem(&cfg).unwrap(), generate_problem(&other).unwrap());
    }

    #[test]
    fn zero_density_has_no_precedence() {
        let cfg = GeneratorConfig {
            precedence_density: 0.0,
            workflow_count: 12,
            ..GeneratorConfig::default()
        };
        assert!(generate_problem(&cfg).unwrap().precedence().is_empty());
    }

    #[test]
    fn ids_sort_in_generation_order() {
        let cfg = GeneratorConfig {
            workflow_count: 12,
            ..GeneratorConfig::default()
        };
        let p = generate_problem(&cfg).unwrap();
        let ids: Vec<&str> = p.workflows.iter().map(|w| w.id.as_str()).collect();
        assert_eq!(ids[0], "w00");
        assert!(ids.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(p.durations.len(), 12 * 2 * 3);
    }

    #[test]
    fn rejects_bad_config() {
        for bad in [
            GeneratorConfig {
                workflow_count: 0,
                ..GeneratorConfig::default()
            },
            GeneratorConfig {
                window_slack_factor: 0.5,
                ..GeneratorConfig::default()
            },
            GeneratorConfig {
                base_rate: (2.0, 1.0),
                ..GeneratorConfig::default()
            },
            GeneratorConfig {
                precedence_density: 1.5,
                ..GeneratorConfig::default()
            },
        ] {
            assert!(generate_problem(&bad).is_err());
        }
    }
}
