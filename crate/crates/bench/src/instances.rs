//! Seeded small scheduling instances for oracle comparisons.

use jobcost_core::bench::{generate_problem, GeneratorConfig};
use jobcost_core::problem::{Problem, ValidatedProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A random instance with at most 6 workflows, 3 devices and 3 configs per
/// device. Roughly a third of them get some deadlines cut below the fastest
/// finish, so infeasible instances appear too.
pub fn small_instance(seed: u64) -> ValidatedProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let cfg = GeneratorConfig {
        workflow_count: rng.random_range(1..=6),
        device_count: rng.random_range(1..=3),
        configs_per_device: rng.random_range(1..=3),
        precedence_density: rng.random_range(0.0..0.6),
        window_slack_factor: rng.random_range(1.0..2.5),
        seed,
        ..GeneratorConfig::default()
    };
    let mut problem = generate_problem(&cfg).expect("valid generator config");
    if rng.random_bool(1.0 / 3.0) {
        tighten(&mut problem, &mut rng);
    }
    problem.validate().expect("generated instances validate")
}

fn tighten(problem: &mut Problem, rng: &mut ChaCha8Rng) {
    for w in &mut problem.workflows {
        if rng.random_bool(0.5) {
            let window = w.deadline - w.earliest_start;
            w.deadline = w.earliest_start + window * rng.random_range(0.3..0.9);
        }
    }
}
