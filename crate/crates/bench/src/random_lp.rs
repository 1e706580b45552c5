//! Seeded random linear programs with known feasibility status.

use jobcost_core::simplex::{Bounds, LpProblem, LpRow, Relation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn half_steps(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.random_range(2 * lo..=2 * hi)) / 2.0
}

/// A bounded LP with `1..=4` variables and `1..=6` rows that is feasible by
/// construction: every row is satisfied by a hidden interior point.
pub fn feasible_lp(seed: u64) -> LpProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4usize);
    let m = rng.random_range(1..=6usize);
    let bounds: Vec<Bounds> = (0..n)
        .map(|_| {
            let lo = half_steps(&mut rng, -3, 2);
            let width = half_steps(&mut rng, 1, 6);
            Bounds::new(lo, lo + width)
        })
        .collect();
    let point: Vec<f64> = bounds
        .iter()
        .map(|b| rng.random_range(b.lower..=b.upper))
        .collect();
    let rows = (0..m)
        .map(|_| {
            let coefficients: Vec<f64> = (0..n).map(|_| half_steps(&mut rng, -4, 4)).collect();
            let lhs: f64 = coefficients.iter().zip(&point).map(|(a, x)| a * x).sum();
            match rng.random_range(0..3u8) {
                0 => LpRow::new(coefficients, Relation::Le, lhs + rng.random_range(0.0..3.0)),
                1 => LpRow::new(coefficients, Relation::Ge, lhs - rng.random_range(0.0..3.0)),
                _ => LpRow::new(coefficients, Relation::Eq, lhs),
            }
        })
        .collect();
    let objective = (0..n).map(|_| half_steps(&mut rng, -5, 5)).collect();
    LpProblem {
        objective,
        rows,
        bounds,
    }
}

/// A feasible LP with a planted pair of contradictory rows.
pub fn infeasible_lp(seed: u64) -> LpProblem {
    let mut lp = feasible_lp(seed);
    let n = lp.objective.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let coefficients: Vec<f64> = (0..n).map(|_| half_steps(&mut rng, 1, 3)).collect();
    let level = half_steps(&mut rng, -2, 2);
    lp.rows
        .push(LpRow::new(coefficients.clone(), Relation::Ge, level + 1.0));
    lp.rows.push(LpRow::new(coefficients, Relation::Le, level));
    lp
}

/// A feasible LP extended with a free-to-grow column of negative cost.
pub fn unbounded_lp(seed: u64) -> LpProblem {
    let mut lp = feasible_lp(seed);
    lp.objective.push(-1.0);
    lp.bounds.push(Bounds::NON_NEGATIVE);
    for row in &mut lp.rows {
        // Entering only `>=` rows with a positive coefficient keeps the ray feasible.
        let c = if row.relation == Relation::Ge { 1.0 } else { 0.0 };
        row.coefficients.push(c);
    }
    lp
}
