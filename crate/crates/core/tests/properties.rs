use std::collections::BTreeMap;

use jobcost_core::bench::{brute_force_optimum, generate_problem, GeneratorConfig, OracleVerdict};
use jobcost_core::cost::{evaluate_cost, pivot_form_cost, tiered_cost};
use jobcost_core::problem::ValidatedProblem;
use jobcost_core::schedule::{check_schedule, earliest_schedule, Schedule, ScheduleError};
use jobcost_core::solver::{build_milp, extract_solution, solve, SolveStatus, SolverConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, workflows: usize) -> ValidatedProblem {
    generate_problem(&GeneratorConfig {
        workflow_count: workflows,
        seed,
        ..GeneratorConfig::default()
    })
    .unwrap()
    .validate()
    .unwrap()
}

fn random_picks(vp: &ValidatedProblem, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..vp.workflow_count())
        .map(|i| rng.random_range(0..vp.choices(i).len()))
        .collect()
}

fn timing_violations(vp: &ValidatedProblem, s: &Schedule) -> usize {
    check_schedule(vp, s).len()
}

#[test]
fn earliest_schedule_passes_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut feasible = 0;
    for seed in 0..100 {
        let vp = instance(seed, 6);
        let mut candidates = vec![vp.fastest_picks()];
        candidates.extend((0..10).map(|_| random_picks(&vp, &mut rng)));
        for picks in candidates {
            let a = vp.assignment_from_picks(&picks);
            if let Ok(s) = earliest_schedule(&vp, &a) {
                feasible += 1;
                assert!(check_schedule(&vp, &s).is_empty(), "seed {seed}");
            }
        }
    }
    assert!(feasible > 100, "{feasible}");
}

#[test]
fn infeasible_assignments_survive_random_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    for seed in 0..40 {
        let vp = instance(seed, 5);
        let a = vp.assignment_from_picks(&random_picks(&vp, &mut rng));
        let culprits = match earliest_schedule(&vp, &a) {
            Err(ScheduleError::Infeasible(inf)) => inf.culprits,
            _ => continue,
        };
        assert!(!culprits.is_empty());
        cases += 1;
        let mut base = Schedule {
            assignment: a.clone(),
            start: BTreeMap::new(),
            finish: BTreeMap::new(),
            duration: BTreeMap::new(),
        };
        let picks = vp.picks_of(&a).unwrap();
        for (i, &p) in picks.iter().enumerate() {
            base.duration.insert(vp.workflow(i).id.clone(), vp.choices(i)[p].hours);
        }
        for _ in 0..1000 {
            let mut s = base.clone();
            for i in 0..vp.workflow_count() {
                let w = vp.workflow(i);
                let g = s.duration[&w.id];
                let start = rng.random_range(w.earliest_start - 1.0..w.deadline + 1.0);
                s.start.insert(w.id.clone(), start);
                s.finish.insert(w.id.clone(), start + g);
            }
            assert!(timing_violations(&vp, &s) > 0, "seed {seed}");
        }
        if cases >= 10 {
            break;
        }
    }
    assert!(cases >= 10, "{cases}");
}

#[test]
fn generated_problems_are_feasible() {
    for seed in 0..100 {
        let vp = instance(seed, 5);
        let r = brute_force_optimum(&vp).unwrap();
        assert!(matches!(r.verdict, OracleVerdict::Optimal { .. }), "seed {seed}");
        let product: u64 = (0..vp.workflow_count()).map(|i| vp.choices(i).len() as u64).product();
        assert_eq!(r.enumerated, product);
    }
}

#[test]
fn extracted_cost_matches_objective() {
    let cfg = SolverConfig::default();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let vp = instance(seed, 4);
        let model = build_milp(&vp);
        let out = solve(&model, &cfg).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        let sol = extract_solution(&model, &out, &cfg).unwrap();
        let recomputed = evaluate_cost(&vp, &sol.assignment).unwrap().total;
        worst = worst.max((recomputed - out.incumbent.as_ref().unwrap().objective).abs());
        assert!(check_schedule(&vp, &sol.schedule).is_empty());
    }
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn cost_ignores_timing() {
    let vp = instance(3, 5);
    let model = build_milp(&vp);
    let cfg = SolverConfig::default();
    let sol = extract_solution(&model, &solve(&model, &cfg).unwrap(), &cfg).unwrap();
    let before = evaluate_cost(&vp, &sol.schedule.assignment).unwrap();
    let mut shifted = sol.schedule.clone();
    shifted.start.values_mut().for_each(|s| *s += 100.0);
    shifted.finish.values_mut().for_each(|t| *t += 100.0);
    assert!(!check_schedule(&vp, &shifted).is_empty());
    assert_eq!(evaluate_cost(&vp, &shifted.assignment).unwrap(), before);
}

proptest! {
    #[test]
    fn both_cost_forms_agree(u in 0.0f64..1e4, a in 0.0f64..1e4, c0 in 0.0f64..50.0, markup in 0.0f64..50.0) {
        let c1 = c0 + markup;
        let (base, over) = tiered_cost(u, a, c0, c1);
        let piecewise = base + over;
        let pivot = pivot_form_cost(u, a, c0, c1);
        prop_assert!((piecewise - pivot).abs() <= 1e-9 * piecewise.abs().max(1.0));
    }

    #[test]
    fn cost_monotone_in_usage_and_prepurchase(
        u in 0.0f64..1e3, du in 0.0f64..1e3, a in 0.0f64..1e3, da in 0.0f64..1e3,
        c0 in 0.0f64..10.0, markup in 0.0f64..10.0,
    ) {
        let c1 = c0 + markup;
        let total = |u, a| { let (b, o) = tiered_cost(u, a, c0, c1); b + o };
        prop_assert!(total(u + du, a) >= total(u, a));
        prop_assert!(total(u, a + da) <= total(u, a));
    }
}
