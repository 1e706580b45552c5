//! Dense two-phase primal simplex for small linear programs.
//!
//! Variables carry explicit lower/upper bounds and are handled with the
//! bounded-variable method: nonbasic columns sit at either bound, and a
//! ratio test may end in a bound flip instead of a pivot. Entering and
//! leaving candidates are chosen by lowest index (Bland's rule), which keeps
//! the pivot sequence deterministic and cycle-free.

use thiserror::Error;

pub const DEFAULT_FEASIBILITY_TOLERANCE: f64 = 1e-7;

const PIVOT_TOLERANCE: f64 = 1e-9;
const REDUCED_COST_TOLERANCE: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(coefficients: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self {
            coefficients,
            relation,
            rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const NON_NEGATIVE: Bounds = Bounds {
        lower: 0.0,
        upper: f64::INFINITY,
    };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }
}

/// `minimize objective · x` subject to `rows` and per-variable `bounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub bounds: Vec<Bounds>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityTolerance(pub f64);

impl Default for FeasibilityTolerance {
    fn default() -> Self {
        Self(DEFAULT_FEASIBILITY_TOLERANCE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("malformed linear program: {0}")]
    Malformed(String),
    #[error("simplex did not terminate within {0} iterations")]
    IterationLimit(usize),
}

impl LpProblem {
    fn check(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Malformed(format!("objective coefficient {j} is not finite")));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if !b.lower.is_finite() || b.upper.is_nan() || b.lower > b.upper {
                return Err(LpError::Malformed(format!(
                    "variable {j} has bounds [{}, {}]",
                    b.lower, b.upper
                )));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coefficients.len() != n {
                return Err(LpError::Malformed(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.coefficients.len()
                )));
            }
            if !row.rhs.is_finite() || row.coefficients.iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }
}

pub fn solve_lp(lp: &LpProblem, tol: FeasibilityTolerance) -> Result<LpOutcome, LpError> {
    lp.check()?;
    let mut tableau = Tableau::build(lp);
    let scale = tableau.rhs_scale.max(1.0);

    if tableau.first_artificial < tableau.cols {
        let phase_one: Vec<f64> = (0..tableau.cols)
            .map(|j| if j >= tableau.first_artificial { 1.0 } else { 0.0 })
            .collect();
        tableau.set_costs(phase_one);
        match tableau.iterate()? {
            Phase::Optimal => {}
            Phase::Unbounded => unreachable!("phase one objective is bounded below"),
        }
        let infeasibility: f64 = (0..tableau.rows)
            .filter(|&i| tableau.basis[i] >= tableau.first_artificial)
            .map(|i| tableau.beta[i])
            .sum();
        if infeasibility > tol.0 * scale {
            return Ok(LpOutcome::Infeasible);
        }
        tableau.retire_artificials();
    }

    let mut costs = vec![0.0; tableau.cols];
    costs[..lp.objective.len()].copy_from_slice(&lp.objective);
    tableau.set_costs(costs);
    match tableau.iterate()? {
        Phase::Unbounded => Ok(LpOutcome::Unbounded),
        Phase::Optimal => {
            let values: Vec<f64> = (0..lp.objective.len())
                .map(|j| lp.bounds[j].lower + tableau.value(j))
                .collect();
            let objective = lp
                .objective
                .iter()
                .zip(&values)
                .map(|(c, x)| c * x)
                .sum();
            Ok(LpOutcome::Optimal(LpSolution { values, objective }))
        }
    }
}

enum Phase {
    Optimal,
    Unbounded,
}

/// Row-major `B⁻¹A` over shifted columns `x - lower`, so every column has
/// lower bound 0.
struct Tableau {
    rows: usize,
    cols: usize,
    first_artificial: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    blocked: Vec<bool>,
    costs: Vec<f64>,
    reduced: Vec<f64>,
    rhs_scale: f64,
}

impl Tableau {
    fn build(lp: &LpProblem) -> Self {
        let n = lp.objective.len();
        let m = lp.rows.len();
        let slack_count = lp.rows.iter().filter(|r| r.relation != Relation::Eq).count();

        // Shift to zero lower bounds and orient every row to a non-negative rhs.
        let mut oriented: Vec<(Vec<f64>, f64, f64)> = Vec::with_capacity(m);
        for row in &lp.rows {
            let shifted_rhs = row.rhs
                - row
                    .coefficients
                    .iter()
                    .zip(&lp.bounds)
                    .map(|(a, b)| a * b.lower)
                    .sum::<f64>();
            let slack_sign = match row.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => 0.0,
            };
            if shifted_rhs < 0.0 {
                let coeffs = row.coefficients.iter().map(|a| -a).collect();
                oriented.push((coeffs, -slack_sign, -shifted_rhs));
            } else {
                oriented.push((row.coefficients.clone(), slack_sign, shifted_rhs));
            }
        }
        let artificial_count = oriented.iter().filter(|(_, s, _)| *s <= 0.0).count();
        let first_artificial = n + slack_count;
        let cols = first_artificial + artificial_count;

        let mut a = vec![0.0; m * cols];
        let mut beta = vec![0.0; m];
        let mut basis = vec![0; m];
        let mut upper = vec![f64::INFINITY; cols];
        for (j, b) in lp.bounds.iter().enumerate() {
            upper[j] = b.upper - b.lower;
        }
        let mut next_slack = n;
        let mut next_artificial = first_artificial;
        let mut rhs_scale: f64 = 0.0;
        for (i, (coeffs, slack_sign, rhs)) in oriented.into_iter().enumerate() {
            let row = &mut a[i * cols..(i + 1) * cols];
            row[..n].copy_from_slice(&coeffs);
            let mut slack_col = None;
            if slack_sign != 0.0 {
                row[next_slack] = slack_sign;
                slack_col = Some(next_slack);
                next_slack += 1;
            }
            basis[i] = match slack_col {
                Some(s) if slack_sign > 0.0 => s,
                _ => {
                    row[next_artificial] = 1.0;
                    next_artificial += 1;
                    next_artificial - 1
                }
            };
            beta[i] = rhs;
            rhs_scale = rhs_scale.max(rhs);
        }
        let mut is_basic = vec![false; cols];
        for &b in &basis {
            is_basic[b] = true;
        }
        Self {
            rows: m,
            cols,
            first_artificial,
            a,
            beta,
            basis,
            upper,
            at_upper: vec![false; cols],
            is_basic,
            blocked: vec![false; cols],
            costs: vec![0.0; cols],
            reduced: vec![0.0; cols],
            rhs_scale,
        }
    }

    fn value(&self, j: usize) -> f64 {
        if self.is_basic[j] {
            let i = self.basis.iter().position(|&b| b == j).expect("basic column");
            self.beta[i]
        } else if self.at_upper[j] {
            self.upper[j]
        } else {
            0.0
        }
    }

    fn set_costs(&mut self, costs: Vec<f64>) {
        self.costs = costs;
        self.reduced.copy_from_slice(&self.costs);
        for i in 0..self.rows {
            let cb = self.costs[self.basis[i]];
            if cb != 0.0 {
                let row = &self.a[i * self.cols..(i + 1) * self.cols];
                for (d, &aij) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * aij;
                }
            }
        }
    }

    /// After phase one: artificials are pinned to zero and may never enter.
    fn retire_artificials(&mut self) {
        for j in self.first_artificial..self.cols {
            self.upper[j] = 0.0;
            self.blocked[j] = true;
            self.at_upper[j] = false;
        }
        for i in 0..self.rows {
            if self.basis[i] >= self.first_artificial {
                self.beta[i] = 0.0;
            }
        }
    }

    fn entering(&self) -> Option<usize> {
        (0..self.cols).find(|&j| {
            if self.is_basic[j] || self.blocked[j] || self.upper[j] <= 0.0 {
                return false;
            }
            let d = self.reduced[j];
            if self.at_upper[j] {
                d > REDUCED_COST_TOLERANCE
            } else {
                d < -REDUCED_COST_TOLERANCE
            }
        })
    }

    fn iterate(&mut self) -> Result<Phase, LpError> {
        for _ in 0..MAX_ITERATIONS {
            let Some(q) = self.entering() else {
                return Ok(Phase::Optimal);
            };
            let dir = if self.at_upper[q] { -1.0 } else { 1.0 };

            // Candidate step lengths; `None` row means the entering column
            // reaches its own opposite bound.
            let mut step = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_index = q;
            for i in 0..self.rows {
                let alpha = self.a[i * self.cols + q] * dir;
                let b = self.basis[i];
                let (limit, to_upper) = if alpha > PIVOT_TOLERANCE {
                    (self.beta[i].max(0.0) / alpha, false)
                } else if alpha < -PIVOT_TOLERANCE && self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]).max(0.0) / -alpha, true)
                } else {
                    continue;
                };
                let better = limit < step - RATIO_TIE
                    || (limit <= step + RATIO_TIE && b < leave_index);
                if better {
                    step = limit;
                    leave = Some((i, to_upper));
                    leave_index = b;
                }
            }
            if step.is_infinite() {
                return Ok(Phase::Unbounded);
            }

            for i in 0..self.rows {
                let aiq = self.a[i * self.cols + q];
                if aiq != 0.0 {
                    self.beta[i] -= step * dir * aiq;
                    self.clamp(i);
                }
            }

            match leave {
                None => self.at_upper[q] = !self.at_upper[q],
                Some((r, to_upper)) => {
                    let entering_value = if dir > 0.0 { step } else { self.upper[q] - step };
                    let old = self.basis[r];
                    self.is_basic[old] = false;
                    self.at_upper[old] = to_upper;
                    self.basis[r] = q;
                    self.is_basic[q] = true;
                    self.at_upper[q] = false;
                    self.beta[r] = entering_value;
                    self.clamp(r);
                    self.pivot(r, q);
                }
            }
        }
        Err(LpError::IterationLimit(MAX_ITERATIONS))
    }

    fn clamp(&mut self, i: usize) {
        let u = self.upper[self.basis[i]];
        let v = &mut self.beta[i];
        if *v < 0.0 && *v > -DEFAULT_FEASIBILITY_TOLERANCE {
            *v = 0.0;
        }
        if *v > u && *v < u + DEFAULT_FEASIBILITY_TOLERANCE {
            *v = u;
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let cols = self.cols;
        let inv = 1.0 / self.a[r * cols + q];
        for v in &mut self.a[r * cols..(r + 1) * cols] {
            *v *= inv;
        }
        let (before, rest) = self.a.split_at_mut(r * cols);
        let (pivot_row, after) = rest.split_at_mut(cols);
        for row in before.chunks_exact_mut(cols).chain(after.chunks_exact_mut(cols)) {
            let f = row[q];
            if f != 0.0 {
                for (x, &p) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= f * p;
                }
                row[q] = 0.0;
            }
        }
        let f = self.reduced[q];
        if f != 0.0 {
            for (d, &p) in self.reduced.iter_mut().zip(pivot_row.iter()) {
                *d -= f * p;
            }
            self.reduced[q] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LpProblem) -> LpOutcome {
        solve_lp(lp, FeasibilityTolerance::default()).unwrap()
    }

    #[test]
    fn single_bound_binds() {
        let lp = LpProblem {
            objective: vec![-1.0],
            rows: vec![],
            bounds: vec![Bounds::new(0.0, 5.0)],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert_eq!(s.values, vec![5.0]);
        assert_eq!(s.objective, -5.0);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let lp = LpProblem {
            objective: vec![1.0],
            rows: vec![
                LpRow::new(vec![1.0], Relation::Ge, 2.0),
                LpRow::new(vec![1.0], Relation::Le, 1.0),
            ],
            bounds: vec![Bounds::NON_NEGATIVE],
        };
        assert_eq!(solve(&lp), LpOutcome::Infeasible);
    }

    #[test]
    fn improving_ray_is_unbounded() {
        let lp = LpProblem {
            objective: vec![-1.0],
            rows: vec![],
            bounds: vec![Bounds::NON_NEGATIVE],
        };
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn empty_program() {
        let lp = LpProblem {
            objective: vec![],
            rows: vec![],
            bounds: vec![],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert!(s.values.is_empty());
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let lp = LpProblem {
            objective: vec![-3.0, -5.0],
            rows: vec![
                LpRow::new(vec![1.0, 0.0], Relation::Le, 4.0),
                LpRow::new(vec![0.0, 2.0], Relation::Le, 12.0),
                LpRow::new(vec![3.0, 2.0], Relation::Le, 18.0),
            ],
            bounds: vec![Bounds::NON_NEGATIVE; 2],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-9);
        assert!((s.values[1] - 6.0).abs() < 1e-9);
        assert!((s.objective + 36.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_shifted_bounds() {
        // min x + 2y st x + y = 3, x in [1, 2], y in [0.5, 10]  ->  x=2, y=1
        let lp = LpProblem {
            objective: vec![1.0, 2.0],
            rows: vec![LpRow::new(vec![1.0, 1.0], Relation::Eq, 3.0)],
            bounds: vec![Bounds::new(1.0, 2.0), Bounds::new(0.5, 10.0)],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-9);
        assert!((s.values[1] - 1.0).abs() < 1e-9);
        assert!((s.objective - 4.0).abs() < 1e-9);
    }

    #[test]
    fn negative_lower_bounds() {
        // min x st x >= -3 (bound), x + y >= -5, y <= 1
        let lp = LpProblem {
            objective: vec![1.0, 0.0],
            rows: vec![LpRow::new(vec![1.0, 1.0], Relation::Ge, -5.0)],
            bounds: vec![Bounds::new(-3.0, f64::INFINITY), Bounds::new(-10.0, 1.0)],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert!((s.objective + 3.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_equalities_are_fine() {
        let lp = LpProblem {
            objective: vec![1.0, 1.0],
            rows: vec![
                LpRow::new(vec![1.0, 1.0], Relation::Eq, 2.0),
                LpRow::new(vec![2.0, 2.0], Relation::Eq, 4.0),
                LpRow::new(vec![1.0, -1.0], Relation::Ge, 0.0),
            ],
            bounds: vec![Bounds::NON_NEGATIVE; 2],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert!((s.objective - 2.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_program_terminates() {
        // Classic cycling example for the largest-coefficient rule.
        let lp = LpProblem {
            objective: vec![-0.75, 150.0, -0.02, 6.0],
            rows: vec![
                LpRow::new(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0),
                LpRow::new(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0),
                LpRow::new(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0),
            ],
            bounds: vec![Bounds::NON_NEGATIVE; 4],
        };
        let s = solve(&lp).optimal().cloned().unwrap();
        assert!((s.objective + 0.05).abs() < 1e-9, "{}", s.objective);
    }

    #[test]
    fn malformed_inputs() {
        let lp = LpProblem {
            objective: vec![1.0, 2.0],
            rows: vec![LpRow::new(vec![1.0], Relation::Le, 1.0)],
            bounds: vec![Bounds::NON_NEGATIVE; 2],
        };
        assert!(matches!(solve_lp(&lp, FeasibilityTolerance::default()), Err(LpError::Malformed(_))));
        let lp = LpProblem {
            objective: vec![1.0],
            rows: vec![],
            bounds: vec![Bounds::new(2.0, 1.0)],
        };
        assert!(matches!(solve_lp(&lp, FeasibilityTolerance::default()), Err(LpError::Malformed(_))));
    }

    #[test]
    fn resolving_is_bit_identical() {
        let lp = LpProblem {
            objective: vec![0.3, -1.7, 0.9],
            rows: vec![
                LpRow::new(vec![1.0, 1.0, 1.0], Relation::Le, 7.5),
                LpRow::new(vec![0.2, -1.0, 0.4], Relation::Ge, -3.0),
            ],
            bounds: vec![Bounds::new(0.0, 4.0), Bounds::new(0.0, 5.0), Bounds::new(1.0, 2.0)],
        };
        assert_eq!(solve(&lp), solve(&lp));
    }
}
