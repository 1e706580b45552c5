//! Exhaustive vertex enumeration for tiny bounded linear programs.
//!
//! Every basic solution is the intersection of `n` active hyperplanes drawn
//! from the rows and the finite variable bounds. Enumerating all of them and
//! keeping the best feasible one gives the exact optimum of a bounded LP.

use jobcost_core::simplex::{LpProblem, Relation};

#[derive(Debug, Clone, PartialEq)]
pub enum VertexOutcome {
    Optimal { objective: f64, point: Vec<f64> },
    Infeasible,
}

/// Requires all variable bounds to be finite (the feasible set is a polytope).
pub fn enumerate_vertices(lp: &LpProblem, tol: f64) -> VertexOutcome {
    let n = lp.objective.len();
    assert!(
        lp.bounds.iter().all(|b| b.upper.is_finite()),
        "vertex enumeration needs finite bounds"
    );
    let mut planes: Vec<(Vec<f64>, f64)> = lp
        .rows
        .iter()
        .map(|r| (r.coefficients.clone(), r.rhs))
        .collect();
    for (j, b) in lp.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), b.lower));
        planes.push((e, b.upper));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for subset in combinations(planes.len(), n) {
        let a: Vec<Vec<f64>> = subset.iter().map(|&k| planes[k].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&k| planes[k].1).collect();
        let Some(x) = solve_square(a, b) else {
            continue;
        };
        if !feasible(lp, &x, tol) {
            continue;
        }
        let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|(o, _)| obj < *o) {
            best = Some((obj, x));
        }
    }
    match best {
        Some((objective, point)) => VertexOutcome::Optimal { objective, point },
        None => VertexOutcome::Infeasible,
    }
}

pub fn feasible(lp: &LpProblem, x: &[f64], tol: f64) -> bool {
    let bounds_ok = lp
        .bounds
        .iter()
        .zip(x)
        .all(|(b, &v)| v >= b.lower - tol && v <= b.upper + tol);
    bounds_ok
        && lp.rows.iter().all(|r| {
            let lhs: f64 = r.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
            match r.relation {
                Relation::Le => lhs <= r.rhs + tol,
                Relation::Ge => lhs >= r.rhs - tol,
                Relation::Eq => (lhs - r.rhs).abs() <= tol,
            }
        })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}
