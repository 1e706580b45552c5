use thiserror::Error;

use crate::cost::Assignment;
use crate::problem::ValidatedProblem;

/// Enumeration guard on the number of assignments.
pub const MAX_ENUMERATION: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleVerdict {
    Optimal { cost: f64, assignment: Assignment },
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub verdict: OracleVerdict,
    /// Assignments visited; always the full product of choice counts.
    pub enumerated: u64,
}

impl OracleResult {
    pub fn cost(&self) -> Option<f64> {
        match self.verdict {
            OracleVerdict::Optimal { cost, .. } => Some(cost),
            OracleVerdict::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{size} assignments exceed the enumeration limit of {MAX_ENUMERATION}")]
pub struct TooLarge {
    pub size: u128,
}

/// Exhaustive minimum-cost search over every assignment.
///
/// An assignment counts as feasible when its earliest-start schedule meets all
/// deadlines. Ties keep the lexicographically first assignment.
pub fn brute_force_optimum(vp: &ValidatedProblem) -> Result<OracleResult, TooLarge> {
    let size = vp.assignment_space();
    if size > MAX_ENUMERATION {
        return Err(TooLarge { size });
    }
    let n = vp.workflow_count();
    let radix: Vec<usize> = (0..n).map(|i| vp.choices(i).len()).collect();
    let mut picks = vec![0usize; n];
    let (mut start, mut finish) = (vec![0.0; n], vec![0.0; n]);
    let mut usage = vec![0.0; vp.device_count()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut enumerated = 0u64;

    loop {
        enumerated += 1;
        if vp.picks_feasible(&picks, &mut start, &mut finish) {
            vp.usage_of_picks(&picks, &mut usage);
            let cost = vp.total_of_usage(&usage);
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, picks.clone()));
            }
        }
        // Odometer with the first workflow as the most significant digit.
        let mut pos = n;
        loop {
            if pos == 0 {
                let verdict = match best {
                    Some((cost, p)) => OracleVerdict::Optimal {
                        cost,
                        assignment: vp.assignment_from_picks(&p),
                    },
                    None => OracleVerdict::Infeasible,
                };
                return Ok(OracleResult { verdict, enumerated });
            }
            pos -= 1;
            picks[pos] += 1;
            if picks[pos] < radix[pos] {
                break;
            }
            picks[pos] = 0;
        }
    }
}
