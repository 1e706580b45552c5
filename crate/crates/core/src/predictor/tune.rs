use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::Dataset;
use super::linear::{Family, FitSpec, Moments};
use super::metrics::mean_absolute_error;
use super::PredictError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TuneConfig {
    pub folds: usize,
    pub coarse_grid: Vec<f64>,
    pub fine_step: f64,
    /// Fine scan is clipped to this closed range.
    pub alpha_range: (f64, f64),
    /// Shuffle rows into folds with this seed instead of `index mod folds`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            coarse_grid: vec![0.01, 0.1, 1.0, 10.0],
            fine_step: 0.01,
            alpha_range: (0.01, 10.0),
            shuffle_seed: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaScore {
    pub alpha: f64,
    /// Mean validation MAE over the folds.
    pub cv_mae: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub family: Family,
    pub l1_ratio: f64,
    pub best_alpha: f64,
    pub folds: usize,
    /// Every scored alpha, ascending.
    pub cv_score_by_alpha: Vec<AlphaScore>,
}

impl TuneResult {
    pub fn best_score(&self) -> f64 {
        self.cv_score_by_alpha
            .iter()
            .find(|s| s.alpha == self.best_alpha)
            .map_or(f64::NAN, |s| s.cv_mae)
    }
}

struct Fold {
    moments: Moments,
    columns: Vec<String>,
    validation: Dataset,
}

/// Fold index of every row.
pub fn fold_assignment(n: usize, folds: usize, shuffle_seed: Option<u64>) -> Vec<usize> {
    match shuffle_seed {
        None => (0..n).map(|i| i % folds).collect(),
        Some(seed) => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let mut out = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                out[i] = pos % folds;
            }
            out
        }
    }
}

/// Cross-validated scorer with per-fold normalization statistics.
pub struct CrossValidator {
    folds: Vec<Fold>,
    base: FitSpec,
}

impl CrossValidator {
    pub fn new(data: &Dataset, base: FitSpec, folds: usize, shuffle_seed: Option<u64>) -> Result<Self, PredictError> {
        if folds < 2 {
            return Err(PredictError::InvalidSpec("at least 2 folds are needed".into()));
        }
        if data.len() < folds {
            return Err(PredictError::TooFewSamples {
                needed: folds,
                got: data.len(),
            });
        }
        let assign = fold_assignment(data.len(), folds, shuffle_seed);
        let folds = (0..folds)
            .into_par_iter()
            .map(|f| {
                let train: Vec<usize> = (0..data.len()).filter(|&i| assign[i] != f).collect();
                let held: Vec<usize> = (0..data.len()).filter(|&i| assign[i] == f).collect();
                Fold {
                    moments: Moments::of(&data.subset(&train)),
                    columns: data.columns.clone(),
                    validation: data.subset(&held),
                }
            })
            .collect();
        Ok(Self { folds, base })
    }

    /// Mean validation MAE at `alpha`.
    pub fn score(&self, alpha: f64) -> Result<f64, PredictError> {
        let spec = self.base.with_alpha(alpha);
        let mut total = 0.0;
        for fold in &self.folds {
            let beta = fold.moments.solve(&spec)?;
            let model = fold.moments.clone().into_model(&spec, &beta, fold.columns.clone());
            let predicted = fold
                .validation
                .rows
                .iter()
                .map(|x| model.predict(x))
                .collect::<Result<Vec<_>, _>>()?;
            total += mean_absolute_error(&fold.validation.targets, &predicted);
        }
        Ok(total / self.folds.len() as f64)
    }

    fn score_all(&self, alphas: &[f64]) -> Result<Vec<AlphaScore>, PredictError> {
        alphas
            .par_iter()
            .map(|&alpha| self.score(alpha).map(|cv_mae| AlphaScore { alpha, cv_mae }))
            .collect()
    }
}

/// Linear grid `k * step` covering `[lo, hi]`.
pub fn fine_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let inv = (1.0 / step).round();
    let exact = ((1.0 / step) - inv).abs() < 1e-9;
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last)
        .map(|k| if exact { k as f64 / inv } else { k as f64 * step })
        .collect()
}

/// Coarse decade scan, then a linear scan around the coarse winner.
///
/// Ties resolve to the smaller alpha.
pub fn tune_alpha(data: &Dataset, base: FitSpec, cfg: &TuneConfig) -> Result<TuneResult, PredictError> {
    if cfg.coarse_grid.is_empty() || !(cfg.fine_step > 0.0) || cfg.coarse_grid.iter().any(|a| !(*a > 0.0)) {
        return Err(PredictError::InvalidSpec("coarse grid must be non-empty and positive, step positive".into()));
    }
    if base.family == Family::Ols {
        return Err(PredictError::InvalidSpec("ols has no alpha to tune".into()));
    }
    let cv = CrossValidator::new(data, base, cfg.folds, cfg.shuffle_seed)?;
    let mut coarse = cfg.coarse_grid.clone();
    coarse.sort_by(f64::total_cmp);
    let mut scores = cv.score_all(&coarse)?;
    let coarse_best = argmin(&scores).alpha;

    let lo = (coarse_best / 10.0).max(cfg.alpha_range.0);
    let hi = (coarse_best * 10.0).min(cfg.alpha_range.1);
    let fine: Vec<f64> = fine_grid(lo, hi, cfg.fine_step)
        .into_iter()
        .filter(|a| !scores.iter().any(|s| same_alpha(s.alpha, *a)))
        .collect();
    scores.extend(cv.score_all(&fine)?);
    scores.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));

    Ok(TuneResult {
        family: base.family,
        l1_ratio: base.l1_ratio,
        best_alpha: argmin(&scores).alpha,
        folds: cfg.folds,
        cv_score_by_alpha: scores,
    })
}

fn same_alpha(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// First minimum in ascending alpha order.
fn argmin(scores: &[AlphaScore]) -> AlphaScore {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    let mut best = sorted[0];
    for s in &sorted[1..] {
        if s.cv_mae < best.cv_mae {
            best = *s;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fine_grid_hits_hundredths_exactly() {
        let g = fine_grid(0.1, 10.0, 0.01);
        assert_eq!(g.len(), 991);
        assert_eq!(g[0], 0.1);
        assert_eq!(*g.last().unwrap(), 10.0);
        assert!(g.contains(&1.45));
        assert_eq!(fine_grid(0.01, 0.1, 0.01).len(), 10);
    }

    #[test]
    fn folds_are_index_mod_k() {
        assert_eq!(fold_assignment(7, 3, None), vec![0, 1, 2, 0, 1, 2, 0]);
        let shuffled = fold_assignment(100, 5, Some(9));
        for f in 0..5 {
            assert_eq!(shuffled.iter().filter(|&&x| x == f).count(), 20);
        }
        assert_eq!(shuffled, fold_assignment(100, 5, Some(9)));
    }

    #[test]
    fn ties_go_to_smaller_alpha() {
        let s = [
            AlphaScore { alpha: 2.0, cv_mae: 1.0 },
            AlphaScore { alpha: 1.0, cv_mae: 1.0 },
            AlphaScore { alpha: 3.0, cv_mae: 2.0 },
        ];
        assert_eq!(argmin(&s).alpha, 1.0);
    }

    #[test]
    fn too_few_samples() {
        let d = Dataset::unnamed(vec![vec![1.0]; 4], vec![1.0; 4]).unwrap();
        assert!(matches!(
            tune_alpha(&d, FitSpec::ridge(1.0), &TuneConfig::default()),
            Err(PredictError::TooFewSamples { .. })
        ));
    }
}
