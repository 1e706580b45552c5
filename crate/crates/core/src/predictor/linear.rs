use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::features::Dataset;
use super::PredictError;

/// Coordinate-descent stop rule on the largest coefficient change.
pub const CD_TOLERANCE: f64 = 1e-8;
pub const CD_MAX_SWEEPS: usize = 10_000;
pub const DEFAULT_FLOOR_S: f64 = 1.0;

/// Smallest-to-largest eigenvalue ratio below which OLS is rank deficient.
const RANK_RATIO: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ols,
    Ridge,
    Lasso,
    ElasticNet,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::Ols => "ols",
            Self::Ridge => "ridge",
            Self::Lasso => "lasso",
            Self::ElasticNet => "elastic_net",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Self::Ols, Self::Ridge, Self::Lasso, Self::ElasticNet]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Model family and penalty.
///
/// All families minimize
/// `(1/2n)|y - b0 - Z b|^2 + alpha * (l1_ratio * |b|_1 + (1 - l1_ratio)/2 * |b|^2)`
/// over z-scored features `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSpec {
    pub family: Family,
    pub alpha: f64,
    pub l1_ratio: f64,
}

impl FitSpec {
    pub fn ols() -> Self {
        Self {
            family: Family::Ols,
            alpha: 0.0,
            l1_ratio: 0.0,
        }
    }

    pub fn ridge(alpha: f64) -> Self {
        Self {
            family: Family::Ridge,
            alpha,
            l1_ratio: 0.0,
        }
    }

    pub fn lasso(alpha: f64) -> Self {
        Self {
            family: Family::Lasso,
            alpha,
            l1_ratio: 1.0,
        }
    }

    pub fn elastic_net(alpha: f64, l1_ratio: f64) -> Self {
        Self {
            family: Family::ElasticNet,
            alpha,
            l1_ratio,
        }
    }

    /// Same family and mixing with another penalty weight.
    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    fn check(&self) -> Result<(), PredictError> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(PredictError::InvalidSpec(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.l1_ratio) {
            return Err(PredictError::InvalidSpec(format!("l1_ratio must lie in [0, 1], got {}", self.l1_ratio)));
        }
        let expected = match self.family {
            Family::Ols if self.alpha != 0.0 => {
                return Err(PredictError::InvalidSpec("ols takes no penalty".into()))
            }
            Family::Ols | Family::Ridge => Some(0.0),
            Family::Lasso => Some(1.0),
            Family::ElasticNet => None,
        };
        if expected.is_some_and(|r| r != self.l1_ratio) {
            return Err(PredictError::InvalidSpec(format!(
                "{} fixes l1_ratio to {}",
                self.family,
                expected.unwrap_or_default()
            )));
        }
        Ok(())
    }
}

/// Centered second moments of a dataset over its active columns.
#[derive(Debug, Clone)]
pub struct Moments {
    pub n: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Columns that enter the fit: non-constant and not a one-hot reference slot.
    pub active: Vec<usize>,
    /// `Z'Z / n` over active columns.
    pub gram: DMatrix<f64>,
    /// `Z'(y - ybar) / n` over active columns.
    pub xty: DVector<f64>,
    pub ybar: f64,
}

impl Moments {
    pub fn of(data: &Dataset) -> Self {
        let n = data.len();
        let p = data.arity();
        let nf = n as f64;
        let mut means = vec![0.0; p];
        for row in &data.rows {
            for (m, x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= nf);
        let ybar = data.targets.iter().sum::<f64>() / nf;
        let mut stds = vec![0.0; p];
        for row in &data.rows {
            for j in 0..p {
                stds[j] += (row[j] - means[j]).powi(2);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / nf).sqrt());

        let reference: Vec<usize> = data.groups.iter().filter_map(|g| g.clone().last()).collect();
        let active: Vec<usize> = (0..p)
            .filter(|&j| stds[j] > 1e-12 * (1.0 + means[j].abs()) && !reference.contains(&j))
            .collect();
        let q = active.len();
        let mut gram = DMatrix::zeros(q, q);
        let mut xty = DVector::zeros(q);
        let mut z = vec![0.0; q];
        for (row, &y) in data.rows.iter().zip(&data.targets) {
            for (a, &j) in active.iter().enumerate() {
                z[a] = (row[j] - means[j]) / stds[j];
            }
            for a in 0..q {
                xty[a] += z[a] * (y - ybar);
                for b in a..q {
                    gram[(a, b)] += z[a] * z[b];
                }
            }
        }
        for a in 0..q {
            for b in a..q {
                gram[(a, b)] /= nf;
                gram[(b, a)] = gram[(a, b)];
            }
            xty[a] /= nf;
        }
        Self {
            n,
            means,
            stds,
            active,
            gram,
            xty,
            ybar,
        }
    }

    /// Penalized coefficients over the active columns.
    pub fn solve(&self, spec: &FitSpec) -> Result<DVector<f64>, PredictError> {
        let q = self.active.len();
        if q == 0 {
            return Ok(DVector::zeros(0));
        }
        match spec.family {
            Family::Ols | Family::Ridge => {
                if spec.alpha == 0.0 {
                    let eig = SymmetricEigen::new(self.gram.clone()).eigenvalues;
                    let (lo, hi) = (eig.min(), eig.max());
                    if !(lo > RANK_RATIO * hi) {
                        return Err(PredictError::DegenerateDesign);
                    }
                }
                let mut a = self.gram.clone();
                for j in 0..q {
                    a[(j, j)] += spec.alpha;
                }
                let chol = a.cholesky().ok_or(PredictError::DegenerateDesign)?;
                Ok(chol.solve(&self.xty))
            }
            Family::Lasso | Family::ElasticNet => Ok(self.coordinate_descent(spec.alpha, spec.l1_ratio)),
        }
    }

    fn coordinate_descent(&self, alpha: f64, l1_ratio: f64) -> DVector<f64> {
        let q = self.active.len();
        let l1 = alpha * l1_ratio;
        let l2 = alpha * (1.0 - l1_ratio);
        let mut beta = DVector::zeros(q);
        // residual gradient c - G beta
        let mut r = self.xty.clone();
        for _ in 0..CD_MAX_SWEEPS {
            let mut max_delta: f64 = 0.0;
            for j in 0..q {
                let gjj = self.gram[(j, j)];
                let rho = r[j] + gjj * beta[j];
                let new = soft_threshold(rho, l1) / (gjj + l2);
                let delta = new - beta[j];
                if delta != 0.0 {
                    for k in 0..q {
                        r[k] -= self.gram[(k, j)] * delta;
                    }
                    beta[j] = new;
                }
                max_delta = max_delta.max(delta.abs());
            }
            if max_delta < CD_TOLERANCE {
                break;
            }
        }
        beta
    }

    pub fn into_model(self, spec: &FitSpec, beta: &DVector<f64>, columns: Vec<String>) -> LinearModel {
        let mut coefficients = vec![0.0; self.means.len()];
        for (a, &j) in self.active.iter().enumerate() {
            coefficients[j] = beta[a];
        }
        LinearModel {
            family: spec.family,
            columns,
            coefficients,
            intercept: self.ybar,
            alpha: spec.alpha,
            l1_ratio: spec.l1_ratio,
            means: self.means,
            stds: self.stds,
            floor_s: DEFAULT_FLOOR_S,
        }
    }
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// A fitted linear duration model.
///
/// `coefficients` act on z-scored features; `intercept` is the training mean
/// of the target. Columns that were constant in training, and the last slot
/// of each one-hot group, carry a zero coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearModel {
    pub family: Family,
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
    pub l1_ratio: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Predictions are clamped below at this many seconds.
    pub floor_s: f64,
}

impl LinearModel {
    pub fn arity(&self) -> usize {
        self.coefficients.len()
    }

    /// Coefficients on the original feature scale.
    pub fn raw_coefficients(&self) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(&self.stds)
            .map(|(&b, &s)| if b == 0.0 { 0.0 } else { b / s })
            .collect()
    }

    pub fn raw_intercept(&self) -> f64 {
        self.intercept
            - self
                .raw_coefficients()
                .iter()
                .zip(&self.means)
                .map(|(b, m)| b * m)
                .sum::<f64>()
    }

    /// Linear response without the floor.
    pub fn predict_raw(&self, x: &[f64]) -> Result<f64, PredictError> {
        if x.len() != self.arity() {
            return Err(PredictError::ArityMismatch {
                expected: self.arity(),
                got: x.len(),
            });
        }
        let mut y = self.intercept;
        for j in 0..x.len() {
            let b = self.coefficients[j];
            if b != 0.0 {
                y += b * (x[j] - self.means[j]) / self.stds[j];
            }
        }
        Ok(y)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, PredictError> {
        Ok(self.predict_raw(x)?.max(self.floor_s))
    }

    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|b| b * b).sum::<f64>().sqrt()
    }
}

/// Fits a linear model with z-scored features and an unpenalized intercept.
pub fn fit(data: &Dataset, spec: &FitSpec) -> Result<LinearModel, PredictError> {
    spec.check()?;
    if data.len() < 2 {
        return Err(PredictError::TooFewSamples {
            needed: 2,
            got: data.len(),
        });
    }
    let moments = Moments::of(data);
    let beta = moments.solve(spec)?;
    Ok(moments.into_model(spec, &beta, data.columns.clone()))
}

pub fn predict(model: &LinearModel, x: &[f64]) -> Result<f64, PredictError> {
    model.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Dataset {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i)]).collect();
        let targets = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        Dataset::unnamed(rows, targets).unwrap()
    }

    #[test]
    fn ols_recovers_exact_line() {
        let m = fit(&line(), &FitSpec::ols()).unwrap();
        assert!((m.raw_coefficients()[0] - 2.0).abs() < 1e-9);
        assert!((m.raw_intercept() - 1.0).abs() < 1e-9);
        assert!((m.predict(&[3.0]).unwrap() - 7.0).abs() < 1e-9);
    }

    #[test]
    fn huge_ridge_penalty_gives_mean() {
        let m = fit(&line(), &FitSpec::ridge(1e12)).unwrap();
        assert!(m.coefficients[0].abs() < 1e-9);
        assert!((m.intercept - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_model_predicts_intercept() {
        let m = LinearModel {
            family: Family::Ridge,
            columns: vec!["a".into(), "b".into()],
            coefficients: vec![0.0, 0.0],
            intercept: 50.0,
            alpha: 1.0,
            l1_ratio: 0.0,
            means: vec![0.0, 0.0],
            stds: vec![1.0, 1.0],
            floor_s: 1.0,
        };
        assert_eq!(m.predict(&[123.0, -4.0]).unwrap(), 50.0);
        assert_eq!(
            m.predict(&[1.0]),
            Err(PredictError::ArityMismatch { expected: 2, got: 1 })
        );
    }

    #[test]
    fn negative_prediction_hits_floor() {
        let m = fit(&line(), &FitSpec::ols()).unwrap();
        assert!((m.predict_raw(&[-5.5]).unwrap() + 10.0).abs() < 1e-9);
        assert_eq!(m.predict(&[-5.5]).unwrap(), 1.0);
    }

    #[test]
    fn constant_column_gets_zero() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![f64::from(i), 3.0]).collect();
        let targets = rows.iter().map(|r| r[0]).collect();
        let m = fit(&Dataset::unnamed(rows, targets).unwrap(), &FitSpec::ols()).unwrap();
        assert_eq!(m.coefficients[1], 0.0);
        assert!((m.predict(&[4.0, 99.0]).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_columns_are_degenerate_for_ols_only() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![f64::from(i), f64::from(i)]).collect();
        let targets = rows.iter().map(|r| r[0] + 5.0).collect();
        let d = Dataset::unnamed(rows, targets).unwrap();
        assert_eq!(fit(&d, &FitSpec::ols()), Err(PredictError::DegenerateDesign));
        assert!(fit(&d, &FitSpec::ridge(0.5)).is_ok());
    }

    #[test]
    fn lasso_zeroes_irrelevant_feature() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![f64::from(i), f64::from((i * 7) % 11)])
            .collect();
        let targets = rows.iter().map(|r| 3.0 * r[0]).collect();
        let m = fit(&Dataset::unnamed(rows, targets).unwrap(), &FitSpec::lasso(1.0)).unwrap();
        assert_eq!(m.coefficients[1], 0.0);
        assert!(m.coefficients[0] > 0.0);
    }

    #[test]
    fn spec_checks() {
        let d = line();
        assert!(matches!(fit(&d, &FitSpec { alpha: 1.0, ..FitSpec::ols() }), Err(PredictError::InvalidSpec(_))));
        assert!(matches!(fit(&d, &FitSpec::ridge(-1.0)), Err(PredictError::InvalidSpec(_))));
        assert!(matches!(fit(&d, &FitSpec::elastic_net(1.0, 1.5)), Err(PredictError::InvalidSpec(_))));
        let one = d.subset(&[0]);
        assert!(matches!(fit(&one, &FitSpec::ols()), Err(PredictError::TooFewSamples { .. })));
    }
}
