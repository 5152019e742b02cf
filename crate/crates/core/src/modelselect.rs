//! λ grids, k-fold cross-validation by validation likelihood, and the
//! one-standard-error rule.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimator::{fit_path_gram, lambda_max, sample_covariance};
use crate::linalg::{LowerTriangular, SampleMatrix, SymMatrix};
use crate::penalty::WeightScheme;
use crate::rng::{Stream, StreamRng};
use crate::rowsolver::SolverConfig;
use crate::scalar::Scalar;

pub const DEFAULT_GRID_COUNT: usize = 100;
pub const DEFAULT_GRID_RATIO: f64 = 1e-3;
pub const DEFAULT_FOLDS: usize = 5;

/// `count` log-spaced values from `lambda_max` down to `ratio·lambda_max`.
pub fn log_grid<T: Scalar>(lambda_max: T, count: usize, ratio: T) -> Result<Vec<T>> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!("grid needs at least 2 values, got {count}")));
    }
    if !(ratio > T::zero() && ratio < T::one()) {
        return Err(Error::InvalidArgument(format!("grid ratio must lie in (0, 1), got {ratio}")));
    }
    if !(lambda_max > T::zero()) || !lambda_max.is_finite() {
        return Err(Error::InvalidArgument(
            "lambda_max is zero: the data carry no off-diagonal signal to tune".into(),
        ));
    }
    let log_ratio = ratio.ln();
    let last = T::of_usize(count - 1);
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                lambda_max
            } else if i == count - 1 {
                lambda_max * ratio
            } else {
                lambda_max * (log_ratio * T::of_usize(i) / last).exp()
            }
        })
        .collect())
}

/// Grid from the numerically determined λ_max of the sample covariance.
pub fn lambda_grid<T: Scalar>(s: &SymMatrix<T>, scheme: WeightScheme, count: usize, ratio: T) -> Result<Vec<T>> {
    log_grid(lambda_max(s, scheme)?, count, ratio)
}

/// Seeded shuffle of `0..n` cut into `k` contiguous folds; the first `n % k`
/// folds hold one extra index.
pub fn fold_partition(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("need 2 <= folds <= n, got folds = {k}, n = {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    StreamRng::new(seed, Stream::Folds).shuffle(&mut idx);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// Gaussian negative log-likelihood per observation, up to constants:
/// `(1/n) Σᵢ ‖L xᵢ‖² − 2 Σᵣ log L_rr`.
pub fn validation_nll<T: Scalar>(l: &LowerTriangular<T>, x: &SampleMatrix<T>) -> Result<T> {
    if x.p() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: x.p(),
        });
    }
    let total: T = x
        .rows()
        .map(|row| l.matvec(row).iter().map(|&v| v * v).sum::<T>())
        .sum();
    Ok(total / T::of_usize(x.n()) - T::lit(2.0) * l.log_diag_sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct CvResult<T> {
    pub lambdas: Vec<T>,
    /// Mean validation negative log-likelihood per λ.
    pub mean_score: Vec<T>,
    /// Standard error of the fold scores per λ.
    pub se_score: Vec<T>,
    /// `fold_scores[f][i]`: score of fold `f` at `lambdas[i]`.
    pub fold_scores: Vec<Vec<T>>,
    pub best_idx: usize,
    /// Largest λ whose mean score is within one standard error of the best.
    pub one_se_idx: usize,
}

impl<T: Scalar> CvResult<T> {
    /// Aggregates a fold × λ score table (lower is better).
    pub fn from_scores(lambdas: Vec<T>, fold_scores: Vec<Vec<T>>) -> Result<Self> {
        let k = fold_scores.len();
        if k < 2 || lambdas.is_empty() || fold_scores.iter().any(|f| f.len() != lambdas.len()) {
            return Err(Error::InvalidArgument("score table must be folds × lambdas with >= 2 folds".into()));
        }
        let kf = T::of_usize(k);
        let mut mean_score = Vec::with_capacity(lambdas.len());
        let mut se_score = Vec::with_capacity(lambdas.len());
        for i in 0..lambdas.len() {
            let mean = fold_scores.iter().map(|f| f[i]).sum::<T>() / kf;
            let var = fold_scores.iter().map(|f| (f[i] - mean).powi(2)).sum::<T>() / (kf - T::one());
            mean_score.push(mean);
            se_score.push((var / kf).sqrt());
        }
        let best_idx = (0..lambdas.len()).fold(0, |b, i| if mean_score[i] < mean_score[b] { i } else { b });
        let bound = mean_score[best_idx] + se_score[best_idx];
        let one_se_idx = (0..lambdas.len())
            .find(|&i| mean_score[i] <= bound)
            .unwrap_or(best_idx);
        Ok(Self {
            lambdas,
            mean_score,
            se_score,
            fold_scores,
            best_idx,
            one_se_idx,
        })
    }

    pub fn best_lambda(&self) -> T {
        self.lambdas[self.best_idx]
    }

    pub fn one_se_lambda(&self) -> T {
        self.lambdas[self.one_se_idx]
    }
}

/// Training and validation parts of fold `f`.
pub fn split_fold<T: Scalar>(x: &SampleMatrix<T>, folds: &[Vec<usize>], f: usize) -> Result<(SampleMatrix<T>, SampleMatrix<T>)> {
    let train: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|(g, _)| *g != f)
        .flat_map(|(_, idx)| idx.iter().copied())
        .collect();
    Ok((x.select_rows(&train)?, x.select_rows(&folds[f])?))
}

/// k-fold cross-validation of a warm-started path. With `center`, each
/// training fold is centered by its own means and the validation fold by the
/// same means.
pub fn cross_validate<T: Scalar>(
    x: &SampleMatrix<T>,
    grid: &[T],
    k: usize,
    scheme: WeightScheme,
    cfg: &SolverConfig<T>,
    seed: u64,
    center: bool,
) -> Result<CvResult<T>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    let folds = fold_partition(x.n(), k, seed)?;
    let fold_scores: Vec<Vec<T>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let (mut train, mut val) = split_fold(x, &folds, f)?;
            if center {
                let means = train.column_means();
                train = train.shifted(&means);
                val = val.shifted(&means);
            }
            let s = sample_covariance(&train, false)?;
            fit_path_gram(&s, grid, scheme, cfg)?
                .iter()
                .map(|fit| validation_nll(&fit.l_hat, &val))
                .collect()
        })
        .collect::<Result<_>>()?;
    CvResult::from_scores(grid.to_vec(), fold_scores)
}
