//! Held-out prediction error and linear/quadratic discriminant analysis
//! with banded precision estimates.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{fit_gram, lambda_max, sample_covariance, Dispatch};
use crate::linalg::{dot, LowerTriangular, SampleMatrix};
use crate::modelselect::{cross_validate, lambda_grid, DEFAULT_FOLDS, DEFAULT_GRID_COUNT, DEFAULT_GRID_RATIO};
use crate::penalty::WeightScheme;
use crate::rowsolver::SolverConfig;
use crate::scalar::Scalar;

/// Mean squared error of predicting each variable from its predecessors,
/// `(1/(p−1)) Σ_{r≥2} (L̂x̃)²_r`.
pub fn prediction_error<T: Scalar>(l_hat: &LowerTriangular<T>, x: &[T]) -> Result<T> {
    let p = l_hat.dim();
    if p < 2 {
        return Err(Error::InvalidArgument("prediction error needs p >= 2".into()));
    }
    if x.len() != p {
        return Err(Error::DimensionMismatch { expected: p, found: x.len() });
    }
    let lx = l_hat.matvec(x);
    Ok(lx[1..].iter().map(|&v| v * v).sum::<T>() / T::of_usize(p - 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Discriminant {
    /// One factor shared by all classes.
    Lda,
    /// One factor per class.
    Qda,
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Discriminant::Lda => "lda",
            Discriminant::Qda => "qda",
        })
    }
}

impl FromStr for Discriminant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lda" => Ok(Discriminant::Lda),
            "qda" => Ok(Discriminant::Qda),
            _ => Err(Error::InvalidArgument(format!("unknown discriminant {s:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassParams<T> {
    pub label: i64,
    pub mean: Vec<T>,
    pub log_prior: T,
    pub count: usize,
}

/// How λ is chosen for each factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaChoice<T> {
    Fixed(T),
    /// λ_max of the data, giving a diagonal precision estimate.
    Diagonal,
    CrossValidated(CvSettings),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CvSettings {
    pub grid_count: usize,
    pub grid_ratio: f64,
    pub folds: usize,
    pub seed: u64,
    /// Pick the one-standard-error λ rather than the best one.
    pub one_se: bool,
}

impl Default for CvSettings {
    fn default() -> Self {
        Self {
            grid_count: DEFAULT_GRID_COUNT,
            grid_ratio: DEFAULT_GRID_RATIO,
            folds: DEFAULT_FOLDS,
            seed: 0,
            one_se: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassModel<T> {
    pub mode: Discriminant,
    pub classes: Vec<ClassParams<T>>,
    /// One factor for LDA, one per class for QDA.
    pub factors: Vec<LowerTriangular<T>>,
    /// λ used for each factor.
    pub lambdas: Vec<T>,
    /// `L̂μ̂` per class, cached for scoring.
    projected_means: Vec<Vec<T>>,
}

impl<T: Scalar> ClassModel<T> {
    pub fn from_parts(
        mode: Discriminant,
        classes: Vec<ClassParams<T>>,
        factors: Vec<LowerTriangular<T>>,
        lambdas: Vec<T>,
    ) -> Result<Self> {
        let expected = match mode {
            Discriminant::Lda => 1,
            Discriminant::Qda => classes.len(),
        };
        if factors.len() != expected || lambdas.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: factors.len() });
        }
        let p = factors[0].dim();
        if classes.iter().any(|c| c.mean.len() != p) || factors.iter().any(|f| f.dim() != p) {
            return Err(Error::InvalidArgument("class means and factors must share one dimension".into()));
        }
        let projected_means = classes
            .iter()
            .enumerate()
            .map(|(k, c)| factors[if mode == Discriminant::Lda { 0 } else { k }].matvec(&c.mean))
            .collect();
        Ok(Self {
            mode,
            classes,
            factors,
            lambdas,
            projected_means,
        })
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }

    pub fn labels(&self) -> Vec<i64> {
        self.classes.iter().map(|c| c.label).collect()
    }

    pub fn factor(&self, class: usize) -> &LowerTriangular<T> {
        match self.mode {
            Discriminant::Lda => &self.factors[0],
            Discriminant::Qda => &self.factors[class],
        }
    }

    /// `δ_k(x) = (L̂x)ᵀ(L̂μ̂_k) − ½‖L̂μ̂_k‖² + log π̂_k` per class, with the
    /// class's own factor under QDA.
    pub fn scores(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let half = T::lit(0.5);
        let shared = (self.mode == Discriminant::Lda).then(|| self.factors[0].matvec(x));
        Ok(self
            .classes
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let lm = &self.projected_means[k];
                let lx = match &shared {
                    Some(v) => dot(v, lm),
                    None => dot(&self.factors[k].matvec(x), lm),
                };
                lx - half * dot(lm, lm) + c.log_prior
            })
            .collect())
    }

    /// Label of the highest score; ties go to the first class.
    pub fn classify(&self, x: &[T]) -> Result<i64> {
        let s = self.scores(x)?;
        let best = (0..s.len()).fold(0, |b, k| if s[k] > s[b] { k } else { b });
        Ok(self.classes[best].label)
    }

    pub fn classify_all(&self, x: &SampleMatrix<T>) -> Result<Vec<i64>> {
        (0..x.n()).into_par_iter().map(|i| self.classify(x.row(i))).collect()
    }
}

pub fn classify<T: Scalar>(model: &ClassModel<T>, x: &[T]) -> Result<i64> {
    model.classify(x)
}

/// Row indices of each distinct label, labels ascending.
fn group_labels(labels: &[i64]) -> Vec<(i64, Vec<usize>)> {
    let mut distinct: Vec<i64> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .into_iter()
        .map(|l| (l, labels.iter().enumerate().filter(|(_, &y)| y == l).map(|(i, _)| i).collect()))
        .collect()
}

fn select_and_fit<T: Scalar>(
    xc: &SampleMatrix<T>,
    scheme: WeightScheme,
    choice: &LambdaChoice<T>,
    cfg: &SolverConfig<T>,
) -> Result<(LowerTriangular<T>, T)> {
    let s = sample_covariance(xc, false)?;
    let lambda = match *choice {
        LambdaChoice::Fixed(l) => l,
        LambdaChoice::Diagonal => lambda_max(&s, scheme)?,
        LambdaChoice::CrossValidated(cv) => {
            let grid = lambda_grid(&s, scheme, cv.grid_count, T::lit(cv.grid_ratio))?;
            let folds = cv.folds.min(xc.n());
            let res = cross_validate(xc, &grid, folds, scheme, cfg, cv.seed, false)?;
            if cv.one_se {
                res.one_se_lambda()
            } else {
                res.best_lambda()
            }
        }
    };
    let fit = fit_gram(&s, lambda, scheme, cfg, Dispatch::Parallel)?;
    Ok((fit.l_hat, lambda))
}

/// Fits class means, priors and banded precision factors. Each class is
/// centered by its own mean; LDA pools the centered rows into one fit, QDA
/// fits each class separately.
pub fn fit_classifier<T: Scalar>(
    x: &SampleMatrix<T>,
    labels: &[i64],
    mode: Discriminant,
    scheme: WeightScheme,
    choice: LambdaChoice<T>,
    cfg: &SolverConfig<T>,
) -> Result<ClassModel<T>> {
    if labels.len() != x.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), found: labels.len() });
    }
    let groups = group_labels(labels);
    if groups.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 classes".into()));
    }
    if let Some((l, idx)) = groups.iter().find(|(_, idx)| idx.len() < 2) {
        return Err(Error::InvalidArgument(format!("class {l} has {} sample(s), need >= 2", idx.len())));
    }
    let n = T::of_usize(x.n());
    let mut classes = Vec::with_capacity(groups.len());
    let mut centered = Vec::with_capacity(groups.len());
    for (label, idx) in &groups {
        let xk = x.select_rows(idx)?;
        let mean = xk.column_means();
        centered.push(xk.shifted(&mean));
        classes.push(ClassParams {
            label: *label,
            mean,
            log_prior: (T::of_usize(idx.len()) / n).ln(),
            count: idx.len(),
        });
    }
    let (factors, lambdas) = match mode {
        Discriminant::Lda => {
            let pooled: Vec<T> = centered.iter().flat_map(|c| c.data().iter().copied()).collect();
            let pooled = SampleMatrix::new(x.n(), x.p(), pooled)?;
            let (l, lambda) = select_and_fit(&pooled, scheme, &choice, cfg)?;
            (vec![l], vec![lambda])
        }
        Discriminant::Qda => {
            let fits = centered
                .par_iter()
                .map(|xc| select_and_fit(xc, scheme, &choice, cfg))
                .collect::<Result<Vec<_>>>()?;
            fits.into_iter().unzip()
        }
    };
    ClassModel::from_parts(mode, classes, factors, lambdas)
}

#[derive(Clone, Debug, Serialize)]
pub struct Confusion {
    pub labels: Vec<i64>,
    /// `counts[i][j]`: true label `labels[i]` predicted as `labels[j]`.
    pub counts: Vec<Vec<usize>>,
    pub error_rate: f64,
}

/// Confusion matrix over the model's labels plus any unseen test labels.
pub fn evaluate<T: Scalar>(model: &ClassModel<T>, x: &SampleMatrix<T>, labels: &[i64]) -> Result<Confusion> {
    if labels.len() != x.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), found: labels.len() });
    }
    let predicted = model.classify_all(x)?;
    let mut all: Vec<i64> = model.labels();
    all.extend_from_slice(labels);
    all.sort_unstable();
    all.dedup();
    let pos = |l: i64| all.binary_search(&l).expect("label collected above");
    let mut counts = vec![vec![0usize; all.len()]; all.len()];
    let mut wrong = 0;
    for (&t, &p) in labels.iter().zip(&predicted) {
        counts[pos(t)][pos(p)] += 1;
        wrong += usize::from(t != p);
    }
    Ok(Confusion {
        labels: all,
        counts,
        error_rate: if labels.is_empty() { 0.0 } else { wrong as f64 / labels.len() as f64 },
    })
}
