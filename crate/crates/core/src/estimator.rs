//! Full-factor fit. The penalized likelihood separates over rows of `L`: row
//! 1 has the closed form `1/√S₁₁` and rows `2..p` are independent ADMM
//! problems sharing the read-only sample covariance.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{LowerTriangular, SampleMatrix, SymMatrix};
use crate::penalty::WeightScheme;
use crate::rowsolver::{solve_row, solve_row_from, RowProblem, RowSolution, RowState, SolverConfig};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct FitResult<T> {
    pub l_hat: LowerTriangular<T>,
    pub lambda: T,
    pub scheme: WeightScheme,
    /// `K̂_r` for each row (0 for the first).
    pub bandwidths: Vec<usize>,
    pub converged_rows: usize,
    /// Largest optimality residual of the row solutions, measured before
    /// leading entries below the support threshold are zeroed in `l_hat`.
    pub kkt_max: T,
    /// ADMM iterations per row (0 for closed-form or screened rows).
    pub iterations: Vec<usize>,
}

impl<T: Scalar> FitResult<T> {
    pub fn dim(&self) -> usize {
        self.l_hat.dim()
    }

    pub fn converged(&self) -> bool {
        self.converged_rows == self.dim()
    }

    /// `Ω̂ = L̂ᵀL̂`.
    pub fn omega(&self) -> SymMatrix<T> {
        self.l_hat.gram()
    }

    pub fn total_iterations(&self) -> usize {
        self.iterations.iter().sum()
    }

    fn assemble(s: &SymMatrix<T>, lambda: T, scheme: WeightScheme, rows: Vec<RowSolution<T>>) -> Result<Self> {
        let p = s.dim();
        let mut packed = Vec::with_capacity(p * (p + 1) / 2);
        packed.push(first_row(s));
        let mut bandwidths = vec![0];
        let mut iterations = vec![0];
        let mut converged_rows = 1;
        let mut kkt_max = T::zero();
        for sol in rows {
            packed.extend_from_slice(&sol.support_row());
            bandwidths.push(sol.bandwidth());
            iterations.push(sol.iterations);
            converged_rows += usize::from(sol.converged);
            kkt_max = kkt_max.max(sol.kkt_residual);
        }
        Ok(Self {
            l_hat: LowerTriangular::from_packed(p, packed)?,
            lambda,
            scheme,
            bandwidths,
            converged_rows,
            kkt_max,
            iterations,
        })
    }
}

/// Order in which row problems are handed out. The result does not depend on
/// it; the variants exist so that this can be checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Dispatch {
    /// Work-stealing pool, longest rows first.
    #[default]
    Parallel,
    /// One thread, rows `2..p` in order.
    Sequential,
    /// Work-stealing pool over a seeded permutation of the rows.
    Shuffled(u64),
}

fn first_row<T: Scalar>(s: &SymMatrix<T>) -> T {
    T::one() / s.get(0, 0).sqrt()
}

fn check_gram<T: Scalar>(s: &SymMatrix<T>) -> Result<()> {
    for r in 0..s.dim() {
        let v = s.get(r, r);
        if !(v > T::zero()) || !v.is_finite() {
            return Err(Error::ZeroVariance { column: r });
        }
    }
    Ok(())
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if lambda >= T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("lambda must be finite and nonnegative, got {lambda}")))
    }
}

/// Sample covariance `(1/n) XᵀX`, optionally after centering the columns,
/// with the preconditions of a fit checked.
pub fn sample_covariance<T: Scalar>(x: &SampleMatrix<T>, center: bool) -> Result<SymMatrix<T>> {
    if x.n() < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 observations, got {}", x.n())));
    }
    let s = if center { x.centered().gram(x.p())? } else { x.gram(x.p())? };
    check_gram(&s)?;
    Ok(s)
}

fn row_order(p: usize, dispatch: Dispatch) -> Vec<usize> {
    match dispatch {
        Dispatch::Parallel => (2..=p).rev().collect(),
        Dispatch::Sequential => (2..=p).collect(),
        Dispatch::Shuffled(seed) => {
            let mut order: Vec<usize> = (2..=p).collect();
            crate::rng::StreamRng::with_stream_id(seed, 0).shuffle(&mut order);
            order
        }
    }
}

fn dispatch_rows<T, F>(p: usize, dispatch: Dispatch, solve: F) -> Result<Vec<RowSolution<T>>>
where
    T: Scalar,
    F: Fn(usize) -> Result<RowSolution<T>> + Sync,
{
    let order = row_order(p, dispatch);
    let run = |r: usize| solve(r).map(|s| (r, s)).map_err(|e| e.in_row(r));
    let mut solved: Vec<(usize, RowSolution<T>)> = match dispatch {
        Dispatch::Sequential => order.into_iter().map(run).collect::<Result<_>>()?,
        _ => order.into_par_iter().map(run).collect::<Result<_>>()?,
    };
    solved.sort_unstable_by_key(|(r, _)| *r);
    Ok(solved.into_iter().map(|(_, s)| s).collect())
}

/// Fits `L̂` from a precomputed sample covariance.
pub fn fit_gram<T: Scalar>(
    s: &SymMatrix<T>,
    lambda: T,
    scheme: WeightScheme,
    cfg: &SolverConfig<T>,
    dispatch: Dispatch,
) -> Result<FitResult<T>> {
    check_gram(s)?;
    check_lambda(lambda)?;
    cfg.validate()?;
    let rows = dispatch_rows(s.dim(), dispatch, |r| {
        let prob = RowProblem::new(s, r, lambda, scheme)?;
        solve_row(&prob, cfg)
    })?;
    FitResult::assemble(s, lambda, scheme, rows)
}

/// Fits `L̂` at a single λ. Data are used as given (no centering).
pub fn fit<T: Scalar>(
    x: &SampleMatrix<T>,
    lambda: T,
    scheme: WeightScheme,
    cfg: &SolverConfig<T>,
) -> Result<FitResult<T>> {
    let s = sample_covariance(x, false)?;
    fit_gram(&s, lambda, scheme, cfg, Dispatch::Parallel)
}

/// Fits along a λ path, warm-starting each row from its solution at the
/// previous λ. Decreasing paths are the intended use.
pub fn fit_path_gram<T: Scalar>(
    s: &SymMatrix<T>,
    lambdas: &[T],
    scheme: WeightScheme,
    cfg: &SolverConfig<T>,
) -> Result<Vec<FitResult<T>>> {
    check_gram(s)?;
    cfg.validate()?;
    if lambdas.is_empty() {
        return Err(Error::InvalidArgument("lambda path is empty".into()));
    }
    for &l in lambdas {
        check_lambda(l)?;
    }
    let p = s.dim();
    let order: Vec<usize> = (2..=p).rev().collect();
    let mut per_row: Vec<(usize, Vec<RowSolution<T>>)> = order
        .into_par_iter()
        .map(|r| {
            let mut state = RowState::initial(r, cfg.rho_init);
            let lmax = RowProblem::new(s, r, T::zero(), scheme)
                .and_then(|prob| prob.lambda_max())
                .map_err(|e| e.in_row(r))?;
            let sols = lambdas
                .iter()
                .map(|&lambda| {
                    let prob = RowProblem::new(s, r, lambda, scheme)?.with_known_lambda_max(lmax);
                    solve_row_from(&prob, cfg, &mut state)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.in_row(r))?;
            Ok((r, sols))
        })
        .collect::<Result<_>>()?;
    per_row.sort_unstable_by_key(|(r, _)| *r);
    let mut columns: Vec<std::vec::IntoIter<RowSolution<T>>> =
        per_row.into_iter().map(|(_, v)| v.into_iter()).collect();
    lambdas
        .iter()
        .map(|&lambda| {
            let rows = columns
                .iter_mut()
                .map(|it| it.next().expect("one solution per lambda"))
                .collect();
            FitResult::assemble(s, lambda, scheme, rows)
        })
        .collect()
}

pub fn fit_path<T: Scalar>(
    x: &SampleMatrix<T>,
    lambdas: &[T],
    scheme: WeightScheme,
    cfg: &SolverConfig<T>,
) -> Result<Vec<FitResult<T>>> {
    let s = sample_covariance(x, false)?;
    fit_path_gram(&s, lambdas, scheme, cfg)
}

/// Smallest λ at which every row of the fit is diagonal: the maximum of the
/// per-row thresholds. Zero when `p = 1`.
pub fn lambda_max<T: Scalar>(s: &SymMatrix<T>, scheme: WeightScheme) -> Result<T> {
    check_gram(s)?;
    let per_row: Vec<T> = (2..=s.dim())
        .into_par_iter()
        .map(|r| {
            RowProblem::new(s, r, T::zero(), scheme)
                .and_then(|prob| prob.lambda_max())
                .map_err(|e| e.in_row(r))
        })
        .collect::<Result<_>>()?;
    Ok(per_row.into_iter().fold(T::zero(), T::max))
}

/// `Ω̂ = L̂ᵀL̂`.
pub fn omega<T: Scalar>(fit: &FitResult<T>) -> SymMatrix<T> {
    fit.omega()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportStats {
    pub sensitivity: f64,
    pub specificity: f64,
    pub signed_exact: bool,
    pub true_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    pub false_positives: usize,
}

/// Support recovery over the strictly lower triangle. A rate whose
/// denominator is empty is reported as 1.
pub fn sign_support<T: Scalar>(estimate: &LowerTriangular<T>, truth: &LowerTriangular<T>) -> Result<SupportStats> {
    let p = truth.dim();
    if estimate.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: estimate.dim(),
        });
    }
    let (mut tp, mut fneg, mut tn, mut fpos) = (0, 0, 0, 0);
    let mut signed_exact = true;
    for r in 1..p {
        for (&e, &t) in estimate.row(r)[..r].iter().zip(&truth.row(r)[..r]) {
            let est_nz = e != T::zero();
            match (t != T::zero(), est_nz) {
                (true, true) => tp += 1,
                (true, false) => fneg += 1,
                (false, false) => tn += 1,
                (false, true) => fpos += 1,
            }
            let sign = |v: T| if v > T::zero() { 1 } else if v < T::zero() { -1 } else { 0 };
            signed_exact &= sign(e) == sign(t);
        }
    }
    let rate = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    Ok(SupportStats {
        sensitivity: rate(tp, tp + fneg),
        specificity: rate(tn, tn + fpos),
        signed_exact,
        true_positives: tp,
        false_negatives: fneg,
        true_negatives: tn,
        false_positives: fpos,
    })
}
