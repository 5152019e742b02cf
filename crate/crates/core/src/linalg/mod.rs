//! Dense linear algebra for the estimator: packed lower-triangular factors,
//! symmetric matrices, sample matrices, matrix norms, and the Gaussian
//! Kullback-Leibler loss.

mod dense;
mod sample;
mod symmetric;
mod triangular;

pub use dense::{DenseMatrix, MatrixNorms, POWER_MAX_ITER, POWER_REL_TOL};
pub use sample::SampleMatrix;
pub use symmetric::SymMatrix;
pub use triangular::LowerTriangular;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn norm2<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Scaled Gaussian Kullback-Leibler loss between the model with precision
/// `L_trueᵀ L_true` and an estimate `omega_hat`:
///
/// `(1/p) [tr(Σ Ω̂) − log det Ω̂ + log det Ω − p]`, with `Σ = Ω⁻¹`.
///
/// `Σ`-products go through two triangular solves against `l_true`, so the
/// true covariance is never formed.
pub fn kl_loss<T: Scalar>(l_true: &LowerTriangular<T>, omega_hat: &SymMatrix<T>) -> Result<T> {
    let p = l_true.dim();
    if omega_hat.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: omega_hat.dim(),
        });
    }
    let chol = omega_hat.cholesky()?;
    let mut trace = T::zero();
    let mut column = vec![T::zero(); p];
    for j in 0..p {
        for (i, c) in column.iter_mut().enumerate() {
            *c = omega_hat.get(i, j);
        }
        let v = l_true.solve_transpose(&column);
        let w = l_true.solve(&v);
        trace = trace + w[j];
    }
    let two = T::lit(2.0);
    let logdet_hat = two * chol.log_diag_sum();
    let logdet_true = two * l_true.log_diag_sum();
    let pf = T::of_usize(p);
    let kl = (trace - logdet_hat + logdet_true - pf) / pf;
    Ok(kl.max(T::zero()))
}
