//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the estimator can run on: `f32` or `f64`.
///
/// Tolerance defaults scale with the precision of the type, so that a solver
/// configured with `SolverConfig::default()` is attainable in both widths.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` literal; exact for `f64`, rounded for `f32`.
    fn lit(x: f64) -> Self;

    /// Default absolute/relative ADMM stopping tolerance.
    fn admm_tol() -> Self;

    /// Relative tolerance on the proximal root-finding and dual sweeps.
    fn prox_tol() -> Self;

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Scalar for f64 {
    #[inline]
    fn lit(x: f64) -> Self {
        x
    }

    fn admm_tol() -> Self {
        1e-6
    }

    fn prox_tol() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    #[inline]
    fn lit(x: f64) -> Self {
        x as f32
    }

    fn admm_tol() -> Self {
        1e-4
    }

    fn prox_tol() -> Self {
        1e-6
    }
}
