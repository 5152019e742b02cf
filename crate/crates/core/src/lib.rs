//! Adaptively banded precision matrix estimation.
//!
//! The estimator fits the inverse Cholesky factor `L` of a covariance matrix
//! (so that `Ω = LᵀL`) by penalized Gaussian likelihood with a hierarchical
//! group-lasso penalty on each row. The penalty zeroes prefixes of rows,
//! giving every variable its own bandwidth, and the estimate `Ω̂ = L̂ᵀL̂` is
//! symmetric positive definite by construction.
//!
//! The problem splits into independent row problems ([`rowsolver`]), each
//! solved by ADMM whose proximal step lives in [`penalty`]. [`estimator`]
//! assembles the full factor; [`simulate`], [`modelselect`] and [`apps`]
//! provide the simulation models, cross-validation and discriminant analysis
//! pipelines built on top.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the precision for callers that do not care.

pub mod apps;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod io;
pub mod linalg;
pub mod modelselect;
pub mod penalty;
pub mod rng;
pub mod rowsolver;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use estimator::{fit, fit_path, FitResult};
pub use linalg::{DenseMatrix, LowerTriangular, SampleMatrix, SymMatrix};
pub use penalty::WeightScheme;
pub use rowsolver::SolverConfig;
pub use scalar::Scalar;

pub type LowerTriangularF64 = linalg::LowerTriangular<f64>;
pub type LowerTriangularF32 = linalg::LowerTriangular<f32>;
pub type SymMatrixF64 = linalg::SymMatrix<f64>;
pub type SymMatrixF32 = linalg::SymMatrix<f32>;
pub type SampleMatrixF64 = linalg::SampleMatrix<f64>;
pub type SampleMatrixF32 = linalg::SampleMatrix<f32>;
pub type DenseMatrixF64 = linalg::DenseMatrix<f64>;
pub type FitResultF64 = estimator::FitResult<f64>;
pub type FitResultF32 = estimator::FitResult<f32>;
pub type SolverConfigF64 = rowsolver::SolverConfig<f64>;
pub type SolverConfigF32 = rowsolver::SolverConfig<f32>;
pub type CvResultF64 = modelselect::CvResult<f64>;
pub type ClassModelF64 = apps::ClassModel<f64>;
