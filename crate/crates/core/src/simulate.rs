//! Ground-truth factors for the four simulation models, Gaussian sampling,
//! error metrics, and ROC paths.
//!
//! Every model is parameterized as `L = D⁻¹T` with `T` unit lower triangular
//! and `D` diagonal with entries drawn from `U[2, 5]`:
//!
//! - M1: `T_{r,r−1} = 0.8`, a single off-diagonal band.
//! - M2: five diagonal blocks. The first row of a block has no
//!   off-diagonals; every other row gets, with probability 1/2, a bandwidth
//!   uniform on the admissible range inside its block, with entries
//!   `±U[0.1, 0.4]`.
//! - M3: as M2 with two blocks.
//! - M4: a dense lower-triangular block on rows and columns
//!   `p/4 ..= 3p/4` (1-based), entries `±U[0.1, 0.2]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{fit_path_gram, sample_covariance, sign_support};
use crate::linalg::{kl_loss, LowerTriangular, SampleMatrix, SymMatrix};
use crate::penalty::WeightScheme;
use crate::rng::{Stream, StreamRng};
use crate::rowsolver::SolverConfig;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    M1,
    M2,
    M3,
    M4,
}

impl Model {
    pub fn number(self) -> u8 {
        match self {
            Model::M1 => 1,
            Model::M2 => 2,
            Model::M3 => 3,
            Model::M4 => 4,
        }
    }

    /// `p` must be a multiple of this.
    pub fn divisor(self) -> usize {
        match self {
            Model::M1 => 1,
            Model::M2 => 5,
            Model::M3 => 2,
            Model::M4 => 4,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.number())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().trim_start_matches('m') {
            "1" => Ok(Model::M1),
            "2" => Ok(Model::M2),
            "3" => Ok(Model::M3),
            "4" => Ok(Model::M4),
            _ => Err(Error::InvalidArgument(format!("unknown model {s:?} (expected 1-4)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub model: Model,
    pub p: usize,
    pub n: usize,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(model: Model, p: usize, n: usize, seed: u64) -> Result<Self> {
        let spec = Self { model, p, n, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidArgument("p must be positive".into()));
        }
        let d = self.model.divisor();
        if self.p % d != 0 {
            return Err(Error::InvalidArgument(format!(
                "model {} needs p divisible by {d}, got {}",
                self.model, self.p
            )));
        }
        Ok(())
    }
}

/// A generated model: `L = D⁻¹T` together with its true per-row bandwidths.
#[derive(Clone, Debug)]
pub struct Truth<T> {
    pub l: LowerTriangular<T>,
    pub d: Vec<T>,
    pub bandwidths: Vec<usize>,
}

impl<T: Scalar> Truth<T> {
    pub fn omega(&self) -> SymMatrix<T> {
        self.l.gram()
    }
}

/// Builds the model with a random `D`.
pub fn make_truth<T: Scalar>(spec: &SimulationSpec) -> Result<Truth<T>> {
    build_truth(spec, false)
}

/// Builds `T` alone (`D = I`), drawing the same structure and values as
/// [`make_truth`] for the same seed.
pub fn make_truth_unit_scale<T: Scalar>(spec: &SimulationSpec) -> Result<Truth<T>> {
    build_truth(spec, true)
}

fn block_rows(model: Model, p: usize) -> Vec<(usize, usize)> {
    // 0-based half-open row ranges of the blocks with random bandwidths
    match model {
        Model::M2 => (0..5).map(|b| (b * p / 5, (b + 1) * p / 5)).collect(),
        Model::M3 => vec![(0, p / 2), (p / 2, p)],
        _ => Vec::new(),
    }
}

fn build_truth<T: Scalar>(spec: &SimulationSpec, unit_scale: bool) -> Result<Truth<T>> {
    spec.validate()?;
    let p = spec.p;
    let mut diag_rng = StreamRng::new(spec.seed, Stream::Diagonal);
    let mut structure_rng = StreamRng::new(spec.seed, Stream::Structure);
    let mut value_rng = StreamRng::new(spec.seed, Stream::Values);

    let d: Vec<f64> = (0..p).map(|_| diag_rng.uniform(2.0, 5.0)).collect();
    let mut rows: Vec<Vec<f64>> = (0..p)
        .map(|r| {
            let mut row = vec![0.0; r + 1];
            row[r] = 1.0;
            row
        })
        .collect();
    let mut bandwidths = vec![0usize; p];

    match spec.model {
        Model::M1 => {
            for r in 1..p {
                rows[r][r - 1] = 0.8;
                bandwidths[r] = 1;
            }
        }
        Model::M2 | Model::M3 => {
            for (start, end) in block_rows(spec.model, p) {
                for r in start + 1..end {
                    if !structure_rng.coin() {
                        continue;
                    }
                    let k = structure_rng.int_inclusive(1, (r - start) as u64) as usize;
                    for c in r - k..r {
                        rows[r][c] = value_rng.sign() * value_rng.uniform(0.1, 0.4);
                    }
                    bandwidths[r] = k;
                }
            }
        }
        Model::M4 => {
            let (start, end) = (p / 4 - 1, 3 * p / 4);
            for r in start + 1..end {
                for c in start..r {
                    rows[r][c] = value_rng.sign() * value_rng.uniform(0.1, 0.2);
                }
                bandwidths[r] = r - start;
            }
        }
    }

    let scale: Vec<f64> = if unit_scale { vec![1.0; p] } else { d.clone() };
    let packed: Vec<T> = rows
        .iter()
        .zip(&scale)
        .flat_map(|(row, &dr)| row.iter().map(move |&v| T::lit(v / dr)))
        .collect();
    Ok(Truth {
        l: LowerTriangular::from_packed(p, packed)?,
        d: scale.into_iter().map(T::lit).collect(),
        bandwidths,
    })
}

/// `n` draws from `N(0, (LᵀL)⁻¹)` as `x = L⁻¹z`, `z` standard normal.
pub fn sample<T: Scalar>(l: &LowerTriangular<T>, n: usize, seed: u64) -> Result<SampleMatrix<T>> {
    let p = l.dim();
    let mut rng = StreamRng::new(seed, Stream::Noise);
    let mut data = Vec::with_capacity(n * p);
    let mut z = vec![T::zero(); p];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = T::lit(rng.normal()));
        data.extend(l.solve(&z));
    }
    SampleMatrix::new(n, p, data)
}

/// Generates the model and an `n × p` sample from it.
pub fn simulate<T: Scalar>(spec: &SimulationSpec) -> Result<(Truth<T>, SampleMatrix<T>)> {
    let truth = make_truth(spec)?;
    let x = sample(&truth.l, spec.n, spec.seed)?;
    Ok((truth, x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorReport<T> {
    /// `‖L̂ − L‖²_F / p`
    pub scaled_frob: T,
    /// Induced ∞-norm of `L̂ − L`.
    pub mat_inf: T,
    pub spectral: T,
    pub kl: T,
}

pub fn error_report<T: Scalar>(
    l_hat: &LowerTriangular<T>,
    l_true: &LowerTriangular<T>,
    omega_hat: &SymMatrix<T>,
) -> Result<ErrorReport<T>> {
    let p = l_true.dim();
    if l_hat.dim() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: l_hat.dim(),
        });
    }
    let diff = l_hat.to_dense().sub(&l_true.to_dense())?;
    let frob = diff.frobenius();
    Ok(ErrorReport {
        scaled_frob: frob * frob / T::of_usize(p),
        mat_inf: diff.induced_inf(),
        spectral: diff.spectral()?,
        kl: kl_loss(l_true, omega_hat)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RocPoint<T> {
    pub lambda: T,
    pub sensitivity: f64,
    pub specificity: f64,
}

/// Support recovery along a nonincreasing λ grid (warm-started path).
pub fn roc_curve<T: Scalar>(
    x: &SampleMatrix<T>,
    l_true: &LowerTriangular<T>,
    grid: &[T],
    scheme: WeightScheme,
    cfg: &SolverConfig<T>,
) -> Result<Vec<RocPoint<T>>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("lambda grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("lambda grid must be nonincreasing".into()));
    }
    if x.p() != l_true.dim() {
        return Err(Error::DimensionMismatch {
            expected: l_true.dim(),
            found: x.p(),
        });
    }
    let s = sample_covariance(x, false)?;
    fit_path_gram(&s, grid, scheme, cfg)?
        .iter()
        .map(|f| {
            let stats = sign_support(&f.l_hat, l_true)?;
            Ok(RocPoint {
                lambda: f.lambda,
                sensitivity: stats.sensitivity,
                specificity: stats.specificity,
            })
        })
        .collect()
}

/// Density of the lower triangle including the diagonal.
pub fn nonzero_ratio<T: Scalar>(l: &LowerTriangular<T>) -> f64 {
    let nz = l.packed().iter().filter(|v| **v != T::zero()).count();
    nz as f64 / l.packed().len() as f64
}
