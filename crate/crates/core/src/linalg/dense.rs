use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative change in the power-iteration singular value estimate at which
/// the spectral norm is accepted.
pub const POWER_REL_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

/// General dense row-major matrix, used for differences such as `L̂ − L`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// The four matrix norms reported by the simulation study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatrixNorms<T> {
    pub frobenius: T,
    /// `max |a_ij|`
    pub elementwise_inf: T,
    /// Maximum absolute row sum.
    pub induced_inf: T,
    /// Largest singular value.
    pub spectral: T,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.rows).map(|i| super::dot(self.row(i), x)).collect()
    }

    pub fn transpose_matvec(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o = *o + a * xi;
            }
        }
        out
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn elementwise_inf(&self) -> T {
        super::norm_inf(&self.data)
    }

    pub fn induced_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// Largest singular value by power iteration on `AᵀA` from a fixed
    /// pseudo-random start vector. Stops once the eigen-residual
    /// `‖AᵀAv − θv‖` falls below the tolerance relative to `θ = ‖Av‖²`, which
    /// bounds the error of `θ` itself.
    pub fn spectral(&self) -> Result<T> {
        if self.data.iter().all(|v| *v == T::zero()) {
            return Ok(T::zero());
        }
        let tol = T::lit(POWER_REL_TOL).max(T::epsilon() * T::lit(16.0));
        let mut state = 0x853c_49e6_748f_ea9b_u64;
        let mut v: Vec<T> = (0..self.cols)
            .map(|_| {
                let bits = crate::rng::splitmix64(&mut state);
                T::lit((bits >> 11) as f64 / (1u64 << 53) as f64 + 0.5)
            })
            .collect();
        let nv = super::norm2(&v);
        v.iter_mut().for_each(|x| *x = *x / nv);

        for _ in 0..POWER_MAX_ITER {
            let av = self.matvec(&v);
            let theta = super::dot(&av, &av);
            let sigma = theta.sqrt();
            let mut w = self.transpose_matvec(&av);
            let residual = w
                .iter()
                .zip(&v)
                .map(|(a, b)| *a - theta * *b)
                .map(|d| d * d)
                .sum::<T>()
                .sqrt();
            if residual <= tol * theta {
                return Ok(sigma);
            }
            let nw = super::norm2(&w);
            if nw == T::zero() {
                // start vector landed in the null space of a nonzero matrix
                return Ok(sigma);
            }
            w.iter_mut().for_each(|x| *x = *x / nw);
            v = w;
        }
        Err(Error::NonConvergence {
            what: "power iteration",
            iterations: POWER_MAX_ITER,
        })
    }

    pub fn norms(&self) -> Result<MatrixNorms<T>> {
        Ok(MatrixNorms {
            frobenius: self.frobenius(),
            elementwise_inf: self.elementwise_inf(),
            induced_inf: self.induced_inf(),
            spectral: self.spectral()?,
        })
    }
}
