use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{DenseMatrix, LowerTriangular};

/// Dense symmetric matrix. Every write goes to both triangles, so symmetry
/// holds bit-for-bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    /// Evaluates `f(i, j)` for `i <= j` and mirrors the result.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Accepts a dense matrix only if it is exactly symmetric.
    pub fn from_dense(m: &DenseMatrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        for i in 0..m.rows() {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(Error::InvalidArgument(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self::from_fn(m.rows(), |i, j| m.get(i, j)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Row `i` of the full matrix.
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim).all(|i| (0..i).all(|j| self.get(i, j).integer_decode() == self.get(j, i).integer_decode()))
    }

    /// Leading `r × r` principal submatrix.
    pub fn leading(&self, r: usize) -> Self {
        Self::from_fn(r, |i, j| self.get(i, j))
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        DenseMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim).map(|i| super::dot(self.row(i), x)).collect()
    }

    /// Number of exactly-zero entries strictly above the diagonal.
    pub fn upper_zero_count(&self) -> usize {
        (0..self.dim)
            .map(|i| ((i + 1)..self.dim).filter(|&j| self.get(i, j) == T::zero()).count())
            .sum()
    }

    /// Lower Cholesky factor `C` with `A = C Cᵀ`.
    pub fn cholesky(&self) -> Result<LowerTriangular<T>> {
        let p = self.dim;
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(p);
        for i in 0..p {
            let mut row = vec![T::zero(); i + 1];
            for j in 0..=i {
                let mut s = self.get(i, j);
                let other = if j == i { &row[..] } else { &rows[j][..] };
                for k in 0..j {
                    s = s - row[k] * other[k];
                }
                if i == j {
                    if !(s > T::zero()) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    row[j] = s.sqrt();
                } else {
                    row[j] = s / rows[j][j];
                }
            }
            rows.push(row);
        }
        LowerTriangular::from_rows(&rows)
    }
}
