use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{DenseMatrix, SymMatrix};

/// Lower-triangular `p × p` matrix with a strictly positive diagonal, stored
/// as packed rows: row `r` holds the `r + 1` entries `(r, 0..=r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowerTriangular<T> {
    dim: usize,
    data: Vec<T>,
}

#[inline]
fn row_offset(r: usize) -> usize {
    r * (r + 1) / 2
}

impl<T: Scalar> LowerTriangular<T> {
    /// Builds from packed row-major storage of length `p(p+1)/2`.
    pub fn from_packed(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if data.len() != row_offset(dim) {
            return Err(Error::DimensionMismatch {
                expected: row_offset(dim),
                found: data.len(),
            });
        }
        let out = Self { dim, data };
        out.validate()?;
        Ok(out)
    }

    /// Builds from explicit rows; row `r` must have `r + 1` entries.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(row_offset(dim));
        for (r, row) in rows.iter().enumerate() {
            if row.len() != r + 1 {
                return Err(Error::DimensionMismatch {
                    expected: r + 1,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_packed(dim, data)
    }

    /// Builds from a dense square matrix whose strict upper triangle is zero.
    pub fn from_dense(m: &DenseMatrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let dim = m.rows();
        let mut data = Vec::with_capacity(row_offset(dim));
        for r in 0..dim {
            for c in 0..dim {
                let v = m.get(r, c);
                if c <= r {
                    data.push(v);
                } else if v != T::zero() {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({r}, {c}) above the diagonal is nonzero"
                    )));
                }
            }
        }
        Self::from_packed(dim, data)
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![T::zero(); row_offset(dim)];
        for r in 0..dim {
            data[row_offset(r) + r] = T::one();
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        let dim = diag.len();
        let mut data = vec![T::zero(); row_offset(dim)];
        for (r, &d) in diag.iter().enumerate() {
            data[row_offset(r) + r] = d;
        }
        Self::from_packed(dim, data)
    }

    fn validate(&self) -> Result<()> {
        for r in 0..self.dim {
            let row = self.row(r);
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: r, column: c });
            }
            if !(row[r] > T::zero()) {
                return Err(Error::NonPositiveDiagonal { index: r });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn packed(&self) -> &[T] {
        &self.data
    }

    /// Entries `(r, 0..=r)`.
    pub fn row(&self, r: usize) -> &[T] {
        let start = row_offset(r);
        &self.data[start..start + r + 1]
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        if c > r {
            T::zero()
        } else {
            self.data[row_offset(r) + c]
        }
    }

    pub fn diag(&self, r: usize) -> T {
        self.data[row_offset(r) + r]
    }

    /// Number of contiguous off-diagonal entries ending at the diagonal,
    /// counted from the first nonzero entry of the row.
    pub fn bandwidth(&self, r: usize) -> usize {
        let row = self.row(r);
        let leading = row[..r].iter().take_while(|v| **v == T::zero()).count();
        r - leading
    }

    pub fn bandwidths(&self) -> Vec<usize> {
        (0..self.dim).map(|r| self.bandwidth(r)).collect()
    }

    pub fn log_diag_sum(&self) -> T {
        (0..self.dim).map(|r| self.diag(r).ln()).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut m = DenseMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, &v) in self.row(r).iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    /// `L x`.
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.dim, "matvec dimension mismatch");
        (0..self.dim).map(|r| super::dot(self.row(r), &x[..=r])).collect()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.dim, "solve dimension mismatch");
        let mut y = Vec::with_capacity(self.dim);
        for r in 0..self.dim {
            let row = self.row(r);
            let acc = super::dot(&row[..r], &y);
            y.push((b[r] - acc) / row[r]);
        }
        y
    }

    /// Solves `Lᵀ y = b` by backward substitution.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.dim, "solve dimension mismatch");
        let mut y = b.to_vec();
        for r in (0..self.dim).rev() {
            let row = self.row(r);
            y[r] = y[r] / row[r];
            let yr = y[r];
            for (c, &v) in row[..r].iter().enumerate() {
                y[c] = y[c] - v * yr;
            }
        }
        y
    }

    /// `Lᵀ L`, accumulated one row outer product at a time.
    pub fn gram(&self) -> SymMatrix<T> {
        let p = self.dim;
        let mut upper = vec![T::zero(); p * p];
        for r in 0..p {
            let row = self.row(r);
            for j in 0..=r {
                let a = row[j];
                if a == T::zero() {
                    continue;
                }
                for k in j..=r {
                    upper[j * p + k] = upper[j * p + k] + a * row[k];
                }
            }
        }
        SymMatrix::from_fn(p, |j, k| upper[j * p + k])
    }


    pub fn cast<U: Scalar>(&self) -> LowerTriangular<U> {
        LowerTriangular {
            dim: self.dim,
            data: self.data.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}
