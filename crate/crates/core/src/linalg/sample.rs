use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::SymMatrix;

/// `n × p` data matrix, one observation per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix<T> {
    n: usize,
    p: usize,
    data: Vec<T>,
}

impl<T: Scalar> SampleMatrix<T> {
    pub fn new(n: usize, p: usize, data: Vec<T>) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument(
                "sample matrix needs at least one row and one column".into(),
            ));
        }
        if data.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / p,
                column: k % p,
            });
        }
        Ok(Self { n, p, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * p);
        for row in rows {
            if row.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), p, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.p)
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.p + j]
    }

    /// `(1/n) X_{1:r}ᵀ X_{1:r}` over the first `r` columns.
    pub fn gram(&self, r: usize) -> Result<SymMatrix<T>> {
        if r == 0 || r > self.p {
            return Err(Error::InvalidArgument(format!(
                "gram column count {r} outside 1..={}",
                self.p
            )));
        }
        let mut acc = vec![T::zero(); r * r];
        for row in self.rows() {
            for j in 0..r {
                let xj = row[j];
                for k in j..r {
                    acc[j * r + k] = acc[j * r + k] + xj * row[k];
                }
            }
        }
        let inv_n = T::one() / T::of_usize(self.n);
        Ok(SymMatrix::from_fn(r, |j, k| acc[j * r + k] * inv_n))
    }

    pub fn column_means(&self) -> Vec<T> {
        let mut means = vec![T::zero(); self.p];
        for row in self.rows() {
            for (m, &v) in means.iter_mut().zip(row) {
                *m = *m + v;
            }
        }
        let nf = T::of_usize(self.n);
        means.iter_mut().for_each(|m| *m = *m / nf);
        means
    }

    /// Subtracts `shift` from every row.
    pub fn shifted(&self, shift: &[T]) -> Self {
        assert_eq!(shift.len(), self.p, "shift length mismatch");
        let data = self
            .rows()
            .flat_map(|row| row.iter().zip(shift).map(|(&v, &s)| v - s))
            .collect();
        Self {
            n: self.n,
            p: self.p,
            data,
        }
    }

    pub fn centered(&self) -> Self {
        self.shifted(&self.column_means())
    }

    /// Rows picked by index, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(idx.len() * self.p);
        for &i in idx {
            if i >= self.n {
                return Err(Error::InvalidArgument(format!("row index {i} out of range")));
            }
            data.extend_from_slice(self.row(i));
        }
        Self::new(idx.len(), self.p, data)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }
}
