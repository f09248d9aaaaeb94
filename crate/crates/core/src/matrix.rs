use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of big integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::LengthMismatch { expected: cols, got: row.len() });
            }
            data.extend(row.iter().cloned().map(Into::into));
        }
        Ok(IntegerMatrix { rows: rows.len(), cols, data })
    }

    /// Builds a matrix with explicit dimensions; `data` is row-major.
    pub fn from_data(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        let expected = rows.checked_mul(cols).ok_or(Error::Parse("matrix too large".into()))?;
        if data.len() != expected {
            return Err(Error::LengthMismatch { expected, got: data.len() });
        }
        Ok(IntegerMatrix { rows, cols, data })
    }

    /// `M(x)`: diagonal `x`, `-1` on the first off-diagonals.
    pub fn tridiagonal(x: &[i64]) -> Self {
        let n = x.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::from(x[i]);
            if i + 1 < n {
                m[(i, i + 1)] = -BigInt::one();
                m[(i + 1, i)] = -BigInt::one();
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation; row counts must agree.
    pub fn hconcat(&self, other: &IntegerMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::LengthMismatch { expected: self.rows, got: other.rows });
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(IntegerMatrix { rows: self.rows, cols, data })
    }

    pub fn row_sums(&self) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        (0..self.rows).map(|i| self.row(i).iter().map(ToPrimitive::to_i64).collect()).collect()
    }

    /// Equality up to a permutation of columns.
    pub fn perm_eq(&self, other: &IntegerMatrix) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        let mut mine: Vec<Vec<BigInt>> = (0..self.cols).map(|j| self.column(j)).collect();
        let mut theirs: Vec<Vec<BigInt>> = (0..other.cols).map(|j| other.column(j)).collect();
        mine.sort();
        theirs.sort();
        mine == theirs
    }
}

impl std::ops::Index<(usize, usize)> for IntegerMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntegerMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let cells: Vec<String> = self.row(i).iter().map(|x| format!("{x:>3}")).collect();
            writeln!(f, "[{} ]", cells.join(""))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perm_eq_ignores_column_order() {
        let a = IntegerMatrix::from_rows(&[vec![1, 0, 2], vec![0, 1, 3]]).unwrap();
        let b = IntegerMatrix::from_rows(&[vec![2, 1, 0], vec![3, 0, 1]]).unwrap();
        let c = IntegerMatrix::from_rows(&[vec![2, 1, 0], vec![3, 1, 0]]).unwrap();
        assert!(a.perm_eq(&b));
        assert!(!a.perm_eq(&c));
        assert_ne!(a, b);
    }

    #[test]
    fn product_and_transpose() {
        let a = IntegerMatrix::from_rows(&[vec![1, -1, 0], vec![0, 1, 1]]).unwrap();
        let g = a.mul(&a.transpose()).unwrap();
        assert_eq!(g, IntegerMatrix::from_rows(&[vec![2, -1], vec![-1, 2]]).unwrap());
        assert!(a.mul(&a).is_err());
    }

    #[test]
    fn tridiagonal_shape() {
        let m = IntegerMatrix::tridiagonal(&[2, 3]);
        assert_eq!(m, IntegerMatrix::from_rows(&[vec![2, -1], vec![-1, 3]]).unwrap());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(IntegerMatrix::from_rows(&[vec![1, 2], vec![3]]).is_err());
        assert!(IntegerMatrix::from_data(2, 2, vec![BigInt::one()]).is_err());
    }
}
