//! Small dense matrices over a [`Scalar`].
//!
//! Row-major storage. Float SVD work is delegated to `nalgebra`; exact rank
//! uses Bareiss elimination over the integers.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, dim_err, Result, TensorError};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return dim_err("ragged rows");
        }
        Self::new(r, c, rows.into_iter().flatten().collect())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return dim_err("columns of unequal length");
        }
        Ok(Self::from_fn(r, c, |i, j| cols[j][i].clone()))
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

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                values[i].clone()
            } else {
                T::zero()
            }
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return dim_err(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        Ok(Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| {
                acc + self.get(i, k).clone() * other.get(k, j).clone()
            })
        }))
    }

    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return dim_err(format!("vector of length {} for {} columns", v.len(), self.cols));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * s.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return dim_err("matrix shapes differ");
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self.get(i, i).clone())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x.to_f64().powi(2)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by Gaussian elimination with magnitude pivoting.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return dim_err("determinant of a non-square matrix");
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = T::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| {
                    a[x * n + col]
                        .magnitude()
                        .partial_cmp(&a[y * n + col].magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[piv * n + col].is_zero() {
                return Ok(T::zero());
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col].clone();
            det = det * p.clone();
            for r in col + 1..n {
                let f = a[r * n + col].clone() / p.clone();
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a[r * n + j].clone() - f.clone() * a[col * n + j].clone();
                    a[r * n + j] = v;
                }
            }
        }
        Ok(det)
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return dim_err("inverse of a non-square matrix");
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| {
                    a.get(x, col)
                        .magnitude()
                        .partial_cmp(&a.get(y, col).magnitude())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a.get(piv, col).is_zero() {
                return arg_err("matrix is singular");
            }
            if piv != col {
                a.swap_rows(piv, col);
                inv.swap_rows(piv, col);
            }
            let p = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j).clone() / p.clone());
                inv.set(col, j, inv.get(col, j).clone() / p.clone());
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    a.set(r, j, a.get(r, j).clone() - f.clone() * a.get(col, j).clone());
                    inv.set(r, j, inv.get(r, j).clone() - f.clone() * inv.get(col, j).clone());
                }
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self, tol: f64) -> usize {
        T::matrix_rank(self, tol)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// Left inverse `(BᵀB)⁻¹Bᵀ` of a full-column-rank matrix.
    pub fn left_inverse(&self) -> Result<Self> {
        let bt = self.transpose();
        let gram = bt.matmul(self)?;
        gram.inverse()
            .map_err(|_| TensorError::InvalidArgument("matrix is not of full column rank".into()))?
            .matmul(&bt)
    }
}

impl Matrix<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Vec::new();
        }
        self.to_nalgebra().singular_values().iter().cloned().collect()
    }

    /// Orthonormal basis (as columns) of the column space, using singular
    /// vectors above the relative threshold of [`Scalar::matrix_rank`].
    pub fn column_space_basis(&self, tol: f64) -> Matrix<f64> {
        if self.rows == 0 || self.cols == 0 {
            return Matrix::zeros(self.rows, 0);
        }
        let svd = self.to_nalgebra().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let sv = &svd.singular_values;
        let smax = sv.iter().cloned().fold(0.0_f64, f64::max);
        let thresh = tol * smax * self.rows.max(self.cols) as f64;
        let mut idx: Vec<usize> = (0..sv.len()).filter(|&i| smax > 0.0 && sv[i] > thresh).collect();
        idx.sort_by(|&a, &b| sv[b].partial_cmp(&sv[a]).unwrap_or(std::cmp::Ordering::Equal));
        Matrix::from_fn(self.rows, idx.len(), |i, j| u[(i, idx[j])])
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Matrix<Rational> {
    /// Basis of the column space made of the pivot columns, exact.
    pub fn pivot_column_basis(&self) -> Matrix<Rational> {
        let mut chosen: Vec<usize> = Vec::new();
        for j in 0..self.cols {
            let mut trial = chosen.clone();
            trial.push(j);
            let sub = Matrix::from_fn(self.rows, trial.len(), |i, c| self.get(i, trial[c]).clone());
            if rank_fraction_free(&sub) == trial.len() {
                chosen = trial;
                if chosen.len() == self.rows {
                    break;
                }
            }
        }
        Matrix::from_fn(self.rows, chosen.len(), |i, c| self.get(i, chosen[c]).clone())
    }
}

/// Exact rank of a rational matrix by Bareiss fraction-free elimination.
///
/// Rows are first cleared of denominators, which does not change the rank.
pub fn rank_fraction_free(m: &Matrix<Rational>) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a: Vec<Vec<BigInt>> = (0..rows)
        .map(|i| {
            let lcm = m
                .row(i)
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            m.row(i)
                .iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..rows {
            for j in col + 1..cols {
                let v = (&a[rank][col] * &a[r][j] - &a[r][col] * &a[rank][j]) / &prev;
                a[r][j] = v;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}
