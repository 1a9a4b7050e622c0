//! Dense square matrices over a [`Scalar`] backend.

use std::fmt;

use serde_json::Value;

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Dense `m × m` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    dim: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![S::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = S::one();
        }
        m
    }

    pub fn diag(entries: Vec<S>) -> Self {
        let dim = entries.len();
        let mut m = Self::zeros(dim);
        for (i, e) in entries.into_iter().enumerate() {
            m.data[i * dim + i] = e;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Invalid("matrix must have at least one row".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &S {
        &self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: S) {
        self.data[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[S] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<S>> {
        self.data.chunks(self.dim).map(<[S]>::to_vec).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }

    fn check_finite(self, context: &'static str) -> Result<Self> {
        if self.data.iter().all(S::is_finite) {
            Ok(self)
        } else {
            Err(Error::NonFinite { context })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Self { dim: self.dim, data }.check_finite("matrix addition")
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Self { dim: self.dim, data }.check_finite("matrix subtraction")
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a.clone() * s.clone()).collect(),
        }
    }

    /// `self + s·other`, used to accumulate linear maps.
    pub fn add_scaled(&mut self, other: &Self, s: &S) -> Result<()> {
        self.check_dim(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = a.clone() + b.clone() * s.clone();
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = S::zero();
                for k in 0..n {
                    acc = acc + self.data[i * n + k].clone() * other.data[k * n + j].clone();
                }
                data.push(acc);
            }
        }
        Self { dim: n, data }.check_finite("matrix product")
    }

    /// Inverse by Gaussian elimination with partial pivoting on the modulus.
    ///
    /// The float backend treats pivots with `|p| <= 1e-13 · max|a_ij|` as zero; the
    /// exact backend only rejects exact zeros.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.dim;
        let scale = self.data.iter().map(S::modulus).fold(0.0_f64, f64::max);
        let mut a = self.data.clone();
        let mut inv = Self::identity(n).data;

        for col in 0..n {
            let pivot_row = (col..n)
                .filter(|&r| !a[r * n + col].is_zero())
                .max_by(|&r, &s| {
                    a[r * n + col]
                        .modulus()
                        .total_cmp(&a[s * n + col].modulus())
                        .then(s.cmp(&r))
                });
            let Some(p) = pivot_row else {
                return Err(Error::Singular { pivot_index: col });
            };
            if S::is_singular_pivot(&a[p * n + col], scale) {
                return Err(Error::Singular { pivot_index: col });
            }
            if p != col {
                for j in 0..n {
                    a.swap(p * n + j, col * n + j);
                    inv.swap(p * n + j, col * n + j);
                }
            }
            let pivot_inv = a[col * n + col]
                .recip()
                .ok_or(Error::Singular { pivot_index: col })?;
            for j in 0..n {
                a[col * n + j] = a[col * n + j].clone() * pivot_inv.clone();
                inv[col * n + j] = inv[col * n + j].clone() * pivot_inv.clone();
            }
            for r in 0..n {
                if r == col || a[r * n + col].is_zero() {
                    continue;
                }
                let factor = a[r * n + col].clone();
                for j in 0..n {
                    a[r * n + j] = a[r * n + j].clone() - factor.clone() * a[col * n + j].clone();
                    inv[r * n + j] =
                        inv[r * n + j].clone() - factor.clone() * inv[col * n + j].clone();
                }
            }
        }
        Self { dim: n, data: inv }.check_finite("matrix inverse")
    }

    /// Frobenius norm computed in doubles.
    pub fn norm(&self) -> f64 {
        self.data
            .iter()
            .map(|z| {
                let m = z.modulus();
                m * m
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(S::modulus).fold(0.0, f64::max)
    }

    pub fn map_backend<T: Scalar>(&self, f: impl Fn(&S) -> Result<T>) -> Result<Matrix<T>> {
        let data = self.data.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(Matrix {
            dim: self.dim,
            data,
        })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.data
                .chunks(self.dim)
                .map(|row| Value::Array(row.iter().map(S::to_json).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .as_array()
            .ok_or_else(|| Error::Invalid(format!("expected a matrix, found {v}")))?;
        let rows = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Invalid(format!("expected a matrix row, found {row}")))?
                    .iter()
                    .map(S::from_json)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

impl<S: Scalar> fmt::Display for Matrix<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.data.chunks(self.dim).enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{x}")?;
            }
        }
        f.write_str("]")
    }
}

pub fn mat_mul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    a.mul(b)
}

pub fn mat_inverse<S: Scalar>(a: &Matrix<S>) -> Result<Matrix<S>> {
    a.inverse()
}

pub fn mat_norm<S: Scalar>(a: &Matrix<S>) -> f64 {
    a.norm()
}
