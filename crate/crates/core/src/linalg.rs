//! Small dense row-major matrices and the factorizations the rest of the crate needs.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = *d;
        }
        m
    }

    /// Builds a square matrix from rows, rejecting ragged or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Empty);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::NotSquare {
                    rows: dim,
                    row: r,
                    len: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { dim, data })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, col)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        self.data
            .chunks(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Computes `selfᵀ x` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut out = vec![0.0; self.dim];
        for (row, xi) in self.data.chunks(self.dim).zip(x) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
        out
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| a.get(r, col).abs().total_cmp(&a.get(s, col).abs()))
                .unwrap();
            let pivot = a.get(pivot_row, col);
            if pivot.abs() <= f64::EPSILON * scale {
                return None;
            }
            if pivot_row != col {
                for j in 0..n {
                    a.data.swap(pivot_row * n + j, col * n + j);
                    inv.data.swap(pivot_row * n + j, col * n + j);
                }
            }
            for j in 0..n {
                a.data[col * n + j] /= pivot;
                inv.data[col * n + j] /= pivot;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a.get(r, col);
                if factor == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a.data[r * n + j] -= factor * a.data[col * n + j];
                    inv.data[r * n + j] -= factor * inv.data[col * n + j];
                }
            }
        }
        Some(inv)
    }
}

/// Lower triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    lower: Matrix,
}

/// Failed factorization: the Schur complement pivot at `index` was not positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFailure {
    pub index: usize,
    pub pivot: f64,
    /// Vector `v` with `vᵀ A v` equal to the failing pivot (up to rounding).
    pub witness: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &Matrix) -> std::result::Result<Self, CholeskyFailure> {
        let n = a.dim();
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > 0.0) {
                // v = (-A11⁻¹ a12, 1, 0...) so that vᵀAv is the Schur pivot.
                let lead = Cholesky {
                    lower: leading_block(&l, j),
                };
                let rhs: Vec<f64> = (0..j).map(|i| a.get(i, j)).collect();
                let mut witness: Vec<f64> = lead.solve(&rhs).into_iter().map(|v| -v).collect();
                witness.push(1.0);
                witness.resize(n, 0.0);
                return Err(CholeskyFailure {
                    index: j,
                    pivot: d,
                    witness,
                });
            }
            let djj = d.sqrt();
            l.set(j, j, djj);
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                l.set(i, j, s / djj);
            }
        }
        Ok(Self { lower: l })
    }

    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lower.dim();
        let l = &self.lower;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l.get(i, k) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l.get(k, i) * y[k];
            }
            y[i] = s / l.get(i, i);
        }
        y
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.lower.dim();
        let mut inv = Matrix::zeros(n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        // exact symmetry for downstream bit-level comparisons
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (inv.get(i, j) + inv.get(j, i));
                inv.set(i, j, s);
                inv.set(j, i, s);
            }
        }
        inv
    }
}

fn leading_block(m: &Matrix, k: usize) -> Matrix {
    let mut out = Matrix::zeros(k);
    for i in 0..k {
        for j in 0..k {
            out.set(i, j, m.get(i, j));
        }
    }
    out
}

/// 1-norm condition number from an explicit inverse.
pub fn condition_one(a: &Matrix, inv: &Matrix) -> f64 {
    a.norm_one() * inv.norm_one()
}
