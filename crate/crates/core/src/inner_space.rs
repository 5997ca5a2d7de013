//! Finite-dimensional real inner product spaces given by an explicit Gram matrix.
//!
//! Every inner product and norm used elsewhere in the crate is evaluated here.
//! The Gram matrix is validated once at construction (symmetric, positive
//! definite, reasonably conditioned) and is immutable afterwards.

use std::ops::{Add, Index, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{condition_one, Cholesky, Matrix};

/// Largest entrywise change symmetrization may make before input is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Largest accepted condition estimate for Gram and order matrices.
pub const CONDITION_LIMIT: f64 = 1e8;

/// A coordinate tuple with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(coords))
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Self(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm distance; both vectors must have equal length.
    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.0.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.0.len(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.len(), rhs.len());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        debug_assert_eq!(self.len(), rhs.len());
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(self.0.iter().map(|v| -v).collect())
    }
}

/// A real inner product space `(R^n, <x,y> = xᵀ G y)`.
#[derive(Debug, Clone)]
pub struct InnerProductSpace {
    gram: Matrix,
    gram_inv: Matrix,
}

/// Checks a candidate Gram matrix without building a space.
///
/// On indefiniteness the error carries a witness `v` with `vᵀ G v <= 0`.
pub fn validate_space(dim: usize, gram: &[Vec<f64>]) -> Result<()> {
    InnerProductSpace::from_rows(dim, gram).map(|_| ())
}

impl InnerProductSpace {
    pub fn euclidean(dim: usize) -> Self {
        Self::new(Matrix::identity(dim)).expect("identity is positive definite")
    }

    pub fn from_rows(dim: usize, gram: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(gram)?;
        if m.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
        Self::new(m)
    }

    pub fn new(gram: Matrix) -> Result<Self> {
        let n = gram.dim();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut sym = gram.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (gram.get(i, j), gram.get(j, i));
                let s = 0.5 * (a + b);
                let delta = (a - s).abs().max((b - s).abs());
                if delta > SYMMETRY_TOL {
                    return Err(Error::Asymmetric {
                        row: i,
                        col: j,
                        delta: (a - b).abs(),
                    });
                }
                sym.set(i, j, s);
                sym.set(j, i, s);
            }
        }
        let chol = Cholesky::factor(&sym).map_err(|f| {
            let witness = f.witness;
            let quadratic_form = quad_form(&sym, &witness, &witness);
            Error::NotPositiveDefinite {
                witness,
                quadratic_form,
            }
        })?;
        let gram_inv = chol.inverse();
        // Condition of the Jacobi-scaled matrix D^{-1/2} G D^{-1/2}; a pure diagonal
        // rescaling of coordinates does not degrade any computation here.
        let d: Vec<f64> = (0..n).map(|i| sym.get(i, i).sqrt()).collect();
        let mut scaled = sym.clone();
        let mut scaled_inv = gram_inv.clone();
        for i in 0..n {
            for j in 0..n {
                scaled.set(i, j, sym.get(i, j) / (d[i] * d[j]));
                scaled_inv.set(i, j, gram_inv.get(i, j) * d[i] * d[j]);
            }
        }
        let estimate = condition_one(&scaled, &scaled_inv);
        if !(estimate <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                what: "gram matrix",
                estimate,
                limit: CONDITION_LIMIT,
            });
        }
        Ok(Self {
            gram: sym,
            gram_inv,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn gram_inverse(&self) -> &Matrix {
        &self.gram_inv
    }

    pub fn inner(&self, x: &Vector, y: &Vector) -> Result<f64> {
        x.check_dim(self.dim())?;
        y.check_dim(self.dim())?;
        Ok(self.inner_raw(x.as_slice(), y.as_slice()))
    }

    pub fn norm(&self, x: &Vector) -> Result<f64> {
        self.inner(x, x).map(|q| q.max(0.0).sqrt())
    }

    /// `G x`, the coefficient vector of the functional `<x, .>`.
    pub(crate) fn lower_index(&self, x: &[f64]) -> Vec<f64> {
        self.gram.mul_vec(x)
    }

    /// Bit-symmetric evaluation of `xᵀ G y`: each off-diagonal pair contributes
    /// `g_ij (x_i y_j + x_j y_i)`, which is invariant under swapping `x` and `y`.
    pub(crate) fn inner_raw(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            let row = self.gram.row(i);
            let mut acc = row[i] * (x[i] * y[i]);
            for j in (i + 1)..n {
                let g = row[j];
                if g != 0.0 {
                    acc += g * (x[i] * y[j] + x[j] * y[i]);
                }
            }
            s += acc;
        }
        s
    }

    pub(crate) fn norm_raw(&self, x: &[f64]) -> f64 {
        self.inner_raw(x, x).max(0.0).sqrt()
    }
}

fn quad_form(m: &Matrix, x: &[f64], y: &[f64]) -> f64 {
    m.mul_vec(y).iter().zip(x).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn space(rows: &[[f64; 2]]) -> Result<InnerProductSpace> {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        InnerProductSpace::from_rows(2, &rows)
    }

    #[test]
    fn validate_accepts_identity_and_offdiag() {
        assert!(validate_space(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]).is_ok());
        assert!(validate_space(2, &[vec![2.0, 1.0], vec![1.0, 2.0]]).is_ok());
    }

    #[test]
    fn validate_rejects_indefinite_with_witness() {
        let err = validate_space(2, &[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap_err();
        match err {
            Error::NotPositiveDefinite {
                witness,
                quadratic_form,
            } => {
                assert!(quadratic_form <= 0.0);
                // independent evaluation of the form at the witness
                let (a, b) = (witness[0], witness[1]);
                assert_eq!(a * a + 4.0 * a * b + b * b, quadratic_form);
            }
            other => panic!("unexpected {other:?}"),
        }
        // the hand witness (1,-1) also exhibits the defect
        let g = [[1.0, 2.0], [2.0, 1.0]];
        let q = g[0][0] - 2.0 * g[0][1] + g[1][1];
        assert_eq!(q, -2.0);
    }

    #[test]
    fn validate_structural_errors() {
        assert!(matches!(
            validate_space(2, &[vec![1.0, 0.0], vec![0.0]]),
            Err(Error::NotSquare { .. })
        ));
        assert!(matches!(
            validate_space(3, &[vec![1.0, 0.0], vec![0.0, 1.0]]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(validate_space(0, &[]), Err(Error::Empty)));
    }

    #[test]
    fn asymmetry_beyond_threshold_rejected() {
        assert!(matches!(
            space(&[[2.0, 1.0], [1.0 + 1e-9, 2.0]]),
            Err(Error::Asymmetric { row: 0, col: 1, .. })
        ));
        let s = space(&[[2.0, 1.0], [1.0 + 1e-13, 2.0]]).unwrap();
        assert_eq!(s.gram().get(0, 1), s.gram().get(1, 0));
    }

    #[test]
    fn ill_conditioned_gram_rejected() {
        let err = space(&[[1.0, 1.0 - 1e-10], [1.0 - 1e-10, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::IllConditioned { .. }), "{err:?}");
        // pure diagonal scaling is not treated as ill-conditioning
        assert!(space(&[[1.0, 0.0], [0.0, 1e-14]]).is_ok());
    }

    #[test]
    fn inner_examples() {
        let e = InnerProductSpace::euclidean(2);
        assert_eq!(e.inner(&v(&[1.0, 2.0]), &v(&[3.0, -1.0])).unwrap(), 1.0);
        let w = space(&[[1.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(w.inner(&v(&[1.0, 1.0]), &v(&[1.0, 1.0])).unwrap(), 3.0);
        let g = space(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!(g.inner(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn norm_examples() {
        let e = InnerProductSpace::euclidean(2);
        assert_eq!(e.norm(&v(&[3.0, 4.0])).unwrap(), 5.0);
        let g = space(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!(g.norm(&Vector::zeros(2)).unwrap(), 0.0);
        assert!((g.norm(&v(&[1.0, -1.0])).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let e = InnerProductSpace::euclidean(2);
        assert_eq!(
            e.inner(&v(&[1.0, 2.0, 3.0]), &v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        );
        assert!(e.norm(&v(&[1.0])).is_err());
    }

    #[test]
    fn non_finite_vector_rejected() {
        assert_eq!(
            Vector::new(vec![1.0, f64::INFINITY]),
            Err(Error::NonFinite { index: 1 })
        );
    }
}
