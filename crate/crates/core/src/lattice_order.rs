//! Lattice orders induced by simplicial cones `K = {x : Bx >= 0}`.
//!
//! In the order coordinates `c = Bx` the order is componentwise, so every
//! lattice operation is a componentwise operation pulled back through `B⁻¹`.

use crate::error::{Error, Result};
use crate::inner_space::{InnerProductSpace, Vector, CONDITION_LIMIT};
use crate::linalg::{condition_one, Matrix};

/// Largest accepted `‖B B⁻¹ - I‖_max`.
pub const INVERSE_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct OrderBasis {
    basis: Matrix,
    inverse: Matrix,
}

impl OrderBasis {
    /// The coordinate order.
    pub fn identity(dim: usize) -> Self {
        Self {
            basis: Matrix::identity(dim),
            inverse: Matrix::identity(dim),
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn new(basis: Matrix) -> Result<Self> {
        if basis.dim() == 0 {
            return Err(Error::Empty);
        }
        let inverse = basis.inverse().ok_or(Error::Singular { what: "order basis" })?;
        let estimate = condition_one(&basis, &inverse);
        if !(estimate <= CONDITION_LIMIT) {
            return Err(Error::IllConditioned {
                what: "order basis",
                estimate,
                limit: CONDITION_LIMIT,
            });
        }
        let defect = basis.mul(&inverse).max_abs_diff(&Matrix::identity(basis.dim()));
        if defect > INVERSE_CHECK_TOL {
            return Err(Error::Singular { what: "order basis" });
        }
        Ok(Self { basis, inverse })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn inverse(&self) -> &Matrix {
        &self.inverse
    }

    /// Order coordinates `Bx`.
    pub fn coords(&self, x: &Vector) -> Vec<f64> {
        self.basis.mul_vec(x.as_slice())
    }

    /// The vector with order coordinates `c`, i.e. `B⁻¹c`.
    pub fn from_coords(&self, c: &[f64]) -> Vector {
        Vector::from_raw(self.inverse.mul_vec(c))
    }

    /// Extreme rays of the cone: the columns of `B⁻¹`.
    pub fn generators(&self) -> Vec<Vector> {
        (0..self.dim())
            .map(|j| Vector::from_raw(self.inverse.column(j)))
            .collect()
    }

    fn check(&self, x: &Vector) -> Result<()> {
        x.check_dim(self.dim())
    }

    /// `x <= y`, i.e. every coordinate of `B(y - x)` is at least `-tol`.
    pub fn leq_tol(&self, x: &Vector, y: &Vector, tol: f64) -> Result<bool> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.coords(&(y - x)).iter().all(|c| *c >= -tol))
    }

    pub fn leq(&self, x: &Vector, y: &Vector) -> Result<bool> {
        self.leq_tol(x, y, 0.0)
    }

    /// Membership in the cone with slack `tol` on the order coordinates.
    pub fn in_cone(&self, x: &Vector, tol: f64) -> Result<bool> {
        self.check(x)?;
        Ok(self.coords(x).iter().all(|c| *c >= -tol))
    }

    pub fn pos_part(&self, x: &Vector) -> Result<Vector> {
        self.check(x)?;
        let c: Vec<f64> = self.coords(x).into_iter().map(|v| v.max(0.0)).collect();
        Ok(self.from_coords(&c))
    }

    pub fn neg_part(&self, x: &Vector) -> Result<Vector> {
        self.pos_part(&-x)
    }

    pub fn abs(&self, x: &Vector) -> Result<Vector> {
        Ok(&self.pos_part(x)? + &self.neg_part(x)?)
    }

    fn coordinatewise(&self, x: &Vector, y: &Vector, f: fn(f64, f64) -> f64) -> Result<Vector> {
        self.check(x)?;
        self.check(y)?;
        let c: Vec<f64> = self
            .coords(x)
            .into_iter()
            .zip(self.coords(y))
            .map(|(a, b)| f(a, b))
            .collect();
        Ok(self.from_coords(&c))
    }

    /// `x ∨ y`: coordinatewise maximum of `Bx` and `By`.
    pub fn sup(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.coordinatewise(x, y, f64::max)
    }

    /// `x ∧ y`: coordinatewise minimum of `Bx` and `By`.
    pub fn inf(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.coordinatewise(x, y, f64::min)
    }

    /// Disjointness `|x| ∧ |y| = 0`, cross-checked against `|x+y| = |x-y|`.
    ///
    /// The two criteria must agree; a disagreement beyond `10·tol` signals a
    /// bug in the order algebra and is reported as [`Error::Inconsistent`].
    pub fn disjoint(&self, x: &Vector, y: &Vector, tol: f64) -> Result<bool> {
        let meet = self.inf(&self.abs(x)?, &self.abs(y)?)?;
        let meet_defect = meet.max_abs();
        let cross_defect = self.abs(&(x + y))?.max_abs_diff(&self.abs(&(x - y))?);
        let by_meet = meet_defect <= tol;
        let by_cross = cross_defect <= tol;
        if by_meet != by_cross && (meet_defect > 10.0 * tol) != (cross_defect > 10.0 * tol) {
            return Err(Error::Inconsistent(format!(
                "|x|∧|y| defect {meet_defect:e} but |x+y|-|x-y| defect {cross_defect:e}"
            )));
        }
        Ok(by_meet)
    }
}

/// An inner product space together with a lattice order on the same coordinates.
#[derive(Debug, Clone)]
pub struct OrderedSpace {
    space: InnerProductSpace,
    order: OrderBasis,
    // G-representers n_i = G⁻¹Bᵀe_i of the order functionals x ↦ (Bx)_i
    normals: Vec<Vec<f64>>,
    normal_sq: Vec<f64>,
}

impl OrderedSpace {
    pub fn new(space: InnerProductSpace, order: OrderBasis) -> Result<Self> {
        if space.dim() != order.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: order.dim(),
            });
        }
        let normals: Vec<Vec<f64>> = (0..order.dim())
            .map(|i| space.gram_inverse().mul_vec(order.basis().row(i)))
            .collect();
        let normal_sq = normals
            .iter()
            .enumerate()
            .map(|(i, n)| dot(order.basis().row(i), n))
            .collect();
        Ok(Self {
            space,
            order,
            normals,
            normal_sq,
        })
    }

    /// Euclidean space with the coordinate order.
    pub fn euclidean(dim: usize) -> Self {
        Self::new(InnerProductSpace::euclidean(dim), OrderBasis::identity(dim))
            .expect("matching dimensions")
    }

    /// `n_i` with `<n_i, x> = (Bx)_i` for every `x`.
    pub fn halfspace_normal(&self, i: usize) -> &[f64] {
        &self.normals[i]
    }

    /// `<n_i, n_i>`.
    pub fn halfspace_normal_sq(&self, i: usize) -> f64 {
        self.normal_sq[i]
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    pub fn order(&self) -> &OrderBasis {
        &self.order
    }

    /// Gram matrix expressed in order coordinates: `M = B⁻ᵀ G B⁻¹`.
    pub fn order_gram(&self) -> Matrix {
        let inv = self.order.inverse();
        inv.transpose().mul(&self.space.gram().mul(inv))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
