//! Metric projection onto the positive cone.
//!
//! Two independent routes: the closed-form positive part `B⁻¹ max(Bx, 0)`,
//! which is the metric projection exactly when the norm is a lattice norm,
//! and Dykstra's cyclic projection onto the halfspaces `(Bv)_i >= 0` taken in
//! the `G` inner product, which is the metric projection for any Gram form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner_space::Vector;
use crate::lattice_order::{dot, OrderedSpace};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Membership slack used for the result invariant of a projection.
pub const CONE_MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Dykstra,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub point: Vector,
    pub method: Method,
    /// Full Dykstra cycles; 0 for the closed form.
    pub iterations: usize,
    /// `G`-norm change of the iterate over the last cycle; 0 for the closed form.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionCertificate {
    /// `<x - p, p>`
    pub orthogonality_defect: f64,
    /// `max_i <x - p, g_i>` over the cone generators.
    pub worst_generator_angle: f64,
    pub verdict: bool,
}

/// Selects one of the two projection routes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projector {
    ClosedForm,
    Dykstra { tol: f64, max_iter: usize },
}

impl Projector {
    pub fn dykstra() -> Self {
        Projector::Dykstra {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn method(&self) -> Method {
        match self {
            Projector::ClosedForm => Method::ClosedForm,
            Projector::Dykstra { .. } => Method::Dykstra,
        }
    }

    pub fn project(&self, ospace: &OrderedSpace, x: &Vector) -> Result<ProjectionResult> {
        match *self {
            Projector::ClosedForm => project_closed_form(ospace, x),
            Projector::Dykstra { tol, max_iter } => project_dykstra(ospace, x, tol, max_iter),
        }
    }
}

/// The positive part `x⁺`, reported as a projection.
///
/// This is the metric projection only on instances whose norm is a lattice
/// norm; on other instances it is still the positive part.
pub fn project_closed_form(ospace: &OrderedSpace, x: &Vector) -> Result<ProjectionResult> {
    Ok(ProjectionResult {
        point: ospace.order().pos_part(x)?,
        method: Method::ClosedForm,
        iterations: 0,
        residual: 0.0,
    })
}

/// Dykstra's algorithm over the halfspaces `H_i = {v : (Bv)_i >= 0}`.
///
/// The projection onto `H_i` under `G` moves along the representer `n_i` of
/// the functional `v ↦ (Bv)_i`, so each Dykstra increment is a nonpositive
/// multiple of `n_i` and is stored as that scalar.
///
/// Stops once a full cycle moves the iterate by at most `tol` in the `G`-norm
/// and the iterate is feasible and complementary to the increments within
/// `tol`, which makes the returned point pass [`certificate_check`] at `tol`.
pub fn project_dykstra(
    ospace: &OrderedSpace,
    x: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<ProjectionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    x.check_dim(ospace.dim())?;
    let n = ospace.dim();
    if x.is_zero() {
        return Ok(ProjectionResult {
            point: Vector::zeros(n),
            method: Method::Dykstra,
            iterations: 0,
            residual: 0.0,
        });
    }
    let basis = ospace.order().basis();
    let space = ospace.space();
    let mut point = x.as_slice().to_vec();
    let mut increments = vec![0.0; n];
    let mut prev = point.clone();
    let mut delta = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for cycle in 1..=max_iter {
        prev.copy_from_slice(&point);
        for (i, t) in increments.iter_mut().enumerate() {
            let normal = ospace.halfspace_normal(i);
            let sq = ospace.halfspace_normal_sq(i);
            // z = point + t n_i;  a = (Bz)_i
            let a = dot(basis.row(i), &point) + *t * sq;
            let next = a.min(0.0) / sq;
            let step = *t - next;
            if step != 0.0 {
                for (p, nv) in point.iter_mut().zip(normal) {
                    *p += step * nv;
                }
            }
            *t = next;
        }
        for ((d, p), q) in delta.iter_mut().zip(&point).zip(&prev) {
            *d = p - q;
        }
        residual = space.norm_raw(&delta);
        if residual <= tol && kkt_satisfied(ospace, &point, &increments, tol) {
            return Ok(ProjectionResult {
                point: Vector::from_raw(point),
                method: Method::Dykstra,
                iterations: cycle,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
        last: point,
    })
}

/// Stationarity holds by construction (`x - p = Σ t_i n_i` with `t_i <= 0`, so
/// `<x - p, g_j> = t_j`); what remains is feasibility of `p` and complementary
/// slackness `Σ t_i (Bp)_i = <x - p, p> ≈ 0`.
fn kkt_satisfied(ospace: &OrderedSpace, point: &[f64], increments: &[f64], tol: f64) -> bool {
    let basis = ospace.order().basis();
    let mut slack = 0.0;
    for (i, t) in increments.iter().enumerate() {
        let c = dot(basis.row(i), point);
        if c < -tol {
            return false;
        }
        slack += t * c;
    }
    slack.abs() <= tol
}

/// Evaluates the variational conditions `<x-p, p> = 0` and `<x-p, a> <= 0` on
/// cone generators, which span the cone by nonnegative combinations.
pub fn certificate_check(
    ospace: &OrderedSpace,
    x: &Vector,
    p: &Vector,
    tol: f64,
) -> Result<ProjectionCertificate> {
    x.check_dim(ospace.dim())?;
    p.check_dim(ospace.dim())?;
    let coords = ospace.order().coords(p);
    if let Some((index, &value)) = coords.iter().enumerate().find(|(_, c)| **c < -tol) {
        return Err(Error::NotInCone { index, value });
    }
    let space = ospace.space();
    let r = x - p;
    let orthogonality_defect = space.inner_raw(r.as_slice(), p.as_slice());
    // <r, g_j> = (G r)·(B⁻¹ e_j), i.e. the j-th entry of B⁻ᵀ G r
    let gr = space.lower_index(r.as_slice());
    let worst_generator_angle = ospace
        .order()
        .inverse()
        .tr_mul_vec(&gr)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let verdict = orthogonality_defect.abs() <= tol && worst_generator_angle <= tol;
    Ok(ProjectionCertificate {
        orthogonality_defect,
        worst_generator_angle,
        verdict,
    })
}

/// Splits `x = p + q` with `p` the cone projection and `q` in the polar cone.
///
/// Orthogonality is asserted at `tol·(1 + ‖x‖²)` and polarity at
/// `tol·(1 + ‖x‖)` per unit generator.
pub fn moreau_decompose(ospace: &OrderedSpace, x: &Vector, tol: f64) -> Result<(Vector, Vector)> {
    let p = project_dykstra(ospace, x, tol, DEFAULT_MAX_ITER)?.point;
    let q = x - &p;
    let space = ospace.space();
    let xn = space.norm_raw(x.as_slice());
    let orthogonality = space.inner_raw(p.as_slice(), q.as_slice());
    let gq = space.lower_index(q.as_slice());
    let polar = ospace
        .order()
        .generators()
        .iter()
        .map(|g| dot(&gq, g.as_slice()) / space.norm_raw(g.as_slice()))
        .fold(f64::NEG_INFINITY, f64::max);
    if orthogonality.abs() > tol * (1.0 + xn * xn) || polar > tol * (1.0 + xn) {
        return Err(Error::MoreauDefect {
            orthogonality,
            polar,
        });
    }
    Ok((p, q))
}

/// Generators `-G⁻¹Bᵀe_i` of the polar cone `{y : <y, a> <= 0 for all a in K}`.
pub fn polar_generators(ospace: &OrderedSpace) -> Vec<Vector> {
    (0..ospace.dim())
        .map(|i| Vector::from_raw(ospace.halfspace_normal(i).iter().map(|v| -v).collect()))
        .collect()
}
