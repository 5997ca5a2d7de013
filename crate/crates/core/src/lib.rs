//! Metric projection onto lattice cones of finite-dimensional inner product spaces.
//!
//! A space is a Gram matrix `G` (the inner product `xᵀGy`) together with an
//! invertible order basis `B` (the cone `{x : Bx >= 0}`). The norm is a lattice
//! norm exactly when `B⁻ᵀGB⁻¹` is diagonal; on those instances the projection
//! onto the cone is the positive part, and the property suites in
//! [`property_harness`] check that behaviour against an independent Dykstra
//! solver.

// `!(a > b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cone_projection;
pub mod error;
pub mod function_spaces;
pub mod inner_space;
pub mod instance;
pub mod lattice_order;
pub mod linalg;
pub mod numfmt;
pub mod property_harness;

pub use cone_projection::{
    certificate_check, moreau_decompose, polar_generators, project_closed_form, project_dykstra,
    Method, ProjectionCertificate, ProjectionResult, Projector,
};
pub use error::{Error, Result};
pub use inner_space::{validate_space, InnerProductSpace, Vector};
pub use instance::Instance;
pub use lattice_order::{OrderBasis, OrderedSpace};
pub use linalg::Matrix;
