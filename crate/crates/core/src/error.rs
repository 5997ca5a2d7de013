use thiserror::Error;

/// Errors raised by space construction, lattice operations and projections.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows} rows, row {row} has {len} entries")]
    NotSquare { rows: usize, row: usize, len: usize },

    #[error("empty matrix or zero dimension")]
    Empty,

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("gram matrix is not symmetric: entries ({row},{col}) differ by {delta:e}")]
    Asymmetric { row: usize, col: usize, delta: f64 },

    #[error("gram matrix is not positive definite: witness {witness:?} has <v,v> = {quadratic_form:e}")]
    NotPositiveDefinite { witness: Vec<f64>, quadratic_form: f64 },

    #[error("{what} is singular")]
    Singular { what: &'static str },

    #[error("{what} is ill-conditioned: condition estimate {estimate:e} exceeds {limit:e}")]
    IllConditioned {
        what: &'static str,
        estimate: f64,
        limit: f64,
    },

    #[error("dykstra did not converge after {iterations} cycles (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("point is not in the cone: order coordinate {index} is {value:e}")]
    NotInCone { index: usize, value: f64 },

    #[error("moreau decomposition defect: <p,q> = {orthogonality:e}, worst polar angle {polar:e}")]
    MoreauDefect { orthogonality: f64, polar: f64 },

    #[error("order algebra inconsistency: {0}")]
    Inconsistent(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for failures caused by floating point limits rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::IllConditioned { .. }
                | Error::Singular { .. }
                | Error::MoreauDefect { .. }
                | Error::Inconsistent(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
