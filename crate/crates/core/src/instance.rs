//! The JSON instance file: `{"dimension": n, "gram": [[..]], "order_basis": [[..]]}`.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::Error;
use crate::inner_space::InnerProductSpace;
use crate::lattice_order::{OrderBasis, OrderedSpace};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub dimension: usize,
    pub gram: Vec<Vec<f64>>,
    /// Defaults to the identity (coordinate order).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_basis: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance JSON at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {source}")]
    Field {
        field: &'static str,
        #[source]
        source: Error,
    },
}

impl InstanceError {
    /// True when the instance parsed but its matrices are numerically unusable.
    pub fn is_numerical(&self) -> bool {
        matches!(self, InstanceError::Field { source, .. } if source.is_numerical())
    }
}

impl Instance {
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(text).map_err(|e| InstanceError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_space(ospace: &OrderedSpace, description: Option<String>) -> Self {
        let basis = ospace.order().basis();
        Self {
            dimension: ospace.dim(),
            gram: ospace.space().gram().to_rows(),
            order_basis: (*basis != Matrix::identity(ospace.dim())).then(|| basis.to_rows()),
            description,
        }
    }

    pub fn to_space(&self) -> Result<OrderedSpace, InstanceError> {
        if self.dimension == 0 {
            return Err(InstanceError::Field {
                field: "dimension",
                source: Error::Empty,
            });
        }
        let space = InnerProductSpace::from_rows(self.dimension, &self.gram)
            .map_err(|source| InstanceError::Field { field: "gram", source })?;
        let order = match &self.order_basis {
            None => OrderBasis::identity(self.dimension),
            Some(rows) => {
                let order = OrderBasis::from_rows(rows).map_err(|source| InstanceError::Field {
                    field: "order_basis",
                    source,
                })?;
                if order.dim() != self.dimension {
                    return Err(InstanceError::Field {
                        field: "order_basis",
                        source: Error::DimensionMismatch {
                            expected: self.dimension,
                            found: order.dim(),
                        },
                    });
                }
                order
            }
        };
        OrderedSpace::new(space, order).map_err(|source| InstanceError::Field {
            field: "order_basis",
            source,
        })
    }

    /// Hex SHA-256 of the compact JSON serialization (keys sorted), so the
    /// digest ignores whitespace and key order in the source file.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("instance serializes");
        let text = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
