//! The JSON scenario-file format and its conversion into core field types.
//!
//! A scenario file carries one field family plus optional named points and
//! invariant expressions:
//!
//! ```json
//! {
//!   "dim": 3,
//!   "fields": [
//!     {"matrix": [[0,1,0],[-1,0,0],[0,0,0]], "offset": [0,0,0]},
//!     {"components": ["0", "0", "1"]}
//!   ],
//!   "points": {"start": [1, 0, 0]},
//!   "invariants": ["x^2 + y^2"]
//! }
//! ```
//!
//! Expression fields whose components turn out affine are converted to the
//! exact affine representation for the family-level operations (closure,
//! classification, orbit sampling); genuinely non-affine fields stay
//! symbolic and support only pointwise checks and numeric flows.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use kvf_core::expr::Expression;
use kvf_core::fields::{AffineField, ExprField, Field, GridSpec};
use kvf_core::lie::FieldFamily;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Affine {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    Components {
        components: Vec<String>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub dim: usize,
    pub fields: Vec<FieldSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub points: BTreeMap<String, Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invariants: Vec<String>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<ScenarioFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let file: ScenarioFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        if file.dim == 0 {
            return Err(CliError::Data(format!(
                "{}: dimension must be at least 1",
                path.display()
            )));
        }
        if file.fields.is_empty() {
            return Err(CliError::Data(format!(
                "{}: scenario declares no fields",
                path.display()
            )));
        }
        Ok(file)
    }

    /// Every declared field, in declaration order.
    pub fn fields(&self) -> Result<Vec<Field>, CliError> {
        self.fields
            .iter()
            .enumerate()
            .map(|(index, spec)| build_field(spec, self.dim, index))
            .collect()
    }

    /// The affine forms of all fields (converting affine-looking expression
    /// fields), as required by closure, classification, and orbit sampling.
    pub fn affine_fields(&self) -> Result<Vec<AffineField>, CliError> {
        let grid = GridSpec::default();
        self.fields()?
            .into_iter()
            .enumerate()
            .map(|(index, field)| match field {
                Field::Affine(f) => Ok(f),
                Field::Expr(f) => f
                    .try_to_affine(&grid)
                    .map_err(|e| CliError::Data(format!("field {index}: {e}")))?
                    .ok_or_else(|| {
                        CliError::Data(format!(
                            "field {index} is not affine; this operation needs affine fields"
                        ))
                    }),
            })
            .collect()
    }

    /// The validated Killing family of this file.
    pub fn family(&self) -> Result<FieldFamily, CliError> {
        FieldFamily::new(self.affine_fields()?).map_err(|e| CliError::Data(e.to_string()))
    }

    /// Parse the declared invariant expressions.
    pub fn invariant_expressions(&self) -> Result<Vec<(String, Expression)>, CliError> {
        self.invariants
            .iter()
            .map(|text| {
                Expression::parse(text, self.dim)
                    .map(|e| (text.clone(), e))
                    .map_err(|e| CliError::Data(format!("invariant `{text}`: {e}")))
            })
            .collect()
    }

    /// A named point from the `points` table.
    pub fn point(&self, name: &str) -> Result<DVector<f64>, CliError> {
        let coords = self
            .points
            .get(name)
            .ok_or_else(|| CliError::Data(format!("no point named `{name}`")))?;
        if coords.len() != self.dim {
            return Err(CliError::Data(format!(
                "point `{name}` has {} coordinates, expected {}",
                coords.len(),
                self.dim
            )));
        }
        Ok(DVector::from_column_slice(coords))
    }
}

fn build_field(spec: &FieldSpec, dim: usize, index: usize) -> Result<Field, CliError> {
    match spec {
        FieldSpec::Affine { matrix, offset } => {
            if matrix.len() != dim || matrix.iter().any(|row| row.len() != dim) {
                return Err(CliError::Data(format!(
                    "field {index}: matrix must be {dim}x{dim}"
                )));
            }
            if offset.len() != dim {
                return Err(CliError::Data(format!(
                    "field {index}: offset must have {dim} entries"
                )));
            }
            let a = DMatrix::from_fn(dim, dim, |i, j| matrix[i][j]);
            let b = DVector::from_column_slice(offset);
            AffineField::new(a, b)
                .map(Field::Affine)
                .map_err(|e| CliError::Data(format!("field {index}: {e}")))
        }
        FieldSpec::Components { components } => {
            if components.len() != dim {
                return Err(CliError::Data(format!(
                    "field {index}: expected {dim} components, got {}",
                    components.len()
                )));
            }
            let exprs = components
                .iter()
                .map(|text| {
                    Expression::parse(text, dim).map_err(|e| {
                        CliError::Data(format!("field {index}, component `{text}`: {e}"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            ExprField::new(exprs)
                .map(Field::Expr)
                .map_err(|e| CliError::Data(format!("field {index}: {e}")))
        }
    }
}

/// Parse a comma-separated coordinate list such as `1,0,0.5`.
pub fn parse_point(text: &str, dim: usize) -> Result<DVector<f64>, CliError> {
    let coords = text
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Data(format!("invalid coordinate `{c}`")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if coords.len() != dim {
        return Err(CliError::Data(format!(
            "expected {dim} coordinates, got {}",
            coords.len()
        )));
    }
    Ok(DVector::from_vec(coords))
}
