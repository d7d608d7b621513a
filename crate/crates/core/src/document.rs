//! JSON model documents.
//!
//! ```json
//! {"kind":"lse","temperature":0.01,"exponents":[[1.0,2.0]],"offsets":[0.5]}
//! {"kind":"gpos","temperature":0.01,"exponents":[[1.0,2.0]],"coefficients":[1.5]}
//! {"kind":"maxaffine","exponents":[[1.0,2.0]],"offsets":[0.5]}
//! ```
//!
//! Floats are written with the shortest representation that parses back to
//! the identical `f64`, so documents round-trip bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{matrix_to_rows, GposModel, LseModel, MaxAffineModel, Model};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelDocument {
    Lse {
        temperature: f64,
        exponents: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
    Gpos {
        temperature: f64,
        exponents: Vec<Vec<f64>>,
        coefficients: Vec<f64>,
    },
    #[serde(rename = "maxaffine")]
    MaxAffine {
        exponents: Vec<Vec<f64>>,
        offsets: Vec<f64>,
    },
}

impl From<&Model> for ModelDocument {
    fn from(model: &Model) -> Self {
        match model {
            Model::Lse(m) => ModelDocument::Lse {
                temperature: m.temperature(),
                exponents: matrix_to_rows(m.exponents()),
                offsets: m.offsets().iter().copied().collect(),
            },
            Model::Gpos(m) => ModelDocument::Gpos {
                temperature: m.temperature(),
                exponents: matrix_to_rows(m.exponents()),
                coefficients: m.coefficients().iter().copied().collect(),
            },
            Model::MaxAffine(m) => ModelDocument::MaxAffine {
                exponents: matrix_to_rows(m.exponents()),
                offsets: m.offsets().iter().copied().collect(),
            },
        }
    }
}

impl TryFrom<ModelDocument> for Model {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        Ok(match doc {
            ModelDocument::Lse {
                temperature,
                exponents,
                offsets,
            } => LseModel::from_rows(temperature, &exponents, &offsets)?.into(),
            ModelDocument::Gpos {
                temperature,
                exponents,
                coefficients,
            } => GposModel::from_rows(temperature, &coefficients, &exponents)?.into(),
            ModelDocument::MaxAffine { exponents, offsets } => {
                MaxAffineModel::from_rows(&exponents, &offsets)?.into()
            }
        })
    }
}

impl Model {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelDocument::from(self))
            .expect("model documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Schema {
            row: None,
            message: format!("model document: {e}"),
        })?;
        Model::try_from(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}
