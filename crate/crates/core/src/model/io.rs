use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::Matrix2D;

use super::{DenseLayer, IncModel, ModelConfig};

pub const MODEL_FORMAT_VERSION: &str = "inkrementa-model-v1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadDoc {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: String,
    config: ModelConfig,
    num_classes: usize,
    hidden: Vec<LayerDoc>,
    head: HeadDoc,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<String>,
}

impl IncModel {
    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDoc {
            version: MODEL_FORMAT_VERSION.to_string(),
            config: self.config.clone(),
            num_classes: self.num_classes(),
            hidden: self
                .hidden
                .iter()
                .map(|l| LayerDoc {
                    rows: l.weights.rows(),
                    cols: l.weights.cols(),
                    weights: l.weights.data().to_vec(),
                    bias: l.bias.clone(),
                })
                .collect(),
            head: HeadDoc {
                rows: self.head.rows(),
                cols: self.head.cols(),
                weights: self.head.data().to_vec(),
            },
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        match probe.version.as_deref() {
            Some(MODEL_FORMAT_VERSION) => {}
            other => {
                return Err(Error::Version {
                    found: other.unwrap_or("<missing>").to_string(),
                    expected: MODEL_FORMAT_VERSION,
                })
            }
        }
        let doc: ModelDoc = serde_json::from_str(text)?;
        let hidden = doc
            .hidden
            .into_iter()
            .map(|l| {
                Ok(DenseLayer {
                    weights: Matrix2D::from_vec(l.rows, l.cols, l.weights)?,
                    bias: l.bias,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let head = Matrix2D::from_vec(doc.head.rows, doc.head.cols, doc.head.weights)?;
        if head.rows() != doc.num_classes {
            return Err(Error::shape(
                format!("num_classes {}", doc.num_classes),
                format!("head with {} rows", head.rows()),
            ));
        }
        IncModel::from_parts(doc.config, hidden, head)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
