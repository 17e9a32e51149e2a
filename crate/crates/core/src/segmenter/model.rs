use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{SegmenterConfig, SegmenterError};

/// Format tag written into every model file.
pub const MODEL_VERSION: &str = "simulpipe-segmenter/logreg-heads-v1";

/// Logistic boundary classifiers over [`super::extract_features`] features,
/// one weight map ("head") per shift `0..=max_delay`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmenterModel {
    pub version: String,
    pub config: SegmenterConfig,
    pub heads: Vec<BTreeMap<String, f64>>,
}

impl SegmenterModel {
    /// All-zero model: every score is 0.5.
    pub fn untrained(config: SegmenterConfig) -> Self {
        SegmenterModel {
            version: MODEL_VERSION.to_string(),
            config,
            heads: vec![BTreeMap::new(); config.max_delay + 1],
        }
    }

    /// Weight map for `shift`, `None` beyond the delay budget.
    pub fn head(&self, shift: usize) -> Option<&BTreeMap<String, f64>> {
        self.heads.get(shift)
    }

    pub fn head_mut(&mut self, shift: usize) -> &mut BTreeMap<String, f64> {
        &mut self.heads[shift]
    }

    pub fn is_zero(&self) -> bool {
        self.heads.iter().all(BTreeMap::is_empty)
    }

    pub fn margin<S: AsRef<str>>(&self, shift: usize, features: &[S]) -> f64 {
        let Some(w) = self.head(shift) else { return 0.0 };
        features.iter().filter_map(|f| w.get(f.as_ref())).sum()
    }

    pub fn score<S: AsRef<str>>(&self, shift: usize, features: &[S]) -> f64 {
        sigmoid(self.margin(shift, features))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, SegmenterError> {
        #[derive(Deserialize)]
        struct Header {
            version: String,
        }
        let header: Header = serde_json::from_str(text).map_err(|e| SegmenterError::Io(e.to_string()))?;
        if header.version != MODEL_VERSION {
            return Err(SegmenterError::VersionMismatch {
                expected: MODEL_VERSION.to_string(),
                found: header.version,
            });
        }
        let model: SegmenterModel = serde_json::from_str(text).map_err(|e| SegmenterError::Io(e.to_string()))?;
        model.config.validate()?;
        if model.heads.len() != model.config.max_delay + 1 {
            return Err(SegmenterError::InvalidConfig(format!(
                "{} heads for max_delay {}",
                model.heads.len(),
                model.config.max_delay
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), SegmenterError> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| SegmenterError::Io(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, SegmenterError> {
        let text = std::fs::read_to_string(path).map_err(|e| SegmenterError::Io(format!("{}: {e}", path.display())))?;
        SegmenterModel::from_json(&text)
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
