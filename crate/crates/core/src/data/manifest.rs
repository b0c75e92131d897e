use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_csv, Dataset};
use crate::error::{Error, Result};

/// Describes one dataset on disk. A relative `path` is resolved against the
/// directory holding the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub path: PathBuf,
    pub target_columns: Vec<String>,
    pub n_rows: usize,
    pub d_features: usize,
}

impl DatasetManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: Self = serde_json::from_str(&text)?;
        if manifest.path.is_relative() {
            if let Some(dir) = path.parent() {
                manifest.path = dir.join(&manifest.path);
            }
        }
        Ok(manifest)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    /// Loads the CSV and checks it against the declared shape.
    pub fn load(&self) -> Result<Dataset> {
        let data = load_csv(&self.path, &self.target_columns)?;
        if data.len() != self.n_rows || data.n_features() != self.d_features {
            return Err(Error::Config(format!(
                "manifest '{}' declares {} rows x {} features, file has {} x {}",
                self.name,
                self.n_rows,
                self.d_features,
                data.len(),
                data.n_features()
            )));
        }
        Ok(data)
    }
}
