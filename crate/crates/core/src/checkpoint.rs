//! Versioned JSON checkpoints shared by classifiers and policy networks.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<T> {
    pub format_version: u32,
    pub kind: String,
    /// [`crate::FeatureSchema::hash`] of the schema the weights were trained on.
    pub schema_hash: String,
    pub payload: T,
}

impl<T: Serialize> Checkpoint<T> {
    pub fn new(kind: impl Into<String>, schema_hash: impl Into<String>, payload: T) -> Self {
        Checkpoint { format_version: FORMAT_VERSION, kind: kind.into(), schema_hash: schema_hash.into(), payload }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

impl<T: DeserializeOwned> Checkpoint<T> {
    /// Loads a checkpoint, checking its version, kind and schema hash.
    pub fn load(path: impl AsRef<Path>, kind: &str, schema_hash: &str) -> Result<T> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint<T> = serde_json::from_str(&text)?;
        if ckpt.format_version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "{}: format version {} unsupported (expected {FORMAT_VERSION})",
                path.display(),
                ckpt.format_version
            )));
        }
        if ckpt.kind != kind {
            return Err(Error::Checkpoint(format!(
                "{}: holds a `{}` checkpoint, expected `{kind}`",
                path.display(),
                ckpt.kind
            )));
        }
        if ckpt.schema_hash != schema_hash {
            return Err(Error::Checkpoint(format!("{}: trained on a different schema", path.display())));
        }
        Ok(ckpt.payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_wrong_schema_and_kind() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        Checkpoint::new("policy", "abc", vec![1.5f64, -0.25]).save(&p).unwrap();
        assert_eq!(Checkpoint::<Vec<f64>>::load(&p, "policy", "abc").unwrap(), vec![1.5, -0.25]);
        assert!(Checkpoint::<Vec<f64>>::load(&p, "policy", "xyz").is_err());
        assert!(Checkpoint::<Vec<f64>>::load(&p, "classifier", "abc").is_err());
    }
}
