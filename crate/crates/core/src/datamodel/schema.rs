use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::feature_set::{FeatureSet, MAX_FEATURES};

/// Acquisition cost of a categorical medical feature.
pub const CATEGORICAL_COST: f64 = 1.0;
/// Acquisition cost of a continuous medical feature.
pub const CONTINUOUS_COST: f64 = 7.0;
/// Acquisition cost per pixel of an image block feature.
pub const PIXEL_COST: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical { cardinality: usize },
    Continuous,
    Block { pixel_count: usize },
}

impl FeatureKind {
    /// Number of raw values the feature occupies in a sample vector.
    pub fn value_width(&self) -> usize {
        match self {
            FeatureKind::Categorical { .. } | FeatureKind::Continuous => 1,
            FeatureKind::Block { pixel_count } => *pixel_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
    pub cost: f64,
}

impl FeatureSpec {
    pub fn categorical(name: impl Into<String>, cardinality: usize) -> Self {
        FeatureSpec { name: name.into(), kind: FeatureKind::Categorical { cardinality }, cost: CATEGORICAL_COST }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        FeatureSpec { name: name.into(), kind: FeatureKind::Continuous, cost: CONTINUOUS_COST }
    }

    pub fn block(name: impl Into<String>, pixel_count: usize) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Block { pixel_count },
            cost: pixel_count as f64 * PIXEL_COST,
        }
    }

    pub fn with_cost(mut self, cost: f64) -> Self {
        self.cost = cost;
        self
    }
}

/// Square image decomposed into square blocks, one feature per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageLayout {
    pub side: usize,
    pub block_side: usize,
}

impl ImageLayout {
    pub fn blocks_per_side(&self) -> usize {
        self.side / self.block_side
    }
}

#[derive(Deserialize)]
struct RawSchema {
    class_count: usize,
    features: Vec<FeatureSpec>,
    #[serde(default)]
    image: Option<ImageLayout>,
}

impl TryFrom<RawSchema> for FeatureSchema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        let schema = FeatureSchema::new(raw.features, raw.class_count)?;
        match raw.image {
            Some(layout) => schema.with_image(layout),
            None => Ok(schema),
        }
    }
}

/// Ordered feature list with costs. Feature `i` is `features[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema")]
pub struct FeatureSchema {
    pub class_count: usize,
    pub features: Vec<FeatureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<ImageLayout>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    total_cost: f64,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>, class_count: usize) -> Result<Self> {
        let mut schema = FeatureSchema { class_count, features, image: None, offsets: Vec::new(), total_cost: 0.0 };
        schema.finish()?;
        Ok(schema)
    }

    pub fn with_image(mut self, layout: ImageLayout) -> Result<Self> {
        self.image = Some(layout);
        self.finish()?;
        Ok(self)
    }

    /// Parses the TOML schema format:
    ///
    /// ```toml
    /// class_count = 2
    /// [[features]]
    /// name = "age"
    /// kind = "continuous"
    /// cost = 7.0
    /// ```
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("schema serializes")
    }

    fn finish(&mut self) -> Result<()> {
        if self.class_count == 0 {
            return Err(Error::Schema("class_count must be positive".into()));
        }
        if self.features.is_empty() {
            return Err(Error::Schema("schema declares no features".into()));
        }
        if self.features.len() > MAX_FEATURES {
            return Err(Error::Schema(format!(
                "{} features exceed the supported maximum of {MAX_FEATURES}",
                self.features.len()
            )));
        }
        let mut names = HashSet::new();
        for f in &self.features {
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
            }
            if !(f.cost.is_finite() && f.cost > 0.0) {
                return Err(Error::Schema(format!("feature `{}` has non-positive cost {}", f.name, f.cost)));
            }
            match f.kind {
                FeatureKind::Categorical { cardinality } if cardinality < 2 => {
                    return Err(Error::Schema(format!("categorical feature `{}` needs cardinality >= 2", f.name)))
                }
                FeatureKind::Block { pixel_count } if pixel_count < 1 => {
                    return Err(Error::Schema(format!("block feature `{}` needs pixel_count >= 1", f.name)))
                }
                _ => {}
            }
        }
        if let Some(layout) = self.image {
            if layout.block_side == 0 || layout.side % layout.block_side != 0 {
                return Err(Error::Schema(format!(
                    "image side {} is not divisible by block side {}",
                    layout.side, layout.block_side
                )));
            }
            let blocks = layout.blocks_per_side() * layout.blocks_per_side();
            let pixels = layout.block_side * layout.block_side;
            let matches = self.features.len() == blocks
                && self.features.iter().all(|f| f.kind == FeatureKind::Block { pixel_count: pixels });
            if !matches {
                return Err(Error::Schema(format!("image layout requires {blocks} block features of {pixels} pixels")));
            }
        }
        let mut offset = 0;
        self.offsets = self
            .features
            .iter()
            .map(|f| {
                let o = offset;
                offset += f.kind.value_width();
                o
            })
            .collect();
        self.offsets.push(offset);
        self.total_cost = self.features.iter().map(|f| f.cost).sum();
        Ok(())
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn cost(&self, index: usize) -> f64 {
        self.features[index].cost
    }

    /// Total width of a raw sample vector.
    pub fn value_len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    /// Range of raw values belonging to feature `index`.
    pub fn value_range(&self, index: usize) -> std::ops::Range<usize> {
        self.offsets[index]..self.offsets[index + 1]
    }

    /// Sum of the costs of `set`, in ascending index order.
    pub fn set_cost(&self, set: &FeatureSet) -> f64 {
        set.iter().map(|i| self.features[i].cost).sum()
    }

    pub fn full_set(&self) -> FeatureSet {
        FeatureSet::full(self.feature_count())
    }

    pub fn is_image(&self) -> bool {
        self.image.is_some()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Hex SHA-256 of the canonical JSON form, embedded in checkpoints.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("schema serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Fraction of the total cost spent on `acquired`.
pub fn normalized_cost(acquired: &FeatureSet, schema: &FeatureSchema) -> f64 {
    schema.set_cost(acquired) / schema.total_cost()
}
