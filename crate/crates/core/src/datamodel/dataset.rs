use std::path::Path;

use serde::{Deserialize, Serialize};

use super::block::block_featurize_flat;
use super::schema::{FeatureKind, FeatureSchema};
use crate::error::{Error, Result};

/// Name of the class label column in data files.
pub const LABEL_COLUMN: &str = "label";

/// Immutable collection of fully observed samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub schema: FeatureSchema,
    values: Vec<Vec<f64>>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset, checking every sample against the schema.
    pub fn new(
        name: impl Into<String>,
        schema: FeatureSchema,
        values: Vec<Vec<f64>>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        if values.len() != labels.len() {
            return Err(Error::Dimension { expected: values.len(), actual: labels.len() });
        }
        let name = name.into();
        for (row, (v, &y)) in values.iter().zip(&labels).enumerate() {
            validate_sample(&schema, v, y).map_err(|(column, message)| Error::Load {
                path: name.clone().into(),
                row,
                column,
                message,
            })?;
        }
        Ok(Dataset { name, schema, values, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn values(&self, sample: usize) -> &[f64] {
        &self.values[sample]
    }

    pub fn label(&self, sample: usize) -> usize {
        self.labels[sample]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Raw values of one feature of one sample.
    pub fn feature_values(&self, sample: usize, feature: usize) -> &[f64] {
        &self.values[sample][self.schema.value_range(feature)]
    }

    /// Most frequent label among `indices`; ties go to the lower class.
    pub fn majority_class(&self, indices: &[usize]) -> usize {
        let mut counts = vec![0usize; self.schema.class_count];
        for &i in indices {
            counts[self.labels[i]] += 1;
        }
        let mut best = 0;
        for (class, &count) in counts.iter().enumerate() {
            if count > counts[best] {
                best = class;
            }
        }
        best
    }

    /// Per-feature maximum absolute raw value over `indices` (1.0 when zero).
    pub fn feature_maxima(&self, indices: &[usize]) -> Vec<f64> {
        (0..self.schema.feature_count())
            .map(|f| {
                let m = indices
                    .iter()
                    .flat_map(|&i| self.feature_values(i, f).iter())
                    .fold(0.0f64, |acc, v| acc.max(v.abs()));
                if m > 0.0 {
                    m
                } else {
                    1.0
                }
            })
            .collect()
    }
}

fn validate_sample(schema: &FeatureSchema, values: &[f64], label: usize) -> std::result::Result<(), (String, String)> {
    if values.len() != schema.value_len() {
        return Err(("*".into(), format!("expected {} values, found {}", schema.value_len(), values.len())));
    }
    if label >= schema.class_count {
        return Err((LABEL_COLUMN.into(), format!("label {label} outside [0, {})", schema.class_count)));
    }
    for (i, f) in schema.features.iter().enumerate() {
        for &v in &values[schema.value_range(i)] {
            if !v.is_finite() {
                return Err((f.name.clone(), format!("non-finite value {v}")));
            }
            if v < 0.0 {
                return Err((f.name.clone(), format!("negative value {v}")));
            }
            if let FeatureKind::Categorical { cardinality } = f.kind {
                if v.fract() != 0.0 || v as usize >= cardinality {
                    return Err((f.name.clone(), format!("category {v} outside [0, {cardinality})")));
                }
            }
        }
    }
    Ok(())
}

/// Loads a CSV data file against a TOML schema.
///
/// The CSV has a header row and a `label` column. Tabular features are read
/// from columns with the feature name; block features without an image layout
/// from `<name>_<j>` columns. Schemas with an image layout read every
/// non-label column, in order, as row-major pixels and cut them into blocks.
pub fn load_dataset(data_path: impl AsRef<Path>, schema_path: impl AsRef<Path>) -> Result<Dataset> {
    let schema = FeatureSchema::from_path(schema_path)?;
    load_with_schema(data_path, schema)
}

pub fn load_with_schema(data_path: impl AsRef<Path>, schema: FeatureSchema) -> Result<Dataset> {
    let path = data_path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path).map_err(|e| {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::Csv(e),
        }
    })?;
    let headers = reader.headers()?.clone();
    let find = |column: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == column)
            .ok_or_else(|| Error::MissingColumn { path: path.into(), column: column.into() })
    };
    let label_col = find(LABEL_COLUMN)?;

    // Column index for every raw value slot.
    let columns: Vec<usize> = match schema.image {
        Some(layout) => {
            let cols: Vec<usize> = (0..headers.len()).filter(|&c| c != label_col).collect();
            if cols.len() != layout.side * layout.side {
                return Err(Error::Load {
                    path: path.into(),
                    row: 0,
                    column: "*".into(),
                    message: format!(
                        "image layout needs {} pixel columns, found {}",
                        layout.side * layout.side,
                        cols.len()
                    ),
                });
            }
            cols
        }
        None => {
            let mut cols = Vec::with_capacity(schema.value_len());
            for f in &schema.features {
                match f.kind {
                    FeatureKind::Block { pixel_count } => {
                        for j in 0..pixel_count {
                            cols.push(find(&format!("{}_{j}", f.name))?);
                        }
                    }
                    _ => cols.push(find(&f.name)?),
                }
            }
            cols
        }
    };

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |col: usize| -> Result<f64> {
            let text = record.get(col).unwrap_or("");
            text.parse::<f64>().map_err(|_| Error::Load {
                path: path.into(),
                row,
                column: headers.get(col).unwrap_or("?").to_string(),
                message: format!("non-numeric cell `{text}`"),
            })
        };
        let label_value = cell(label_col)?;
        if label_value < 0.0 || label_value.fract() != 0.0 {
            return Err(Error::Load {
                path: path.into(),
                row,
                column: LABEL_COLUMN.into(),
                message: format!("label `{label_value}` is not a class index"),
            });
        }
        let raw: Vec<f64> = columns.iter().map(|&c| cell(c)).collect::<Result<_>>()?;
        let sample = match schema.image {
            Some(layout) => block_featurize_flat(&raw, layout.side, layout.block_side)?,
            None => raw,
        };
        validate_sample(&schema, &sample, label_value as usize).map_err(|(column, message)| Error::Load {
            path: path.into(),
            row,
            column,
            message,
        })?;
        values.push(sample);
        labels.push(label_value as usize);
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(Dataset { name, schema, values, labels })
}
