use serde::{Deserialize, Serialize};

use super::impute::ImputePolicy;
use crate::datamodel::{FeatureKind, FeatureSchema};
use crate::environment::AcquisitionState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputLayout {
    /// Features in schema order.
    #[default]
    Features,
    /// Block features reassembled into the row-major image.
    Image,
}

/// Turns acquisition states into model inputs.
///
/// - categorical features: one-hot over `cardinality + 1` slots, the last
///   slot marking "unacquired";
/// - continuous features: the value divided by its scale, or the impute
///   value at the state's cumulative cost when unacquired;
/// - block features: pixel values divided by the scale, zero when unacquired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub schema: FeatureSchema,
    pub impute: ImputePolicy,
    /// Per-feature divisor for continuous and block values.
    pub scales: Vec<f64>,
    pub layout: InputLayout,
}

impl Encoder {
    pub fn new(schema: FeatureSchema, impute: ImputePolicy) -> Self {
        let scales = vec![1.0; schema.feature_count()];
        Encoder { schema, impute, scales, layout: InputLayout::Features }
    }

    pub fn with_scales(mut self, scales: Vec<f64>) -> Result<Self> {
        if scales.len() != self.schema.feature_count() {
            return Err(Error::Dimension { expected: self.schema.feature_count(), actual: scales.len() });
        }
        if scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidArgument("scales must be positive".into()));
        }
        self.scales = scales;
        Ok(self)
    }

    pub fn with_layout(mut self, layout: InputLayout) -> Result<Self> {
        if layout == InputLayout::Image && self.schema.image.is_none() {
            return Err(Error::InvalidArgument("image input layout needs a schema with an image layout".into()));
        }
        self.layout = layout;
        Ok(self)
    }

    pub fn input_len(&self) -> usize {
        match self.layout {
            InputLayout::Image => self.schema.value_len(),
            InputLayout::Features => self
                .schema
                .features
                .iter()
                .map(|f| match f.kind {
                    FeatureKind::Categorical { cardinality } => cardinality + 1,
                    FeatureKind::Continuous => 1,
                    FeatureKind::Block { pixel_count } => pixel_count,
                })
                .sum(),
        }
    }

    pub fn encode(&self, state: &AcquisitionState) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.input_len());
        let acquired = state.acquired();
        let values = state.values();
        let fill = self.impute.evaluate(state.cumulative_cost());
        for (i, f) in self.schema.features.iter().enumerate() {
            let range = self.schema.value_range(i);
            let have = acquired.contains(i);
            match f.kind {
                FeatureKind::Categorical { cardinality } => {
                    let hot = if have { values[range.start] as usize } else { cardinality };
                    out.extend((0..=cardinality).map(|k| if k == hot { 1.0 } else { 0.0 }));
                }
                FeatureKind::Continuous => {
                    out.push(if have { values[range.start] / self.scales[i] } else { fill });
                }
                FeatureKind::Block { .. } => {
                    if have {
                        out.extend(values[range].iter().map(|v| v / self.scales[i]));
                    } else {
                        out.extend(range.map(|_| 0.0));
                    }
                }
            }
        }
        if self.layout == InputLayout::Image {
            let layout = self.schema.image.expect("checked in with_layout");
            let mut image = vec![0.0; out.len()];
            crate::datamodel::unblock_into(&out, layout, &mut image);
            return image;
        }
        out
    }
}
