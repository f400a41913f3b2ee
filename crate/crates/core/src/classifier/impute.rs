use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputeShape {
    /// `V·x²`: vertex (a maximum for negative `V`) at zero cost.
    QuadMaxAtZero,
    /// `V·(1 − (1 − x)²)`: vertex (a minimum for negative `V`) at full cost.
    QuadMinAtFull,
    /// `V·x`.
    Linear,
    /// Always zero.
    Constant,
}

/// Value written into unacquired continuous slots as a function of the
/// cumulative cost spent so far (`x = cost / total_cost`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImputePolicy {
    pub shape: ImputeShape,
    pub value_at_full_cost: f64,
    pub total_cost: f64,
}

impl ImputePolicy {
    pub fn new(shape: ImputeShape, value_at_full_cost: f64, total_cost: f64) -> Result<Self> {
        if !(value_at_full_cost <= 0.0 && value_at_full_cost.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "value at full cost must be a finite value <= 0, got {value_at_full_cost}"
            )));
        }
        if !(total_cost > 0.0 && total_cost.is_finite()) {
            return Err(Error::InvalidArgument(format!("total cost must be positive, got {total_cost}")));
        }
        Ok(ImputePolicy { shape, value_at_full_cost, total_cost })
    }

    pub fn constant(total_cost: f64) -> Self {
        ImputePolicy { shape: ImputeShape::Constant, value_at_full_cost: 0.0, total_cost }
    }

    pub fn evaluate(&self, cumulative_cost: f64) -> f64 {
        let x = cumulative_cost / self.total_cost;
        let v = self.value_at_full_cost;
        match self.shape {
            ImputeShape::QuadMaxAtZero => v * x * x,
            ImputeShape::QuadMinAtFull => v * (1.0 - (1.0 - x) * (1.0 - x)),
            ImputeShape::Linear => v * x,
            ImputeShape::Constant => 0.0,
        }
    }
}
