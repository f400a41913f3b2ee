use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub split_count: usize,
    pub seeds: Vec<u64>,
    pub train_fraction: f64,
}

impl Default for SplitPlan {
    /// Four 80/20 splits under three seeds.
    fn default() -> Self {
        SplitPlan { split_count: 4, seeds: vec![0, 1, 2], train_fraction: 0.8 }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if self.split_count == 0 {
            return Err(Error::InvalidArgument("split_count must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidArgument("split plan needs at least one seed".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!("train_fraction {} outside (0, 1)", self.train_fraction)));
        }
        Ok(())
    }
}

/// One train/test partition of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub split: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Random partitions for every (seed, split) pair, seeds outermost.
///
/// Partition indices are sorted; the train side has
/// `round(train_fraction * n)` samples, clamped so that both sides are
/// non-empty.
pub fn make_splits(sample_count: usize, plan: &SplitPlan) -> Result<Vec<Partition>> {
    plan.validate()?;
    if sample_count < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 samples to split, have {sample_count}")));
    }
    let train_len = ((plan.train_fraction * sample_count as f64).round() as usize).clamp(1, sample_count - 1);
    let mut out = Vec::with_capacity(plan.seeds.len() * plan.split_count);
    for &seed in &plan.seeds {
        for split in 0..plan.split_count {
            let mut rng = rng_for(seed, Purpose::Split, &[split as u64]);
            let mut idx: Vec<usize> = (0..sample_count).collect();
            idx.shuffle(&mut rng);
            let mut train = idx[..train_len].to_vec();
            let mut test = idx[train_len..].to_vec();
            train.sort_unstable();
            test.sort_unstable();
            out.push(Partition { split, seed, train, test });
        }
    }
    Ok(out)
}
