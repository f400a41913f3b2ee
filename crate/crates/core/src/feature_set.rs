use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of features a schema may declare.
pub const MAX_FEATURES: usize = 128;

/// A set of feature indices, stored as a bitmask.
///
/// Iteration is always in ascending index order, which makes the set its own
/// canonical key.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FeatureSet(u128);

impl FeatureSet {
    pub const fn empty() -> Self {
        FeatureSet(0)
    }

    /// The set `{0, .., count-1}`.
    pub fn full(count: usize) -> Self {
        debug_assert!(count <= MAX_FEATURES);
        if count == MAX_FEATURES {
            FeatureSet(u128::MAX)
        } else {
            FeatureSet((1u128 << count) - 1)
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut set = FeatureSet::empty();
        for i in indices {
            set.insert(i);
        }
        set
    }

    pub fn contains(&self, index: usize) -> bool {
        index < MAX_FEATURES && self.0 & (1u128 << index) != 0
    }

    pub fn insert(&mut self, index: usize) {
        assert!(index < MAX_FEATURES, "feature index {index} exceeds {MAX_FEATURES}");
        self.0 |= 1u128 << index;
    }

    pub fn with(mut self, index: usize) -> Self {
        self.insert(index);
        self
    }

    pub fn remove(&mut self, index: usize) {
        if index < MAX_FEATURES {
            self.0 &= !(1u128 << index);
        }
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn is_subset(&self, other: &FeatureSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn bits(&self) -> u128 {
        self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..MAX_FEATURES).filter(move |&i| bits & (1u128 << i) != 0)
    }

    /// Indices in `0..count` that are not in the set, ascending.
    pub fn missing(&self, count: usize) -> impl Iterator<Item = usize> + '_ {
        (0..count).filter(move |&i| !self.contains(i))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Canonical text key: ascending indices joined by `|` (empty set is "").
    pub fn key(&self) -> String {
        self.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("|")
    }

    pub fn parse_key(key: &str) -> Result<Self> {
        let key = key.trim();
        if key.is_empty() {
            return Ok(FeatureSet::empty());
        }
        let mut set = FeatureSet::empty();
        for part in key.split('|') {
            let index: usize =
                part.parse().map_err(|_| Error::InvalidArgument(format!("bad feature set key `{key}`")))?;
            if index >= MAX_FEATURES {
                return Err(Error::FeatureOutOfRange { index, count: MAX_FEATURES });
            }
            set.insert(index);
        }
        Ok(set)
    }
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key().replace('|', ","))
    }
}
