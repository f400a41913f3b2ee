//! Datasets, feature schemas with acquisition costs, image block features and
//! train/test partitions.

mod block;
mod dataset;
mod schema;
mod split;

pub use block::{block_featurize, block_featurize_flat, image_block_schema, unblock_into};
pub use dataset::{load_dataset, load_with_schema, Dataset, LABEL_COLUMN};
pub use schema::{
    normalized_cost, FeatureKind, FeatureSchema, FeatureSpec, ImageLayout, CATEGORICAL_COST, CONTINUOUS_COST,
    PIXEL_COST,
};
pub use split::{make_splits, Partition, SplitPlan};
