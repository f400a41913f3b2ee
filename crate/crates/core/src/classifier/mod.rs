//! Classifiers over partially acquired states.

mod encode;
mod impute;
mod model;
mod strategy;

pub use encode::{Encoder, InputLayout};
pub use impute::{ImputePolicy, ImputeShape};
pub use model::{train_classifier, ClassifierConfig, ClassifierKind, ClassifierModel};
pub use strategy::{ClassifierStrategy, StrategyKind, StrategySnapshot};
