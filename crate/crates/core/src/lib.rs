//! Cost-aware sequential feature acquisition.
//!
//! The crate models feature acquisition as an episodic decision process over
//! a single sample: start with nothing observed, buy one feature at a time
//! until everything is observed, and collect a reward that trades classifier
//! confidence against the normalized cost already spent. On top of that
//! process it provides:
//!
//! - [`so_mcts`]: UCT search with scalar rewards, in standalone and
//!   integrated (policy-network-in-the-loop) variants.
//! - [`mo_mcts`]: UCT search over two-dimensional rewards
//!   (negative normalized cost, class probability) scalarized through the
//!   hypervolume of a maintained Pareto front.
//! - [`harness`]: baseline policies, DQN, F1-versus-cost curves and their
//!   area under the curve.
//!
//! Everything random is driven by [`rng::derive_seed`] so that a run is a pure
//! function of its configuration.

pub mod checkpoint;
pub mod classifier;
pub mod datamodel;
pub mod environment;
pub mod error;
pub mod feature_set;
pub mod harness;
pub mod mo_mcts;
pub mod nn;
pub mod policy_net;
pub mod rng;
pub mod so_mcts;
pub mod tree;
pub mod visit_log;

pub use classifier::{
    ClassifierConfig, ClassifierKind, ClassifierModel, ClassifierStrategy, Encoder, ImputePolicy, ImputeShape,
    StrategyKind,
};
pub use datamodel::{Dataset, FeatureKind, FeatureSchema, FeatureSpec, SplitPlan};
pub use environment::{
    AcquisitionState, AdaptiveModel, Environment, Episode, FnModel, ProbabilityModel, RewardTarget, StepOutcome,
};
pub use error::{Error, Result};
pub use feature_set::FeatureSet;
pub use mo_mcts::{HvConfig, MoConfig, ParetoFront};
pub use nn::NetworkSpec;
pub use policy_net::{PolicyNetwork, PolicyTrainConfig};
pub use so_mcts::{IntegratedConfig, SearchConfig, StandaloneConfig};
