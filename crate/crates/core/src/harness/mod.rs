//! Evaluation: baseline policies, DQN, F1-versus-cost curves and run
//! summaries.

mod dqn;
mod io;
mod metrics;
mod policy;

pub use dqn::{dqn_train, DqnConfig, DqnPolicy, DqnReport};
pub use io::{read_curve, read_trajectories, write_curve, write_trajectories};
pub use metrics::{
    aggregate_f1_curve, curve_grid, f1_auc, f1_score, full_information_auc, integer_grid, summarize_runs, CurveStart,
    F1Curve, RunSummary,
};
pub use policy::{
    evaluate_policy, rollout_policy, AcquisitionPolicy, AcquisitionTrajectory, GreedyCheapest, RandomPolicy,
    TracePolicy, TrajectoryStep,
};
