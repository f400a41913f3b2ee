use serde::{Deserialize, Serialize};

use super::policy::AcquisitionTrajectory;
use crate::error::{Error, Result};

/// F1 of `predicted` against `truth`. Two classes: F1 of class 1. More
/// classes: unweighted mean over the classes occurring in either list. A class
/// never predicted and never present scores 1.
pub fn f1_score(truth: &[usize], predicted: &[usize], class_count: usize) -> f64 {
    let per_class = |c: usize| {
        let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t == c, p == c) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => {}
            }
        }
        if tp + fp + fn_ == 0 {
            1.0
        } else {
            2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
        }
    };
    if class_count <= 2 {
        return per_class(1);
    }
    let present: Vec<usize> = (0..class_count).filter(|&c| truth.contains(&c) || predicted.contains(&c)).collect();
    if present.is_empty() {
        return 1.0;
    }
    present.iter().map(|&c| per_class(c)).sum::<f64>() / present.len() as f64
}

/// Where the evaluation grid starts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveStart {
    /// Cost 0, where every sample falls back to the majority class.
    #[default]
    Zero,
    /// The cheapest acquisition cost seen in any trajectory.
    FirstAcquisition,
}

/// The integers `0, 1, …, floor(total)`, plus `total` when it is fractional.
pub fn integer_grid(total_cost: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=total_cost.floor() as usize).map(|c| c as f64).collect();
    if total_cost.fract() > 0.0 {
        grid.push(total_cost);
    }
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct F1Curve {
    /// `(cost, f1)` with strictly increasing costs.
    pub points: Vec<(f64, f64)>,
    pub total_cost: f64,
}

/// F1 across all trajectories at each grid cost, each sample contributing its
/// prediction at the largest visited cost not above the grid point, or
/// `fallback` before its first acquisition.
pub fn aggregate_f1_curve(
    trajectories: &[AcquisitionTrajectory],
    grid: &[f64],
    total_cost: f64,
    class_count: usize,
    fallback: usize,
) -> Result<F1Curve> {
    if trajectories.is_empty() {
        return Err(Error::Empty("test trajectories"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("cost grid must be strictly increasing".into()));
    }
    let truth: Vec<usize> = trajectories.iter().map(|t| t.label).collect();
    let points = grid
        .iter()
        .map(|&g| {
            let predicted: Vec<usize> = trajectories.iter().map(|t| t.prediction_at(g).unwrap_or(fallback)).collect();
            (g, f1_score(&truth, &predicted, class_count))
        })
        .collect();
    Ok(F1Curve { points, total_cost })
}

/// Grid for `trajectories` according to `start`.
pub fn curve_grid(trajectories: &[AcquisitionTrajectory], total_cost: f64, start: CurveStart) -> Vec<f64> {
    let grid = integer_grid(total_cost);
    match start {
        CurveStart::Zero => grid,
        CurveStart::FirstAcquisition => {
            let first = trajectories
                .iter()
                .filter_map(|t| t.steps.first().map(|s| s.cumulative_cost))
                .fold(total_cost, f64::min);
            let mut out = vec![first];
            out.extend(grid.into_iter().filter(|&g| g > first));
            out
        }
    }
}

/// Area under the step curve over cost normalized by the curve's total cost.
/// Each point's F1 holds until the next point.
pub fn f1_auc(curve: &F1Curve) -> Result<f64> {
    if curve.points.len() < 2 {
        return Err(Error::InvalidArgument("an F1 curve needs at least two points".into()));
    }
    if curve.points.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidArgument("F1 curve costs must be strictly increasing".into()));
    }
    if !(curve.total_cost > 0.0) {
        return Err(Error::InvalidArgument("total cost must be positive".into()));
    }
    Ok(curve.points.windows(2).map(|w| w[0].1 * (w[1].0 - w[0].0) / curve.total_cost).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub runs: usize,
    pub mean_auc: f64,
    pub max_auc: f64,
    /// Full-information F1 AUC the percentages refer to.
    pub baseline_auc: f64,
    pub mean_percent: f64,
    pub max_percent: f64,
}

/// Mean and best run AUC as percentages of `baseline`.
pub fn summarize_runs(aucs: &[f64], baseline: f64) -> Result<RunSummary> {
    if aucs.is_empty() {
        return Err(Error::Empty("run AUCs"));
    }
    if !(baseline > 0.0) {
        return Err(Error::InvalidArgument(format!("baseline AUC must be positive, got {baseline}")));
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let max = aucs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(RunSummary {
        runs: aucs.len(),
        mean_auc: mean,
        max_auc: max,
        baseline_auc: baseline,
        mean_percent: 100.0 * mean / baseline,
        max_percent: 100.0 * max / baseline,
    })
}

/// AUC of a classifier that sees every feature at every cost: the
/// full-information F1 itself.
pub fn full_information_auc(trajectories: &[AcquisitionTrajectory], class_count: usize) -> Result<f64> {
    if trajectories.is_empty() {
        return Err(Error::Empty("test trajectories"));
    }
    let truth: Vec<usize> = trajectories.iter().map(|t| t.label).collect();
    let predicted: Vec<usize> = trajectories
        .iter()
        .map(|t| t.steps.last().map(|s| s.predicted).ok_or(Error::Empty("trajectory steps")))
        .collect::<Result<_>>()?;
    Ok(f1_score(&truth, &predicted, class_count))
}
