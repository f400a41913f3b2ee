use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::F1Curve;
use super::policy::{AcquisitionTrajectory, TrajectoryStep};
use crate::error::{Error, Result};
use crate::visit_log::csv_io;

#[derive(Debug, Serialize, Deserialize)]
struct StepRow {
    sample: usize,
    label: usize,
    step: usize,
    action: usize,
    cumulative_cost: f64,
    predicted: usize,
    probability: f64,
}

/// One row per `(sample, step)`, steps numbered from 1.
pub fn write_trajectories(path: impl AsRef<Path>, trajectories: &[AcquisitionTrajectory]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for t in trajectories {
        for (i, s) in t.steps.iter().enumerate() {
            w.serialize(StepRow {
                sample: t.sample,
                label: t.label,
                step: i + 1,
                action: s.action,
                cumulative_cost: s.cumulative_cost,
                predicted: s.predicted,
                probability: s.probability,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads trajectories, also from external tools. Rows may come in any order;
/// steps of a sample must be numbered consecutively from 1.
pub fn read_trajectories(path: impl AsRef<Path>) -> Result<Vec<AcquisitionTrajectory>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut by_sample: BTreeMap<usize, (usize, Vec<(usize, TrajectoryStep)>)> = BTreeMap::new();
    for row in r.deserialize::<StepRow>() {
        let row = row?;
        let entry = by_sample.entry(row.sample).or_insert((row.label, Vec::new()));
        if entry.0 != row.label {
            return Err(Error::InvalidArgument(format!(
                "{}: sample {} has more than one label",
                path.display(),
                row.sample
            )));
        }
        entry.1.push((
            row.step,
            TrajectoryStep {
                action: row.action,
                cumulative_cost: row.cumulative_cost,
                predicted: row.predicted,
                probability: row.probability,
            },
        ));
    }
    by_sample
        .into_iter()
        .map(|(sample, (label, mut steps))| {
            steps.sort_by_key(|(i, _)| *i);
            if steps.iter().enumerate().any(|(k, (i, _))| *i != k + 1) {
                return Err(Error::InvalidArgument(format!(
                    "{}: steps of sample {sample} are not numbered 1..n",
                    path.display()
                )));
            }
            let steps: Vec<TrajectoryStep> = steps.into_iter().map(|(_, s)| s).collect();
            if steps.windows(2).any(|w| w[0].cumulative_cost >= w[1].cumulative_cost) {
                return Err(Error::InvalidArgument(format!(
                    "{}: costs of sample {sample} do not increase",
                    path.display()
                )));
            }
            Ok(AcquisitionTrajectory { sample, label, steps })
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CurveRow {
    cost: f64,
    normalized_cost: f64,
    f1: f64,
}

pub fn write_curve(path: impl AsRef<Path>, curve: &F1Curve) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for &(cost, f1) in &curve.points {
        w.serialize(CurveRow { cost, normalized_cost: cost / curve.total_cost, f1 })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a curve; the total cost is recovered from the first row with a
/// positive normalized cost.
pub fn read_curve(path: impl AsRef<Path>) -> Result<F1Curve> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let rows: Vec<CurveRow> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    let total_cost = rows
        .iter()
        .find(|r| r.normalized_cost > 0.0)
        .map(|r| r.cost / r.normalized_cost)
        .ok_or(Error::Empty("curve rows"))?;
    Ok(F1Curve { points: rows.iter().map(|r| (r.cost, r.f1)).collect(), total_cost })
}
