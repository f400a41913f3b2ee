use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use mctsfa_core::harness::{
    aggregate_f1_curve, curve_grid, evaluate_policy, f1_auc, full_information_auc, integer_grid, read_trajectories,
    summarize_runs, write_curve, write_trajectories, AcquisitionPolicy, AcquisitionTrajectory, DqnPolicy, F1Curve,
    GreedyCheapest, RandomPolicy, RunSummary, TracePolicy,
};
use mctsfa_core::rng::{derive_seed, Purpose};
use mctsfa_core::{ClassifierStrategy, Dataset, PolicyNetwork};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Algorithm;
use crate::plot::{chart, Axes, Series, Style};
use crate::record::{write_json, OpenRecord, RunEntry, CLASSIFIER_FILE, DQN_FILE, POLICY_FILE};
use crate::{CliError, CliResult};

pub const EVAL_DIR: &str = "eval";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const RUNS_CSV: &str = "runs.csv";
pub const CURVE_CSV: &str = "curve.csv";
pub const CURVE_SVG: &str = "curve.svg";
pub const TRAJECTORIES_CSV: &str = "trajectories.csv";

#[derive(Debug, Clone, Default)]
pub struct EvaluateOptions {
    pub plot: bool,
    /// Replay acquisition orders from this trajectory file instead of the
    /// record's policy.
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvaluation {
    pub split: usize,
    pub seed: u64,
    pub auc: f64,
    /// AUC with every feature known at every cost.
    pub full_information_auc: f64,
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSummary {
    pub name: String,
    pub algorithm: String,
    pub classifier: String,
    pub strategy: String,
    pub policy: String,
    pub runs: Vec<RunEvaluation>,
    pub summary: RunSummary,
}

#[derive(Debug, Serialize)]
struct SummaryRow<'a> {
    name: &'a str,
    algorithm: &'a str,
    classifier: &'a str,
    strategy: &'a str,
    policy: &'a str,
    runs: usize,
    mean_auc: f64,
    max_auc: f64,
    baseline_auc: f64,
    mean_percent: f64,
    max_percent: f64,
}

#[derive(Debug, Serialize)]
struct RunRow {
    split: usize,
    seed: u64,
    auc: f64,
    full_information_auc: f64,
    percent: f64,
}

/// Value of a step curve at `cost`: the last point at or below it, or the
/// first point's value before the curve starts.
pub fn curve_value_at(curve: &F1Curve, cost: f64) -> f64 {
    let n = curve.points.partition_point(|&(c, _)| c <= cost + 1e-9);
    curve.points[n.saturating_sub(1)].1
}

fn make_policy(
    record: &OpenRecord,
    entry: &RunEntry,
    dataset: &Dataset,
    trace: Option<&TracePolicy>,
) -> CliResult<Box<dyn AcquisitionPolicy>> {
    if let Some(t) = trace {
        return Ok(Box::new(t.clone()));
    }
    let dir = record.run_dir(entry);
    let schema_hash = dataset.schema.hash();
    let d = dataset.schema.feature_count();
    let policy: Box<dyn AcquisitionPolicy> = match record.config.algorithm {
        Algorithm::SoStandalone | Algorithm::SoIntegrated | Algorithm::MoIntegrated => {
            let path = dir.join(POLICY_FILE);
            let net =
                PolicyNetwork::load(&path, &schema_hash).with_context(|| format!("loading {}", path.display()))?;
            Box::new(OwnedNetwork(net))
        }
        Algorithm::Dqn => {
            let path = dir.join(DQN_FILE);
            let net = DqnPolicy::load(&path, &schema_hash).with_context(|| format!("loading {}", path.display()))?;
            Box::new(OwnedDqn(net))
        }
        Algorithm::Random => Box::new(RandomPolicy::new(derive_seed(entry.run_seed, Purpose::Evaluation, &[]), d)),
        Algorithm::Greedy => Box::new(GreedyCheapest::new(dataset)),
    };
    Ok(policy)
}

struct OwnedNetwork(PolicyNetwork);

impl AcquisitionPolicy for OwnedNetwork {
    fn choose(&mut self, state: &mctsfa_core::AcquisitionState) -> mctsfa_core::Result<usize> {
        self.0.action(state)
    }
}

struct OwnedDqn(DqnPolicy);

impl AcquisitionPolicy for OwnedDqn {
    fn choose(&mut self, state: &mctsfa_core::AcquisitionState) -> mctsfa_core::Result<usize> {
        self.0.action(state)
    }
}

struct RunOutput {
    evaluation: RunEvaluation,
    curve: F1Curve,
}

fn evaluate_run(
    record: &OpenRecord,
    entry: &RunEntry,
    dataset: &Arc<Dataset>,
    trace: Option<&TracePolicy>,
    out_dir: &Path,
    plot: bool,
) -> CliResult<RunOutput> {
    let partition = record.partition(entry)?;
    let classifier_path = record.run_dir(entry).join(CLASSIFIER_FILE);
    let strategy = ClassifierStrategy::load(&classifier_path, Arc::clone(dataset), partition.train.clone())
        .with_context(|| format!("loading {}", classifier_path.display()))?;
    let mut policy = make_policy(record, entry, dataset, trace)?;
    let trajectories = evaluate_policy(policy.as_mut(), dataset, &partition.test, &strategy)?;

    let total = dataset.schema.total_cost();
    let grid = curve_grid(&trajectories, total, record.config.evaluation.curve_start);
    let fallback = dataset.majority_class(&partition.train);
    let class_count = dataset.schema.class_count;
    let curve = aggregate_f1_curve(&trajectories, &grid, total, class_count, fallback)?;
    let auc = f1_auc(&curve)?;
    let full = full_information_auc(&trajectories, class_count)?;

    let dir = out_dir.join(&entry.dir);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_trajectories(dir.join(TRAJECTORIES_CSV), &trajectories)?;
    write_curve(dir.join(CURVE_CSV), &curve)?;
    if plot {
        write_curve_svg(&dir.join(CURVE_SVG), &format!("{} {}", record.record.name, entry.dir), &curve)?;
    }
    Ok(RunOutput {
        evaluation: RunEvaluation { split: entry.split, seed: entry.seed, auc, full_information_auc: full },
        curve,
    })
}

fn write_curve_svg(path: &Path, title: &str, curve: &F1Curve) -> anyhow::Result<()> {
    let series =
        Series { label: "F1".into(), points: curve.points.iter().map(|&(c, f)| (c / curve.total_cost, f)).collect() };
    let svg = chart(title, "normalized cost", "F1", Axes { x: (0.0, 1.0), y: (0.0, 1.0) }, Style::Step, &[series]);
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

/// Name of the evaluation directory inside a record.
pub fn eval_dir_name(trace: Option<&Path>) -> String {
    match trace.and_then(|t| t.file_stem()) {
        Some(stem) => format!("{EVAL_DIR}-trace-{}", stem.to_string_lossy()),
        None => EVAL_DIR.to_string(),
    }
}

/// Rolls out every run's policy on its test split and writes trajectories,
/// curves and the summary; returns the evaluation directory.
pub fn cmd_evaluate(record_dir: &Path, options: &EvaluateOptions) -> CliResult<(PathBuf, EvaluationSummary)> {
    let record = OpenRecord::open(record_dir)?;
    let trace = match &options.trace {
        Some(path) => {
            let ts: Vec<AcquisitionTrajectory> =
                read_trajectories(path).map_err(|e| CliError::Usage(format!("bad trace {}: {e}", path.display())))?;
            Some(TracePolicy::from_trajectories(&ts))
        }
        None => None,
    };
    let dataset = Arc::new(record.load_dataset()?);
    let out_dir = record.dir.join(eval_dir_name(options.trace.as_deref()));
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let outputs = record
        .record
        .runs
        .par_iter()
        .map(|entry| evaluate_run(&record, entry, &dataset, trace.as_ref(), &out_dir, options.plot))
        .collect::<CliResult<Vec<_>>>()?;

    let aucs: Vec<f64> = outputs.iter().map(|o| o.evaluation.auc).collect();
    let baseline = outputs.iter().map(|o| o.evaluation.full_information_auc).sum::<f64>() / outputs.len() as f64;
    let summary = summarize_runs(&aucs, baseline)?;

    let total = dataset.schema.total_cost();
    let grid = integer_grid(total);
    let mean = F1Curve {
        points: grid
            .iter()
            .map(|&g| {
                let v = outputs.iter().map(|o| curve_value_at(&o.curve, g)).sum::<f64>() / outputs.len() as f64;
                (g, v)
            })
            .collect(),
        total_cost: total,
    };
    write_curve(out_dir.join(CURVE_CSV), &mean)?;
    if options.plot {
        write_curve_svg(&out_dir.join(CURVE_SVG), &format!("{} mean F1", record.record.name), &mean)?;
    }

    let config = &record.config;
    let classifier = serde_json::to_value(config.classifier.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    let strategy = serde_json::to_value(config.strategy)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_default();
    let policy = match &options.trace {
        Some(p) => format!("trace:{}", p.display()),
        None => config.algorithm.as_str().to_string(),
    };
    let evaluation = EvaluationSummary {
        name: record.record.name.clone(),
        algorithm: config.algorithm.as_str().to_string(),
        classifier,
        strategy,
        policy,
        runs: outputs.iter().map(|o| o.evaluation.clone()).collect(),
        summary,
    };
    write_json(&out_dir.join(SUMMARY_JSON), &evaluation)?;
    write_summary_csv(&out_dir, &evaluation)?;
    Ok((out_dir, evaluation))
}

fn write_summary_csv(dir: &Path, e: &EvaluationSummary) -> anyhow::Result<()> {
    let path = dir.join(SUMMARY_CSV);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    let s = &e.summary;
    w.serialize(SummaryRow {
        name: &e.name,
        algorithm: &e.algorithm,
        classifier: &e.classifier,
        strategy: &e.strategy,
        policy: &e.policy,
        runs: s.runs,
        mean_auc: s.mean_auc,
        max_auc: s.max_auc,
        baseline_auc: s.baseline_auc,
        mean_percent: s.mean_percent,
        max_percent: s.max_percent,
    })?;
    w.flush()?;

    let path = dir.join(RUNS_CSV);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    for r in &e.runs {
        w.serialize(RunRow {
            split: r.split,
            seed: r.seed,
            auc: r.auc,
            full_information_auc: r.full_information_auc,
            percent: if r.full_information_auc > 0.0 { 100.0 * r.auc / r.full_information_auc } else { f64::NAN },
        })?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_lookup() {
        let c = F1Curve { points: vec![(1.0, 0.2), (3.0, 0.6), (4.0, 1.0)], total_cost: 4.0 };
        assert_eq!(curve_value_at(&c, 0.0), 0.2);
        assert_eq!(curve_value_at(&c, 2.9), 0.2);
        assert_eq!(curve_value_at(&c, 3.0), 0.6);
        assert_eq!(curve_value_at(&c, 9.0), 1.0);
    }

    #[test]
    fn trace_directories_are_separate() {
        assert_eq!(eval_dir_name(None), "eval");
        assert_eq!(eval_dir_name(Some(Path::new("/x/ppo.csv"))), "eval-trace-ppo");
    }
}
