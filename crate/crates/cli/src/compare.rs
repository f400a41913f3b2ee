use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::evaluate::{eval_dir_name, EvaluationSummary, SUMMARY_JSON};
use crate::record::read_json;
use crate::{CliError, CliResult};

#[derive(Debug, Serialize)]
struct CompareRow<'a> {
    record: String,
    name: &'a str,
    algorithm: &'a str,
    classifier: &'a str,
    strategy: &'a str,
    runs: usize,
    mean_auc: f64,
    max_auc: f64,
    mean_percent: f64,
    max_percent: f64,
}

/// Loads the evaluation summaries of several records.
pub fn load_summaries(records: &[PathBuf]) -> CliResult<Vec<(PathBuf, EvaluationSummary)>> {
    if records.is_empty() {
        return Err(CliError::Usage("compare needs at least one record".into()));
    }
    records
        .iter()
        .map(|dir| {
            let path = dir.join(eval_dir_name(None)).join(SUMMARY_JSON);
            if !path.is_file() {
                return Err(CliError::Usage(format!(
                    "{} has no evaluation yet; run `mctsfa evaluate` first",
                    dir.display()
                )));
            }
            Ok((dir.clone(), read_json(&path)?))
        })
        .collect()
}

/// Plain-text table, one row per record in the given order.
pub fn render_table(rows: &[(PathBuf, EvaluationSummary)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:<14} {:<4} {:<9} {:>4} {:>9} {:>9} {:>7} {:>7}",
        "name", "algorithm", "clf", "strategy", "runs", "mean_auc", "max_auc", "mean%", "max%"
    );
    for (_, e) in rows {
        let s = &e.summary;
        let _ = writeln!(
            out,
            "{:<28} {:<14} {:<4} {:<9} {:>4} {:>9.4} {:>9.4} {:>7.1} {:>7.1}",
            e.name, e.algorithm, e.classifier, e.strategy, s.runs, s.mean_auc, s.max_auc, s.mean_percent, s.max_percent
        );
    }
    out
}

pub fn write_compare_csv(path: &Path, rows: &[(PathBuf, EvaluationSummary)]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    for (dir, e) in rows {
        let s = &e.summary;
        w.serialize(CompareRow {
            record: dir.display().to_string(),
            name: &e.name,
            algorithm: &e.algorithm,
            classifier: &e.classifier,
            strategy: &e.strategy,
            runs: s.runs,
            mean_auc: s.mean_auc,
            max_auc: s.max_auc,
            mean_percent: s.mean_percent,
            max_percent: s.max_percent,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_compare(records: &[PathBuf], csv_out: Option<&Path>) -> CliResult<String> {
    let rows = load_summaries(records)?;
    if let Some(path) = csv_out {
        write_compare_csv(path, &rows)?;
    }
    Ok(render_table(&rows))
}
