use std::path::{Path, PathBuf};

use anyhow::Context;
use mctsfa_core::mo_mcts::{dominates, read_fronts};
use mctsfa_core::ParetoFront;
use serde::Serialize;

use crate::config::Algorithm;
use crate::plot::{chart, Axes, Series, Style};
use crate::record::{OpenRecord, FRONTS_FILE};
use crate::{CliError, CliResult};

pub const FRONT_DIR: &str = "front";
pub const POINTS_CSV: &str = "points.csv";
pub const MERGED_CSV: &str = "merged.csv";
pub const FRONT_SVG: &str = "front.svg";

#[derive(Debug, Serialize)]
struct PointRow<'a> {
    run: &'a str,
    /// `P` for a sample's front, `M` for the run front.
    set: &'static str,
    sample: Option<usize>,
    r_c: f64,
    r_p: f64,
}

#[derive(Debug, Serialize)]
struct MergedRow {
    r_c: f64,
    r_p: f64,
}

/// Writes the objective-space points of every run's sample fronts `P` and run
/// front `M`, plus the front merged over all runs.
pub fn cmd_front(record_dir: &Path, plot: bool) -> CliResult<(PathBuf, ParetoFront)> {
    let record = OpenRecord::open(record_dir)?;
    if record.config.algorithm != Algorithm::MoIntegrated {
        return Err(CliError::Usage(format!(
            "{} is a {} run; Pareto fronts exist only for mo-integrated runs",
            record_dir.display(),
            record.config.algorithm.as_str()
        )));
    }
    let out_dir = record.dir.join(FRONT_DIR);
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let points_path = out_dir.join(POINTS_CSV);
    let mut w = csv::Writer::from_path(&points_path).with_context(|| format!("writing {}", points_path.display()))?;
    let mut merged = ParetoFront::new();
    let mut sample_points = Vec::new();
    for entry in &record.record.runs {
        let (samples, run_front) = read_fronts(record.run_dir(entry).join(FRONTS_FILE))?;
        if run_front.is_empty() {
            return Err(CliError::Runtime(anyhow::anyhow!("run {} has an empty front M", entry.dir)));
        }
        let pts = run_front.points();
        if pts.iter().any(|&a| pts.iter().any(|&b| dominates(a, b))) {
            return Err(CliError::Runtime(anyhow::anyhow!("run {} has a dominated point in M", entry.dir)));
        }
        for (sample, front) in &samples {
            for &(r_c, r_p) in front.points() {
                w.serialize(PointRow { run: &entry.dir, set: "P", sample: Some(*sample), r_c, r_p })
                    .context("writing front point")?;
                sample_points.push((r_c, r_p));
            }
        }
        for &(r_c, r_p) in pts {
            w.serialize(PointRow { run: &entry.dir, set: "M", sample: None, r_c, r_p })
                .context("writing front point")?;
        }
        merged.merge(&run_front);
    }
    w.flush().context("flushing front points")?;

    let merged_path = out_dir.join(MERGED_CSV);
    let mut w = csv::Writer::from_path(&merged_path).with_context(|| format!("writing {}", merged_path.display()))?;
    for &(r_c, r_p) in merged.points() {
        w.serialize(MergedRow { r_c, r_p }).context("writing front point")?;
    }
    w.flush().context("flushing merged front")?;

    if plot {
        let series = [
            Series { label: "P (samples)".into(), points: sample_points },
            Series { label: "M (merged)".into(), points: merged.points().to_vec() },
        ];
        let svg = chart(
            &format!("{} fronts", record.record.name),
            "r_c (negative normalized cost)",
            "r_p (probability)",
            Axes { x: (-1.0, 0.0), y: (0.0, 1.0) },
            Style::Scatter,
            &series,
        );
        let path = out_dir.join(FRONT_SVG);
        std::fs::write(&path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok((out_dir, merged))
}
