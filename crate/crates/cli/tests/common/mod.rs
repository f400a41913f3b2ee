//! Fixtures shared by the CLI integration and acceptance tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Runs the `mctsfa` binary with its output root set to `root`.
pub fn mctsfa(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mctsfa"))
        .arg("--output-root")
        .arg(root)
        .args(args)
        .env_remove("RUST_LOG")
        .output()
        .expect("mctsfa binary runs")
}

/// Like [`mctsfa`] but panics unless the command succeeds.
pub fn mctsfa_ok(root: &Path, args: &[&str]) -> String {
    let out = mctsfa(root, args);
    assert!(
        out.status.success(),
        "mctsfa {args:?} failed with {:?}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// Last non-empty stdout line, which every command uses for its output directory.
pub fn last_line(stdout: &str) -> PathBuf {
    PathBuf::from(stdout.lines().rev().find(|l| !l.trim().is_empty()).expect("output path").trim())
}

pub fn train(root: &Path, config: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["train", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    last_line(&mctsfa_ok(root, &args))
}

pub fn evaluate(root: &Path, record: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["evaluate", record.to_str().unwrap()];
    args.extend_from_slice(extra);
    last_line(&mctsfa_ok(root, &args))
}

pub struct Column {
    pub name: &'static str,
    /// `Some(cardinality)` for categorical features.
    pub cardinality: Option<usize>,
    pub cost: f64,
}

pub fn cat(name: &'static str, cost: f64) -> Column {
    Column { name, cardinality: Some(2), cost }
}

pub fn cont(name: &'static str, cost: f64) -> Column {
    Column { name, cardinality: None, cost }
}

/// Writes `<stem>.csv` and `<stem>.toml` under `dir`.
pub fn write_dataset(
    dir: &Path,
    stem: &str,
    columns: &[Column],
    rows: &[(Vec<f64>, usize)],
    classes: usize,
) -> (PathBuf, PathBuf) {
    let mut schema = format!("class_count = {classes}\n");
    for c in columns {
        let _ = write!(schema, "[[features]]\nname = \"{}\"\n", c.name);
        match c.cardinality {
            Some(k) => {
                let _ = write!(schema, "kind = \"categorical\"\ncardinality = {k}\n");
            }
            None => schema.push_str("kind = \"continuous\"\n"),
        }
        let _ = writeln!(schema, "cost = {:?}", c.cost);
    }
    let mut csv = columns.iter().map(|c| c.name).collect::<Vec<_>>().join(",");
    csv.push_str(",label\n");
    for (values, label) in rows {
        for v in values {
            let _ = write!(csv, "{v},");
        }
        let _ = writeln!(csv, "{label}");
    }
    let data = dir.join(format!("{stem}.csv"));
    let schema_path = dir.join(format!("{stem}.toml"));
    std::fs::write(&data, csv).unwrap();
    std::fs::write(&schema_path, schema).unwrap();
    (data, schema_path)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Two cheap categorical and two costly continuous features, costs 1,1,7,7.
/// The label mostly follows the third feature.
pub fn toy(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<_> = (0..n)
        .map(|_| {
            let a = rng.gen_range(0..2) as f64;
            let b = rng.gen_range(0..2) as f64;
            let c = round3(rng.gen_range(0.0..10.0));
            let d = round3(rng.gen_range(0.0..3.0));
            let flip = rng.gen_bool(0.1);
            let label = usize::from((c > 5.0) != flip);
            (vec![a, b, c, d], label)
        })
        .collect();
    let columns = [cat("a", 1.0), cat("b", 1.0), cont("c", 7.0), cont("d", 7.0)];
    write_dataset(dir, "toy", &columns, &rows, 2)
}

/// One categorical feature equal to the label (cost 1) followed by seven
/// uniform-noise continuous features (cost 7). Total cost 50.
pub fn informative(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<_> = (0..n)
        .map(|i| {
            let label = i % 2;
            let mut values = vec![label as f64];
            values.extend((0..7).map(|_| round3(rng.gen_range(0.0..10.0))));
            (values, label)
        })
        .collect();
    let mut columns = vec![cat("signal", 1.0)];
    const NOISE: [&str; 7] = ["n1", "n2", "n3", "n4", "n5", "n6", "n7"];
    columns.extend(NOISE.iter().map(|&name| cont(name, 7.0)));
    write_dataset(dir, "informative", &columns, &rows, 2)
}

/// Heart-failure-shaped data: nine binary features at cost 1 and four
/// continuous ones at cost 8 (total 41). The label depends on three
/// continuous features and one binary feature through a logistic link, with
/// about a third of the samples positive.
pub fn hf_proxy(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<_> = (0..n)
        .map(|_| {
            let bins: Vec<f64> = (0..9).map(|_| rng.gen_range(0..2) as f64).collect();
            let age = round3(rng.gen_range(40.0..95.0));
            let ejection = round3(rng.gen_range(14.0..80.0));
            // Right-skewed, mostly near 1 as in the clinical data.
            let creatinine = round3(0.5 + 4.0 * rng.gen::<f64>().powi(4));
            let sodium = round3(rng.gen_range(113.0..148.0));
            let z = 0.06 * (age - 60.0) - 0.08 * (ejection - 38.0) + 1.5 * (creatinine - 1.4) + 0.8 * bins[0] - 1.2;
            let label = usize::from(rng.gen_bool(1.0 / (1.0 + (-z).exp())));
            let mut values = bins;
            values.extend([age, ejection, creatinine, sodium]);
            (values, label)
        })
        .collect();
    let columns = [
        cat("anaemia", 1.0),
        cat("diabetes", 1.0),
        cat("high_blood_pressure", 1.0),
        cat("sex", 1.0),
        cat("smoking", 1.0),
        cat("b5", 1.0),
        cat("b6", 1.0),
        cat("b7", 1.0),
        cat("b8", 1.0),
        cont("age", 8.0),
        cont("ejection_fraction", 8.0),
        cont("serum_creatinine", 8.0),
        cont("serum_sodium", 8.0),
    ];
    write_dataset(dir, "hf", &columns, &rows, 2)
}

/// Writes a run config that points at `data` and `schema`.
pub fn write_config(dir: &Path, file: &str, name: &str, data: &Path, schema: &Path, body: &str) -> PathBuf {
    let text = format!(
        "name = \"{name}\"\ndata = {:?}\nschema = {:?}\n{body}",
        data.to_str().unwrap(),
        schema.to_str().unwrap()
    );
    let path = dir.join(file);
    std::fs::write(&path, text).unwrap();
    path
}

/// `(cost, normalized_cost, f1)` rows of a curve CSV.
pub fn read_curve_rows(path: &Path) -> Vec<(f64, f64, f64)> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.deserialize().map(|row| row.unwrap()).collect()
}

pub fn summary(record: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(record.join("eval").join("summary.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}
