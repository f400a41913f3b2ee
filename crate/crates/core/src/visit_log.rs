//! Visit statistics collected from search trees and the policy targets
//! derived from them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::Encoder;
use crate::datamodel::Dataset;
use crate::environment::AcquisitionState;
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;

/// Statistics of one tree node at the end of a sample's search.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitEntry {
    pub sample: usize,
    pub state: FeatureSet,
    /// Feature acquired to reach `state`; `None` for the episode root.
    pub action: Option<usize>,
    pub visits: u64,
    /// Accumulated scalar return.
    pub q_sum: f64,
    /// Accumulated `(r_c, r_p)` return; zero for single-objective searches.
    pub r_sum: (f64, f64),
}

impl VisitEntry {
    pub fn parent(&self) -> Option<FeatureSet> {
        self.action.map(|a| {
            let mut p = self.state;
            p.remove(a);
            p
        })
    }

    pub fn mean(&self) -> Option<f64> {
        (self.visits > 0).then(|| self.q_sum / self.visits as f64)
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    sample: usize,
    state: String,
    parent: String,
    action: Option<usize>,
    visits: u64,
    q_sum: f64,
    r_c_sum: f64,
    r_p_sum: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VisitLog {
    pub entries: Vec<VisitEntry>,
}

impl VisitLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: VisitEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = VisitEntry>) {
        self.entries.extend(entries);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes `sample,state,parent,action,visits,q_sum,r_c_sum,r_p_sum`, with
    /// states as `|`-joined feature indices.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
        for e in &self.entries {
            w.serialize(Row {
                sample: e.sample,
                state: e.state.key(),
                parent: e.parent().map(|p| p.key()).unwrap_or_default(),
                action: e.action,
                visits: e.visits,
                q_sum: e.q_sum,
                r_c_sum: e.r_sum.0,
                r_p_sum: e.r_sum.1,
            })?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
        let mut log = VisitLog::new();
        for (i, row) in r.deserialize::<Row>().enumerate() {
            let row = row?;
            let state = FeatureSet::parse_key(&row.state)?;
            if let Some(a) = row.action {
                if !state.contains(a) || FeatureSet::parse_key(&row.parent)?.with(a) != state {
                    return Err(Error::Load {
                        path: path.to_path_buf(),
                        row: i + 2,
                        column: "parent".into(),
                        message: "parent plus action does not give the state".into(),
                    });
                }
            }
            log.push(VisitEntry {
                sample: row.sample,
                state,
                action: row.action,
                visits: row.visits,
                q_sum: row.q_sum,
                r_sum: (row.r_c_sum, row.r_p_sum),
            });
        }
        Ok(log)
    }
}

pub(crate) fn csv_io(path: &Path, e: csv::Error) -> Error {
    if !e.is_io_error() {
        return Error::Csv(e);
    }
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        _ => unreachable!("checked is_io_error"),
    }
}

/// Per-state action scores for policy training, plus the `(sample, state)`
/// pairs whose encodings become training inputs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PolicyTargets {
    pub scores: BTreeMap<FeatureSet, Vec<f64>>,
    pub rows: Vec<(usize, FeatureSet)>,
}

impl PolicyTargets {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Encoded states and their target score vectors.
    pub fn encode(&self, dataset: &Dataset, encoder: &Encoder) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        let mut inputs = Vec::with_capacity(self.rows.len());
        let mut targets = Vec::with_capacity(self.rows.len());
        for (sample, set) in &self.rows {
            let state = AcquisitionState::with_acquired(dataset, *sample, *set)?;
            inputs.push(encoder.encode(&state));
            targets.push(self.scores[set].clone());
        }
        Ok((inputs, targets))
    }
}

/// Divides by the maximum. `None` when the maximum is not positive.
pub(crate) fn max_normalize(mut scores: Vec<f64>) -> Option<Vec<f64>> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0 && max.is_finite()) {
        return None;
    }
    for s in &mut scores {
        *s /= max;
    }
    Some(scores)
}

/// Scalar visit statistics merged by state, built incrementally. Merging is
/// order-independent up to floating-point summation.
#[derive(Debug, Clone, Default)]
pub struct VisitAggregate {
    stats: HashMap<FeatureSet, (f64, u64)>,
    children: HashMap<FeatureSet, BTreeSet<usize>>,
    rows: BTreeSet<(usize, FeatureSet)>,
}

impl VisitAggregate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, entry: &VisitEntry) {
        let s = self.stats.entry(entry.state).or_insert((0.0, 0));
        s.0 += entry.q_sum;
        s.1 += entry.visits;
        self.rows.insert((entry.sample, entry.state));
        if let (Some(parent), Some(a)) = (entry.parent(), entry.action) {
            self.children.entry(parent).or_default().insert(a);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.stats.is_empty()
    }

    /// Mean return of each child, divided by the state's best child mean.
    /// States without a visited child are dropped.
    pub fn targets(&self, feature_count: usize) -> Result<PolicyTargets> {
        if self.is_empty() {
            return Err(Error::Empty("visit log"));
        }
        let mut scores = BTreeMap::new();
        for (state, actions) in &self.children {
            let mut a = vec![0.0; feature_count];
            let mut visited = false;
            for &action in actions {
                if let Some(&(q, n)) = self.stats.get(&state.with(action)) {
                    if n > 0 {
                        a[action] += q / n as f64;
                        visited = true;
                    }
                }
            }
            if let Some(norm) = visited.then(|| max_normalize(a)).flatten() {
                scores.insert(*state, norm);
            }
        }
        let rows = self.rows.iter().filter(|(_, s)| scores.contains_key(s)).copied().collect();
        Ok(PolicyTargets { scores, rows })
    }
}

/// Merges duplicate states by summing returns and visits, then scores each
/// action by its child's mean return, normalized by the largest.
pub fn preprocess_visit_log(log: &VisitLog, feature_count: usize) -> Result<PolicyTargets> {
    let mut agg = VisitAggregate::new();
    for e in &log.entries {
        agg.add(e);
    }
    agg.targets(feature_count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(sample: usize, state: &[usize], action: Option<usize>, q: f64, n: u64) -> VisitEntry {
        VisitEntry {
            sample,
            state: FeatureSet::from_indices(state.iter().copied()),
            action,
            visits: n,
            q_sum: q,
            r_sum: (0.0, 0.0),
        }
    }

    #[test]
    fn normalizes_by_best_child() {
        let log = VisitLog {
            entries: vec![
                entry(0, &[], None, 5.0, 2),
                entry(0, &[0], Some(0), 2.0, 1),
                entry(0, &[1], Some(1), 1.0, 1),
            ],
        };
        let t = preprocess_visit_log(&log, 2).unwrap();
        assert_eq!(t.scores[&FeatureSet::empty()], vec![1.0, 0.5]);
        assert_eq!(t.rows, vec![(0, FeatureSet::empty())]);
    }

    #[test]
    fn duplicates_are_summed() {
        let log = VisitLog {
            entries: vec![
                entry(0, &[], None, 1.0, 1),
                entry(0, &[0], Some(0), 1.0, 1),
                entry(1, &[0], Some(0), 3.0, 1),
                entry(1, &[1], Some(1), 4.0, 1),
            ],
        };
        let t = preprocess_visit_log(&log, 2).unwrap();
        // child 0 mean (1+3)/2 = 2, child 1 mean 4
        assert_eq!(t.scores[&FeatureSet::empty()], vec![0.5, 1.0]);
    }

    #[test]
    fn unvisited_children_contribute_zero() {
        let log = VisitLog {
            entries: vec![
                entry(0, &[], None, 3.0, 1),
                entry(0, &[0], Some(0), 3.0, 1),
                entry(0, &[1], Some(1), 0.0, 0),
                entry(0, &[0, 1], Some(1), 1.0, 1),
            ],
        };
        let t = preprocess_visit_log(&log, 2).unwrap();
        assert_eq!(t.scores[&FeatureSet::empty()], vec![1.0, 0.0]);
        assert_eq!(t.scores[&FeatureSet::from_indices([0])], vec![0.0, 1.0]);
        // the terminal state has no children
        assert_eq!(t.scores.len(), 2);
    }

    #[test]
    fn empty_log_is_an_error() {
        assert!(preprocess_visit_log(&VisitLog::new(), 3).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let log = VisitLog {
            entries: vec![
                entry(3, &[], None, 1.25, 4),
                VisitEntry { r_sum: (-0.5, 0.75), ..entry(3, &[2, 0], Some(2), 0.5, 1) },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("log.csv");
        log.write_csv(&p).unwrap();
        assert_eq!(VisitLog::read_csv(&p).unwrap(), log);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("3,0|2,0,2,1,0.5,-0.5,0.75"), "{text}");
    }
}
