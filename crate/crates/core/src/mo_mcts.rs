//! Multi-objective UCT search over `(r_c, r_p)` rewards: negative normalized
//! cost and class probability.
//!
//! Nodes accumulate component-wise suffix sums. Every per-step point and the
//! reward vector of every expanded child feeds a per-sample Pareto front `P`;
//! selection scores a child by the hypervolume of `P` joined with the child's
//! exploration-adjusted mean point. Fronts of all samples merge into the run
//! front `M`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::datamodel::Dataset;
use crate::environment::{AdaptiveModel, Environment, Episode, RewardTarget};
use crate::error::{Error, Result};
use crate::feature_set::FeatureSet;
use crate::policy_net::{PolicyNetwork, PolicyTrainConfig};
use crate::rng::{rng_for, Purpose};
use crate::so_mcts::{first_argmax, order_of, random_completion, train_round, visited_states, SearchConfig, SearchRun};
use crate::tree::{NodeId, Tree};
use crate::visit_log::{csv_io, max_normalize, PolicyTargets, VisitEntry, VisitLog};

/// `(r_c, r_p)`.
pub type Point = (f64, f64);

/// `a` is at least as good as `b` in both objectives and better in one.
pub fn dominates(a: Point, b: Point) -> bool {
    a.0 >= b.0 && a.1 >= b.1 && (a.0 > b.0 || a.1 > b.1)
}

/// Clamps into `[-1, 0] × [0, 1]`.
pub fn clamp_unit(p: Point) -> Point {
    (p.0.clamp(-1.0, 0.0), p.1.clamp(0.0, 1.0))
}

/// Mutually non-dominated points, kept sorted by ascending `r_c` (and so by
/// descending `r_p`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    points: Vec<Point>,
}

impl ParetoFront {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_points(points: impl IntoIterator<Item = Point>) -> Self {
        let mut front = ParetoFront::new();
        for p in points {
            front.insert(p);
        }
        front
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Adds `p` unless it is dominated or already present, dropping the
    /// points it dominates. Returns whether the front changed.
    pub fn insert(&mut self, p: Point) -> bool {
        if p.0.is_nan() || p.1.is_nan() {
            return false;
        }
        if self.points.iter().any(|&q| q == p || dominates(q, p)) {
            return false;
        }
        self.points.retain(|&q| !dominates(p, q));
        let at = self.points.partition_point(|&q| q.0 < p.0);
        self.points.insert(at, p);
        true
    }

    pub fn merge(&mut self, other: &ParetoFront) {
        for &p in &other.points {
            self.insert(p);
        }
    }

    pub fn hypervolume(&self, z: Point) -> f64 {
        hypervolume2d(&self.points, z)
    }
}

/// The non-dominated subset of `front ∪ {point}`.
pub fn pareto_insert(front: &ParetoFront, point: Point) -> ParetoFront {
    let mut out = front.clone();
    out.insert(point);
    out
}

/// Area of the union of the boxes `[z.0, p.0] × [z.1, p.1]`. Points need not
/// be mutually non-dominated; points not dominating `z` add nothing.
pub fn hypervolume2d(points: &[Point], z: Point) -> f64 {
    let mut sorted: Vec<Point> = points.iter().copied().filter(|p| p.0 > z.0 && p.1 > z.1).collect();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    let mut area = 0.0;
    let mut height = z.1;
    for (x, y) in sorted {
        if y > height {
            area += (x - z.0) * (y - height);
            height = y;
        }
    }
    area
}

/// Hypervolume of `front` with one extra point.
pub fn hypervolume_with(front: &ParetoFront, extra: Point, z: Point) -> f64 {
    let mut pts = front.points.clone();
    pts.push(extra);
    hypervolume2d(&pts, z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HvConfig {
    pub reference: Point,
}

impl Default for HvConfig {
    fn default() -> Self {
        HvConfig { reference: (-1.0, 0.0) }
    }
}

/// Tree whose nodes accumulate `(Σ r_c, Σ r_p)`.
pub type MoTree = Tree<Point>;

/// Number of rewards summed into a node at `depth`: the step reaching it and
/// every later one.
pub fn steps_covered(depth: usize, feature_count: usize) -> usize {
    (feature_count + 1).saturating_sub(depth.max(1)).max(1)
}

/// Per-step mean point of an accumulated return, clamped into the unit box.
pub fn mean_point(r_sum: Point, visits: u64, depth: usize, feature_count: usize) -> Option<Point> {
    if visits == 0 {
        return None;
    }
    let n = (visits as usize * steps_covered(depth, feature_count)) as f64;
    Some(clamp_unit((r_sum.0 / n, r_sum.1 / n)))
}

/// Selection score of a child: hypervolume of `P` plus its
/// exploration-adjusted mean point, divided by its visits. Unvisited children
/// score infinity.
pub fn mo_score(tree: &MoTree, child: NodeId, parent_visits: u64, c: f64, front: &ParetoFront, z: Point) -> f64 {
    let node = tree.node(child);
    if node.visits == 0 {
        return f64::INFINITY;
    }
    let n = node.visits as f64;
    let bonus = c * (2.0 * (parent_visits as f64).ln() / n).sqrt();
    let steps = steps_covered(node.depth(), tree.feature_count()) as f64;
    let u = clamp_unit((node.stats.0 / (n * steps) + bonus, node.stats.1 / (n * steps) + bonus));
    hypervolume_with(front, u, z) / n
}

/// Child maximizing [`mo_score`]; ties go to the lowest action.
pub fn mo_select(tree: &MoTree, node: NodeId, c: f64, front: &ParetoFront, z: Point) -> Result<NodeId> {
    let parent = tree.node(node).visits;
    let children = tree.children(node);
    let i = first_argmax(children.iter().map(|&ch| mo_score(tree, ch, parent, c, front, z))).ok_or(Error::Terminal)?;
    Ok(children[i])
}

/// Component-wise suffix sums along the path from `leaf` (as in the scalar
/// search), and every per-step point into `front`.
pub fn mo_backprop(tree: &mut MoTree, leaf: NodeId, rewards: &[Point], front: &mut ParetoFront) {
    let root_depth = tree.node(tree.root()).depth();
    let mut suffix = vec![(0.0, 0.0); rewards.len() + 1];
    for k in (0..rewards.len()).rev() {
        suffix[k] = (suffix[k + 1].0 + rewards[k].0, suffix[k + 1].1 + rewards[k].1);
    }
    for id in tree.path_to_root(leaf) {
        let node = tree.node_mut(id);
        let k = node.depth().saturating_sub(root_depth + 1);
        node.visits += 1;
        node.stats.0 += suffix[k].0;
        node.stats.1 += suffix[k].1;
    }
    for &p in rewards {
        front.insert(clamp_unit(p));
    }
}

/// Best visited child by the hypervolume-per-visit score without
/// exploration.
pub fn mo_best_action(tree: &MoTree, node: NodeId, front: &ParetoFront, z: Point) -> Result<usize> {
    let parent = tree.node(node).visits;
    let children = tree.children(node);
    let i = first_argmax(children.iter().map(|&ch| {
        if tree.node(ch).visits == 0 {
            f64::NEG_INFINITY
        } else {
            mo_score(tree, ch, parent, 0.0, front, z)
        }
    }))
    .filter(|&i| tree.node(children[i]).visits > 0)
    .ok_or(Error::NoVisitedChildren)?;
    Ok(tree.node(children[i]).action_in.expect("children have actions"))
}

/// One select / expand / simulate / backprop iteration from the root.
pub fn mo_iterate(
    tree: &mut MoTree,
    episode: &mut Episode<'_, '_>,
    c: f64,
    front: &mut ParetoFront,
    z: Point,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let mut at = tree.root();
    let mut rewards = Vec::new();
    while !tree.is_terminal(at) && !tree.children(at).is_empty() {
        at = mo_select(tree, at, c, front, z)?;
        rewards.push(episode.vector(tree.node(at).acquired)?);
    }
    if !tree.is_terminal(at) {
        for child in tree.expand(at) {
            front.insert(clamp_unit(episode.vector(tree.node(child).acquired)?));
        }
        let order = random_completion(&tree.node(at).acquired, tree.feature_count(), rng);
        let mut set = tree.node(at).acquired;
        for &a in &order {
            set.insert(a);
            rewards.push(episode.vector(set)?);
        }
        at = tree.child(at, order[0]).expect("expanded child");
    }
    mo_backprop(tree, at, &rewards, front);
    Ok(())
}

/// One sample's episode with moves picked by `choose`. Returns the tree and
/// the sample's front `P`.
pub fn mo_search_episode(
    episode: &mut Episode<'_, '_>,
    config: &SearchConfig,
    hv: &HvConfig,
    mut choose: impl FnMut(&MoTree, &ParetoFront, &crate::environment::AcquisitionState) -> Result<usize>,
) -> Result<(MoTree, ParetoFront)> {
    let d = episode.feature_count();
    let mut rng = rng_for(config.seed, Purpose::Rollout, &[episode.sample() as u64]);
    let mut tree = MoTree::new(FeatureSet::empty(), d);
    let mut front = ParetoFront::new();
    while !tree.is_terminal(tree.root()) {
        for _ in 0..config.simulations {
            mo_iterate(&mut tree, episode, config.exploration, &mut front, hv.reference, &mut rng)?;
        }
        let root = tree.root();
        let state = episode.state(tree.node(root).acquired)?;
        let action = choose(&tree, &front, &state)?;
        if state.acquired().contains(action) || action >= d {
            return Err(Error::AlreadyAcquired(action));
        }
        tree.expand(root);
        let next = tree.child(root, action).expect("expanded root");
        tree.reroot(next);
    }
    Ok((tree, front))
}

pub fn mo_tree_entries(tree: &MoTree, sample: usize) -> Vec<VisitEntry> {
    tree.nodes()
        .filter(|(_, n)| n.visits > 0)
        .map(|(_, n)| VisitEntry {
            sample,
            state: n.acquired,
            action: n.action_in,
            visits: n.visits,
            q_sum: 0.0,
            r_sum: n.stats,
        })
        .collect()
}

/// Vector visit statistics merged by state: duplicates keep the
/// non-dominated union of their mean points.
#[derive(Debug, Clone, Default)]
pub struct MoAggregate {
    feature_count: usize,
    fronts: HashMap<FeatureSet, ParetoFront>,
    children: HashMap<FeatureSet, BTreeSet<usize>>,
    rows: BTreeSet<(usize, FeatureSet)>,
}

impl MoAggregate {
    pub fn new(feature_count: usize) -> Self {
        MoAggregate { feature_count, ..Self::default() }
    }

    pub fn add(&mut self, entry: &VisitEntry) {
        let front = self.fronts.entry(entry.state).or_default();
        if let Some(p) = mean_point(entry.r_sum, entry.visits, entry.state.len(), self.feature_count) {
            front.insert(p);
        }
        self.rows.insert((entry.sample, entry.state));
        if let (Some(parent), Some(a)) = (entry.parent(), entry.action) {
            self.children.entry(parent).or_default().insert(a);
        }
    }

    /// Scores action `a` of a state by the hypervolume of `run_front` joined
    /// with the child's points, normalized by the state's best action.
    pub fn targets(&self, run_front: &ParetoFront, hv: &HvConfig) -> Result<PolicyTargets> {
        if self.fronts.is_empty() {
            return Err(Error::Empty("visit log"));
        }
        let mut scores = BTreeMap::new();
        for (state, actions) in &self.children {
            let mut a = vec![0.0; self.feature_count];
            let mut visited = false;
            for &action in actions {
                let Some(child) = self.fronts.get(&state.with(action)) else {
                    continue;
                };
                if child.is_empty() {
                    continue;
                }
                let mut merged = run_front.clone();
                merged.merge(child);
                a[action] += merged.hypervolume(hv.reference);
                visited = true;
            }
            if let Some(norm) = visited.then(|| max_normalize(a)).flatten() {
                scores.insert(*state, norm);
            }
        }
        let rows = self.rows.iter().filter(|(_, s)| scores.contains_key(s)).copied().collect();
        Ok(PolicyTargets { scores, rows })
    }
}

/// Policy targets from a vector visit log and the run front `M`.
pub fn mo_preprocess(
    log: &VisitLog,
    run_front: &ParetoFront,
    hv: &HvConfig,
    feature_count: usize,
) -> Result<PolicyTargets> {
    let mut agg = MoAggregate::new(feature_count);
    for e in &log.entries {
        agg.add(e);
    }
    agg.targets(run_front, hv)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoConfig {
    pub search: SearchConfig,
    pub policy: PolicyTrainConfig,
    pub update_frequency: usize,
    #[serde(default)]
    pub hv: HvConfig,
    /// When false, moves follow the search statistics until the policy has
    /// been trained once.
    #[serde(default = "default_true")]
    pub network_from_start: bool,
}

fn default_true() -> bool {
    true
}

impl MoConfig {
    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        self.policy.validate()?;
        if self.update_frequency == 0 {
            return Err(Error::InvalidArgument("update frequency must be at least 1".into()));
        }
        let z = self.hv.reference;
        if z.0 > -1.0 || z.1 > 0.0 {
            return Err(Error::InvalidArgument(format!(
                "reference point {z:?} must be dominated by the whole unit box"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MoRun {
    pub search: SearchRun,
    /// Front `P` of each training sample.
    pub sample_fronts: Vec<(usize, ParetoFront)>,
    /// Merged run front `M`.
    pub run_front: ParetoFront,
}

/// Multi-objective search with the policy in the loop; mirrors
/// [`crate::so_mcts::run_integrated`].
pub fn run_mo_integrated(
    dataset: &Dataset,
    samples: &[usize],
    model: &mut dyn AdaptiveModel,
    target: RewardTarget,
    policy: &mut PolicyNetwork,
    config: &MoConfig,
) -> Result<MoRun> {
    config.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("training samples"));
    }
    let d = dataset.schema.feature_count();
    let z = config.hv.reference;
    let mut run = MoRun::default();
    let mut agg = MoAggregate::new(d);
    let mut trained_at_end = false;
    for (i, &sample) in samples.iter().enumerate() {
        let use_network = config.network_from_start || run.search.trainings > 0;
        let (tree, front, visited) = {
            let env = Environment::new(dataset, &*model, target);
            let mut episode = Episode::new(&env, sample)?;
            let net = &*policy;
            let (tree, front) = mo_search_episode(&mut episode, &config.search, &config.hv, |t, p, state| {
                if use_network {
                    net.action(state)
                } else {
                    mo_best_action(t, t.root(), p, z)
                }
            })?;
            let visited = visited_states(&tree, dataset, sample)?;
            (tree, front, visited)
        };
        let entries = mo_tree_entries(&tree, sample);
        entries.iter().for_each(|e| agg.add(e));
        run.search.log.extend(entries);
        run.search.orders.push((sample, order_of(&tree)));
        run.run_front.merge(&front);
        run.sample_fronts.push((sample, front));
        model.end_sample(&visited)?;
        trained_at_end = (i + 1) % config.update_frequency == 0;
        if trained_at_end {
            let targets = agg.targets(&run.run_front, &config.hv)?;
            train_round(policy, &targets, dataset, &config.policy, &mut run.search)?;
        }
    }
    if !trained_at_end {
        let targets = agg.targets(&run.run_front, &config.hv)?;
        train_round(policy, &targets, dataset, &config.policy, &mut run.search)?;
    }
    Ok(run)
}

#[derive(Debug, Serialize, Deserialize)]
struct FrontRow {
    front: String,
    r_c: f64,
    r_p: f64,
}

/// Writes `front,r_c,r_p` rows; `front` is `sample:<index>` for per-sample
/// fronts and `run` for the merged front.
pub fn write_fronts(path: impl AsRef<Path>, samples: &[(usize, ParetoFront)], run_front: &ParetoFront) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    for (sample, front) in samples {
        for &(r_c, r_p) in front.points() {
            w.serialize(FrontRow { front: format!("sample:{sample}"), r_c, r_p })?;
        }
    }
    for &(r_c, r_p) in run_front.points() {
        w.serialize(FrontRow { front: "run".into(), r_c, r_p })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a file written by [`write_fronts`].
pub fn read_fronts(path: impl AsRef<Path>) -> Result<(Vec<(usize, ParetoFront)>, ParetoFront)> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut samples: BTreeMap<usize, Vec<Point>> = BTreeMap::new();
    let mut run = Vec::new();
    for (i, row) in r.deserialize::<FrontRow>().enumerate() {
        let row = row?;
        if row.front == "run" {
            run.push((row.r_c, row.r_p));
        } else if let Some(s) = row.front.strip_prefix("sample:").and_then(|s| s.parse().ok()) {
            samples.entry(s).or_default().push((row.r_c, row.r_p));
        } else {
            return Err(Error::Load {
                path: path.to_path_buf(),
                row: i + 2,
                column: "front".into(),
                message: format!("unknown front `{}`", row.front),
            });
        }
    }
    Ok((samples.into_iter().map(|(s, p)| (s, ParetoFront::from_points(p))).collect(), ParetoFront::from_points(run)))
}
