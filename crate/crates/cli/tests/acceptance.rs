//! Acceptance checks, one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process exits non-zero if any criterion fails.

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use mctsfa_cli::presets::{preset, preset_names, DatasetPreset};
use mctsfa_core::datamodel::{image_block_schema, make_splits, CATEGORICAL_COST, CONTINUOUS_COST};
use mctsfa_core::environment::{Environment, Episode, FnModel, RewardTarget};
use mctsfa_core::mo_mcts::{dominates, hypervolume2d, ParetoFront};
use mctsfa_core::nn::{Loss, Network, NetworkSpec, Target};
use mctsfa_core::rng::{rng_for, Purpose};
use mctsfa_core::so_mcts::{backprop, best_action, iterate, search, simulate, ucb_score, ucb_select, SoTree};
use mctsfa_core::tree::NodeId;
use mctsfa_core::{Dataset, FeatureSchema, FeatureSet, FeatureSpec, HvConfig, SearchConfig, SplitPlan};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:.1?}, limit {limit:?}"))?;
    Ok(took)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    (0..n).map(|_| (rng.gen_range(-1.0..=0.0), rng.gen_range(0.0..=1.0))).collect()
}

/// Area dominated by `points` over `[-1,0]x[0,1]`, counted on the midpoints
/// of an `n`x`n` grid. Each column is handled at once: the cells below the
/// tallest point to its right are dominated.
fn grid_oracle(points: &[(f64, f64)], n: usize) -> f64 {
    let mut covered = 0usize;
    for i in 0..n {
        let x = -1.0 + (i as f64 + 0.5) / n as f64;
        let h = points.iter().filter(|p| p.0 >= x).map(|p| p.1).fold(0.0, f64::max);
        covered += (0..n).take_while(|&j| (j as f64 + 0.5) / n as f64 <= h).count();
    }
    covered as f64 / (n * n) as f64
}

fn c1_hypervolume_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(1..=20);
        let raw = random_points(&mut rng, n);
        let front = ParetoFront::from_points(raw.iter().copied());
        let oracle = grid_oracle(&raw, 4000);
        for hv in [hypervolume2d(&raw, (-1.0, 0.0)), front.hypervolume((-1.0, 0.0))] {
            worst = worst.max((hv - oracle).abs());
        }
    }
    check(worst <= 1e-3, || format!("max |hv - oracle| = {worst:.2e}"))?;
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("200 fronts, max |hv - oracle| = {worst:.1e}, {took:.1?}"))
}

fn c2_pareto_invariants() -> Outcome {
    let start = Instant::now();
    let z = (-1.0, 0.0);
    let mut dominated_inserts = 0usize;
    for seq in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seq);
        let mut front = ParetoFront::new();
        for i in 0..10_000 {
            // Every third point repeats or weakens an existing one.
            let p = if i % 3 == 2 && !front.is_empty() {
                let q = front.points()[rng.gen_range(0..front.len())];
                (q.0 - rng.gen_range(0.0..0.1) * f64::from(rng.gen_range(0..2)), q.1 - rng.gen_range(0.0..0.1))
            } else {
                let p = random_points(&mut rng, 1)[0];
                (p.0 * 0.5, p.1.sqrt())
            };
            let weak = front.points().iter().any(|&q| q == p || dominates(q, p));
            let before = front.hypervolume(z);
            let points_before = front.points().to_vec();
            front.insert(p);
            if weak {
                dominated_inserts += 1;
                check(front.hypervolume(z) == before, || format!("HV changed after dominated insert {p:?}"))?;
                check(front.points() == points_before.as_slice(), || {
                    format!("front changed after dominated insert {p:?}")
                })?;
            }
            let pts = front.points();
            for &a in pts {
                check(!pts.iter().any(|&b| dominates(b, a)), || format!("{a:?} dominated after {i} inserts"))?;
            }
        }
    }
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("5 x 10^4 inserts ({dominated_inserts} dominated), {took:.1?}"))
}

/// Grows a tree of at most `max_nodes` nodes by expanding random leaves and
/// gives every node random statistics with at least one visit.
fn random_tree(rng: &mut ChaCha8Rng, features: usize, max_nodes: usize) -> SoTree {
    let mut tree = SoTree::new(FeatureSet::default(), features);
    loop {
        let leaves: Vec<NodeId> =
            tree.nodes().filter(|(id, n)| n.children.is_empty() && !tree.is_terminal(*id)).map(|(id, _)| id).collect();
        let Some(&leaf) = leaves.choose(rng) else { break };
        if tree.len() + features - tree.node(leaf).depth() > max_nodes {
            break;
        }
        tree.expand(leaf);
    }
    for id in 0..tree.len() {
        let node = tree.node_mut(id);
        node.visits = rng.gen_range(1..50);
        node.stats = rng.gen_range(-5.0..20.0) * node.visits as f64;
    }
    tree
}

fn c3_uct_arithmetic() -> Outcome {
    let cases = [
        ((1.0, 1, 2, 1.0), 1.8325546111576978),
        ((3.0, 2, 10, 0.5), 2.036491506572337),
        ((1.0, 4, 7, 2.0), 1.6449588341794583),
        ((2.5, 5, 9, 0.0), 0.5),
    ];
    for ((q, n, parent, c), want) in cases {
        let got = ucb_score(q, n, parent, c);
        check((got - want).abs() <= 1e-9, || format!("ucb_score({q}, {n}, {parent}, {c}) = {got}, want {want}"))?;
    }
    check(ucb_score(0.0, 0, 5, 1.0) == f64::INFINITY, || "unvisited child is not infinite".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..500 {
        let features = rng.gen_range(2..=6);
        let tree = random_tree(&mut rng, features, 100);
        check(tree.len() <= 100, || format!("tree of {} nodes", tree.len()))?;
        for (id, node) in tree.nodes() {
            if node.children.is_empty() {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for &ch in &node.children {
                let n = tree.node(ch);
                let mean = n.stats / n.visits as f64;
                if best.is_none_or(|(_, b)| mean > b) {
                    best = Some((n.action_in.unwrap(), mean));
                }
            }
            let want = best.unwrap().0;
            let selected = tree.node(ucb_select(&tree, id, 0.0).map_err(|e| e.to_string())?).action_in.unwrap();
            let chosen = best_action(&tree, id).map_err(|e| e.to_string())?;
            check(selected == want && chosen == want, || {
                format!("c=0 picks {selected}, best_action {chosen}, argmax {want}")
            })?;
            checked += 1;
        }
    }
    Ok(format!("{} hand values, {checked} random internal nodes", cases.len()))
}

/// Dataset of `costs.len()` continuous features and one sample labelled 1.
fn single_sample(costs: &[f64]) -> Dataset {
    let features =
        costs.iter().enumerate().map(|(i, &c)| FeatureSpec::continuous(format!("f{i}")).with_cost(c)).collect();
    let schema = FeatureSchema::new(features, 2).unwrap();
    let values = vec![(0..costs.len()).map(|i| i as f64 + 1.0).collect()];
    Dataset::new("single", schema, values, vec![1]).unwrap()
}

/// Deterministic logistic score over the acquired set.
fn logistic_model(weights: Vec<f64>, bias: f64) -> impl Fn(&mctsfa_core::AcquisitionState) -> Vec<f64> {
    move |s| {
        let z = bias + s.acquired().iter().map(|i| weights[i]).sum::<f64>();
        let p = 1.0 / (1.0 + (-z).exp());
        vec![1.0 - p, p]
    }
}

/// `Σ_{j≥k} rewards[j]`, summed from the back.
fn tail_sum(rewards: &[f64], k: usize) -> f64 {
    let mut s = 0.0;
    for j in (k..rewards.len()).rev() {
        s += rewards[j];
    }
    s
}

fn c4_backprop_conservation() -> Outcome {
    let mut total_iterations = 0;
    for trial in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(400 + trial);
        let d = rng.gen_range(2..=6);
        let costs: Vec<f64> = (0..d).map(|_| rng.gen_range(1..=7) as f64).collect();
        let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let data = single_sample(&costs);
        let model = FnModel(logistic_model(weights, 0.1));
        let env = Environment::new(&data, &model, RewardTarget::TrueLabel);
        let mut ep_manual = Episode::new(&env, 0).unwrap();
        let mut ep_ref = Episode::new(&env, 0).unwrap();
        let mut manual = SoTree::new(FeatureSet::default(), d);
        let mut reference = SoTree::new(FeatureSet::default(), d);
        let mut rng_manual = rng_for(trial, Purpose::Search, &[]);
        let mut rng_ref = rng_manual.clone();
        let mut expected: HashMap<NodeId, f64> = HashMap::new();
        let err = |e: mctsfa_core::Error| e.to_string();

        for _move in 0..d {
            for _ in 0..rng.gen_range(1..40) {
                // Same primitives and order as one search iteration.
                let root_depth = manual.node(manual.root()).depth();
                let mut at = manual.root();
                let mut rewards = Vec::new();
                while !manual.is_terminal(at) && !manual.children(at).is_empty() {
                    at = ucb_select(&manual, at, 1.0).map_err(err)?;
                    rewards.push(ep_manual.scalar(manual.node(at).acquired).map_err(err)?);
                }
                if !manual.is_terminal(at) {
                    manual.expand(at);
                    let (order, tail) =
                        simulate(&mut ep_manual, manual.node(at).acquired, &mut rng_manual).map_err(err)?;
                    at = manual.child(at, order[0]).unwrap();
                    rewards.extend(tail);
                }
                for id in manual.path_to_root(at) {
                    let depth = manual.node(id).depth();
                    let k = if depth == root_depth { 0 } else { depth - root_depth - 1 };
                    *expected.entry(id).or_insert(0.0) += tail_sum(&rewards, k);
                }
                backprop(&mut manual, at, &rewards);
                iterate(&mut reference, &mut ep_ref, 1.0, &mut rng_ref).map_err(err)?;
                total_iterations += 1;

                check(manual.len() == reference.len(), || "manual and iterate trees differ in size".into())?;
                // Ancestors of a re-rooted tree stop receiving visits.
                let mut ancestors = Vec::new();
                let mut up = manual.node(manual.root()).parent;
                while let Some(id) = up {
                    ancestors.push(id);
                    up = manual.node(id).parent;
                }
                for (id, node) in manual.nodes() {
                    let want = expected.get(&id).copied().unwrap_or(0.0);
                    check(node.stats == want, || {
                        format!("trial {trial}: node {id} q_sum {} != tracked {want}", node.stats)
                    })?;
                    let other = reference.node(id);
                    check(
                        node.stats == other.stats && node.visits == other.visits && node.acquired == other.acquired,
                        || format!("trial {trial}: node {id} differs from iterate()"),
                    )?;
                    let below: u64 = node.children.iter().map(|&c| manual.node(c).visits).sum();
                    check(ancestors.contains(&id) || node.visits >= below, || {
                        format!("node {id}: visits {} < children {below}", node.visits)
                    })?;
                }
            }
            if manual.is_terminal(manual.root()) {
                break;
            }
            let a = best_action(&manual, manual.root()).map_err(err)?;
            let next = manual.child(manual.root(), a).unwrap();
            manual.reroot(next);
            reference.reroot(next);
        }
    }
    Ok(format!("40 episodes, {total_iterations} iterations, exact equality"))
}

fn c5_reward_formula() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut steps = 0;
    for _ in 0..500 {
        let d = rng.gen_range(1..=8);
        let costs: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..10.0)).collect();
        let p: f64 = rng.gen_range(0.0..=1.0);
        let data = single_sample(&costs);
        let model = FnModel(move |_: &mctsfa_core::AcquisitionState| vec![1.0 - p, p]);
        let env = Environment::new(&data, &model, RewardTarget::TrueLabel);
        let total: f64 = costs.iter().sum();
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(&mut rng);
        let mut state = env.reset(0).map_err(|e| e.to_string())?;
        let mut spent = 0.0;
        for (t, &a) in order.iter().enumerate() {
            let out = env.step(&state, a).map_err(|e| e.to_string())?;
            spent += costs[a];
            let want = p / (spent / total);
            check((out.scalar_reward - want).abs() <= 1e-12, || format!("r = {}, want {want}", out.scalar_reward))?;
            let (r_c, r_p) = out.vector_reward;
            if r_c != 0.0 {
                check((out.scalar_reward - r_p / -r_c).abs() <= 1e-12, || "r != r_p / -r_c".into())?;
            }
            if t + 1 == d {
                check((out.scalar_reward - p).abs() <= 1e-12, || {
                    format!("terminal r = {}, P = {p}", out.scalar_reward)
                })?;
            }
            state = out.next_state;
            steps += 1;
        }
    }
    Ok(format!("500 episodes, {steps} steps"))
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn c6_brute_force() -> Outcome {
    let start = Instant::now();
    let mut matched = 0;
    let runs = 100u64;
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + run);
        let d = rng.gen_range(2..=4);
        let costs: Vec<f64> = (0..d).map(|_| rng.gen_range(1..=7) as f64).collect();
        let weights: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let bias = rng.gen_range(-1.0..1.0);
        let data = single_sample(&costs);
        let model = FnModel(logistic_model(weights, bias));
        let env = Environment::new(&data, &model, RewardTarget::TrueLabel);
        let mut episode = Episode::new(&env, 0).unwrap();

        let mut best_first: Vec<usize> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for order in permutations(&(0..d).collect::<Vec<_>>()) {
            let mut set = FeatureSet::default();
            let mut ret = 0.0;
            for &a in &order {
                set.insert(a);
                ret += episode.scalar(set).map_err(|e| e.to_string())?;
            }
            if ret > best + 1e-9 {
                best = ret;
                best_first = vec![order[0]];
            } else if (ret - best).abs() <= 1e-9 && !best_first.contains(&order[0]) {
                best_first.push(order[0]);
            }
        }

        let mut tree = SoTree::new(FeatureSet::default(), d);
        let config = SearchConfig { simulations: 500, exploration: 1.0, seed: run };
        let mut search_rng = rng_for(run, Purpose::Search, &[]);
        search(&mut tree, &mut episode, &config, &mut search_rng).map_err(|e| e.to_string())?;
        let chosen = best_action(&tree, tree.root()).map_err(|e| e.to_string())?;
        if best_first.contains(&chosen) {
            matched += 1;
        }
    }
    let took = within(Duration::from_secs(120), start)?;
    let rate = matched as f64 / runs as f64;
    check(rate >= 0.95, || format!("matched {matched}/{runs}"))?;
    Ok(format!("matched {matched}/{runs}, {took:.1?}"))
}

const INFORMATIVE_BODY: &str = r#"
[classifier]
kind = "lr"
learning_rate = 0.1
epochs = 400

[strategy]
kind = "pretrain"

[search]
simulations = 100
exploration = 1.0
update_frequency = 12

[policy]
learning_rate = 0.001
epochs = 100
batch_size = 32

[split]
split_count = 1
seeds = [0, 1, 2]
train_fraction = 0.8
"#;

fn c7_directional() -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let root = dir.join("runs");
    let (data, schema) = informative(dir, 60, 7);
    let mut auc = HashMap::new();
    for (name, algorithm) in
        [("signal-so", "so-integrated"), ("signal-random", "random"), ("signal-mo", "mo-integrated")]
    {
        let cfg = write_config(
            dir,
            &format!("{name}.toml"),
            name,
            &data,
            &schema,
            &format!("algorithm = \"{algorithm}\"\n{INFORMATIVE_BODY}"),
        );
        let record = train(&root, &cfg, &[]);
        if algorithm == "mo-integrated" {
            let front_dir = last_line(&mctsfa_ok(&root, &["front", record.to_str().unwrap()]));
            let mut r = csv::Reader::from_path(front_dir.join("points.csv")).map_err(|e| e.to_string())?;
            let mut per_run: HashMap<String, bool> = HashMap::new();
            for row in r.deserialize::<(String, String, Option<usize>, f64, f64)>() {
                let (run, set, _, r_c, r_p) = row.map_err(|e| e.to_string())?;
                if set == "M" {
                    *per_run.entry(run).or_default() |= r_p >= 0.95 && r_c > -0.5;
                }
            }
            check(per_run.len() == 3, || format!("{} MO runs", per_run.len()))?;
            check(per_run.values().all(|&hit| hit), || {
                format!("runs without a (r_c > -0.5, r_p >= 0.95) point: {per_run:?}")
            })?;
        } else {
            evaluate(&root, &record, &[]);
            auc.insert(algorithm, summary(&record)["summary"]["mean_auc"].as_f64().unwrap());
        }
    }
    let (so, random) = (auc["so-integrated"], auc["random"]);
    check(so - random >= 0.15, || format!("so {so:.3} vs random {random:.3}"))?;
    let took = within(Duration::from_secs(600), start)?;
    Ok(format!("AUC so {so:.3} vs random {random:.3}; every MO front has the cheap confident point; {took:.1?}"))
}

fn gradient_cases() -> Vec<(&'static str, Network, Loss, Target)> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ff = NetworkSpec::Feedforward { hidden: vec![6, 5] };
    let conv = NetworkSpec::Conv { side: 6, filters: vec![2, 3], kernel: 3, dilation: 1, pool: 2, dense: 4 };
    let dilated = NetworkSpec::Conv { side: 8, filters: vec![2], kernel: 3, dilation: 2, pool: 2, dense: 3 };
    vec![
        ("linear/ce", NetworkSpec::Linear.build(5, 3, &mut rng).unwrap(), Loss::CrossEntropy, Target::Class(2)),
        ("feedforward/ce", ff.build(7, 2, &mut rng).unwrap(), Loss::CrossEntropy, Target::Class(0)),
        ("feedforward/mse", ff.build(7, 4, &mut rng).unwrap(), Loss::Mse, Target::Scores(vec![0.1, 0.9, 0.0, 0.4])),
        ("feedforward/mse-one", ff.build(7, 4, &mut rng).unwrap(), Loss::Mse, Target::Output { index: 1, value: 0.7 }),
        ("conv/ce", conv.build(36, 3, &mut rng).unwrap(), Loss::CrossEntropy, Target::Class(1)),
        ("conv-dilated/mse", dilated.build(64, 2, &mut rng).unwrap(), Loss::Mse, Target::Scores(vec![0.3, -0.2])),
    ]
}

fn c8_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (name, net, loss, target) in gradient_cases() {
        let input: Vec<f64> = (0..net.input_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, grads) = net.gradient(&input, &loss, &target).map_err(|e| e.to_string())?;
        let value = |n: &Network| n.gradient(&input, &loss, &target).unwrap().0;
        for (t, g) in grads.iter().enumerate() {
            for (i, &analytic) in g.iter().enumerate() {
                let mut plus = net.clone();
                plus.params_mut()[t][i] += h;
                let mut minus = net.clone();
                minus.params_mut()[t][i] -= h;
                let numeric = (value(&plus) - value(&minus)) / (2.0 * h);
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3);
                check(rel <= 1e-4, || {
                    format!("{name}: tensor {t}[{i}] analytic {analytic:.6e} numeric {numeric:.6e}")
                })?;
                worst = worst.max(rel);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} parameters, max relative error {worst:.1e}"))
}

fn c9_constants() -> Outcome {
    check(CATEGORICAL_COST == 1.0 && CONTINUOUS_COST == 7.0, || "categorical/continuous costs".into())?;
    let mnist = image_block_schema(28, 4, 10).map_err(|e| e.to_string())?;
    check(mnist.feature_count() == 49, || format!("{} MNIST blocks", mnist.feature_count()))?;
    check((0..49).all(|i| mnist.cost(i) == 16.0), || "MNIST block cost".into())?;
    check(DatasetPreset::ALL.iter().any(|d| d.schema() == Some(mnist.clone())), || "mnist preset schema".into())?;
    let plan = SplitPlan::default();
    check(plan == SplitPlan { split_count: 4, seeds: vec![0, 1, 2], train_fraction: 0.8 }, || format!("{plan:?}"))?;
    let parts = make_splits(299, &plan).map_err(|e| e.to_string())?;
    check(parts.len() == 12 && parts.iter().all(|p| p.train.len() == 239 && p.test.len() == 60), || {
        "80/20 partition sizes".into()
    })?;
    check(HvConfig::default().reference == (-1.0, 0.0), || "reference point".into())?;
    let search = SearchConfig::default();
    check(search.simulations == 100 && search.exploration == 1.0, || "search defaults".into())?;
    let mo_c = [("hf", 2.0), ("chd", 1.0), ("physionet", 1.0), ("mnist", 1.0)];
    for name in preset_names() {
        let cfg = preset(&name).unwrap();
        check(cfg.split == plan, || format!("{name}: split {:?}", cfg.split))?;
        check(cfg.hv.reference == (-1.0, 0.0), || format!("{name}: reference"))?;
        check(cfg.search.simulations == 100, || format!("{name}: simulations {}", cfg.search.simulations))?;
        let dataset = name.split('-').next().unwrap();
        let want_c = if name.contains("-mo") { mo_c.iter().find(|(d, _)| *d == dataset).unwrap().1 } else { 1.0 };
        check(cfg.search.exploration == want_c, || format!("{name}: c = {}", cfg.search.exploration))?;
    }
    Ok(format!("costs 1/7/16, 49 blocks, 4x3 80/20 splits, {} presets", preset_names().len()))
}

fn curve_files(record: &Path) -> Vec<(String, Vec<u8>)> {
    let eval = record.join("eval");
    let mut files = vec![("curve.csv".to_string(), std::fs::read(eval.join("curve.csv")).unwrap())];
    let mut runs: Vec<_> =
        std::fs::read_dir(&eval).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_dir()).collect();
    runs.sort();
    for run in runs {
        let name = run.file_name().unwrap().to_string_lossy().into_owned();
        files.push((format!("{name}/curve.csv"), std::fs::read(run.join("curve.csv")).unwrap()));
    }
    files
}

fn c10_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let (data, schema) = toy(dir, 40, 10);
    let body = r#"
classifier = { kind = "lr" }
strategy = { kind = "retrain", frequency = 10 }

[search]
simulations = 20
update_frequency = 8

[policy]
learning_rate = 0.001
epochs = 10

[dqn]
episodes = 20

[split]
split_count = 2
seeds = [0, 1]
train_fraction = 0.75
"#;
    let mut compared = 0;
    for algorithm in ["so-integrated", "so-standalone", "mo-integrated", "dqn", "random"] {
        let cfg = write_config(
            dir,
            &format!("{algorithm}.toml"),
            algorithm,
            &data,
            &schema,
            &format!("algorithm = \"{algorithm}\"\n{body}"),
        );
        let mut outputs = Vec::new();
        for attempt in ["a", "b"] {
            let root = dir.join(attempt);
            let record = train(&root, &cfg, &["-j", "4"]);
            evaluate(&root, &record, &[]);
            outputs.push(curve_files(&record));
        }
        check(outputs[0].len() == 5, || format!("{algorithm}: {} curve files", outputs[0].len()))?;
        for ((name, a), (_, b)) in outputs[0].iter().zip(&outputs[1]) {
            check(a == b, || format!("{algorithm}: {name} differs between reruns"))?;
            compared += 1;
        }
    }
    Ok(format!("5 algorithms, {compared} curve files byte-identical"))
}

fn c11_heart_failure() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let supplied = std::env::var_os("MCTSFA_HF_DATA").zip(std::env::var_os("MCTSFA_HF_SCHEMA"));
    // The proxy runs one split and seed to bound runtime; real data gets the full preset.
    let (data, schema, extra, source) = match supplied {
        Some((d, s)) => (d.into(), s.into(), vec![], "user-supplied data"),
        None => {
            let (d, s) = hf_proxy(dir, 299, 11);
            let source = "synthetic HF-shaped proxy, 1 split x 1 seed; set MCTSFA_HF_DATA and MCTSFA_HF_SCHEMA for the real data";
            (d, s, vec!["--splits", "1", "--seeds", "0"], source)
        }
    };
    let total = FeatureSchema::from_path(&schema).map_err(|e| e.to_string())?.total_cost();
    check(total == 41.0, || format!("schema total cost {total}, expected 41"))?;
    let root = dir.join("runs");
    let mut args =
        vec!["train", "--preset", "hf-so", "--data", data.to_str().unwrap(), "--schema", schema.to_str().unwrap()];
    args.extend(extra);
    let stdout = mctsfa_ok(&root, &args);
    let record = last_line(&stdout);
    evaluate(&root, &record, &[]);
    let s = summary(&record);
    let pct = s["summary"]["mean_percent"].as_f64().unwrap();
    check(pct > 0.0 && pct < 100.0, || format!("mean F1-AUC percentage {pct:.2}"))?;
    let runs = s["runs"].as_array().unwrap();
    for run in runs {
        let name = format!("split{}-seed{}", run["split"], run["seed"]);
        let rows = read_curve_rows(&record.join("eval").join(&name).join("curve.csv"));
        let last = rows.last().unwrap();
        let full = run["full_information_auc"].as_f64().unwrap();
        check(last.1 == 1.0 && (last.2 - full).abs() <= 1e-12, || {
            format!("{name}: F1 at cost 1 is {}, full information {full}", last.2)
        })?;
    }
    Ok(format!("{} runs, mean F1-AUC {pct:.1}% ({source})", runs.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("hypervolume oracle equivalence", c1_hypervolume_oracle),
        ("Pareto invariants", c2_pareto_invariants),
        ("UCT arithmetic", c3_uct_arithmetic),
        ("backprop conservation", c4_backprop_conservation),
        ("reward formula", c5_reward_formula),
        ("brute-force policy equivalence", c6_brute_force),
        ("directional learning", c7_directional),
        ("gradient correctness", c8_gradients),
        ("protocol constants", c9_constants),
        ("determinism", c10_determinism),
        ("Heart Failure end-to-end", c11_heart_failure),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail})"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({detail})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
