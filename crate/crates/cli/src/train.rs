use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use mctsfa_core::datamodel::{load_with_schema, make_splits, Partition};
use mctsfa_core::harness::dqn_train;
use mctsfa_core::mo_mcts::{run_mo_integrated, write_fronts};
use mctsfa_core::policy_net::init_network;
use mctsfa_core::rng::{derive_seed, rng_for, Purpose};
use mctsfa_core::so_mcts::{run_integrated, run_standalone, SearchRun};
use mctsfa_core::{ClassifierStrategy, Dataset, FeatureSchema};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Algorithm, RunConfig};
use crate::record::{
    record_dir_name, run_dir_name, write_json, RunEntry, RunRecord, CLASSIFIER_FILE, CONFIG_FILE, DQN_FILE,
    FRONTS_FILE, PARTITION_FILE, POLICY_FILE, RECORD_FILE, TRAINING_FILE, VISITS_FILE,
};
use crate::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct TrainOptions {
    pub output_root: PathBuf,
    /// Replace an existing record with the same config hash.
    pub force: bool,
}

/// What happened while training one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub policy_trainings: usize,
    pub policy_final_losses: Vec<f64>,
    /// Acquisition order taken on each training sample.
    pub orders: Vec<(usize, Vec<usize>)>,
    pub classifier_retrains: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dqn_episode_losses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dqn_final_epsilon: Option<f64>,
}

impl TrainingReport {
    fn from_search(run: &SearchRun) -> Self {
        TrainingReport {
            policy_trainings: run.trainings,
            policy_final_losses: run.final_losses.clone(),
            orders: run.orders.clone(),
            ..TrainingReport::default()
        }
    }
}

/// Seed all of a run's components derive from.
pub fn run_seed(partition: &Partition) -> u64 {
    derive_seed(partition.seed, Purpose::Search, &[partition.split as u64])
}

/// Trains every `(split, seed)` run of `config` and returns the record
/// directory.
pub fn cmd_train(mut config: RunConfig, options: &TrainOptions) -> CliResult<PathBuf> {
    config.absolutize()?;
    let schema = FeatureSchema::from_path(&config.schema).map_err(|e| CliError::Usage(e.to_string()))?;
    config.validate(&schema)?;
    let dir = options.output_root.join(record_dir_name(&config));
    if dir.join(RECORD_FILE).exists() {
        if !options.force {
            return Err(CliError::Usage(format!(
                "{} already holds a run with this config hash; pass --force to retrain",
                dir.display()
            )));
        }
        std::fs::remove_dir_all(&dir).with_context(|| format!("removing {}", dir.display()))?;
    }
    let dataset = Arc::new(load_with_schema(&config.data, schema)?);
    let partitions = make_splits(dataset.len(), &config.split).map_err(|e| CliError::Usage(e.to_string()))?;
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join(CONFIG_FILE), config.to_toml_string())
        .with_context(|| format!("writing config into {}", dir.display()))?;

    log::info!(
        "training {} on {} ({} runs) into {}",
        config.algorithm.as_str(),
        dataset.name,
        partitions.len(),
        dir.display()
    );
    let runs = partitions
        .par_iter()
        .map(|p| train_partition(&config, &dataset, p, &dir))
        .collect::<anyhow::Result<Vec<_>>>()?;
    write_json(&dir.join(RECORD_FILE), &RunRecord::new(&config, &dataset, runs))?;
    Ok(dir)
}

fn train_partition(
    config: &RunConfig,
    dataset: &Arc<Dataset>,
    partition: &Partition,
    root: &Path,
) -> anyhow::Result<RunEntry> {
    let seed = run_seed(partition);
    let name = run_dir_name(partition.split, partition.seed);
    let dir = root.join(&name);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join(PARTITION_FILE), partition)?;

    let encoder = config.encoder(dataset, &partition.train)?;
    let mut strategy = ClassifierStrategy::new(
        config.strategy,
        config.classifier_config(seed),
        encoder.clone(),
        Arc::clone(dataset),
        partition.train.clone(),
        seed,
    )?;
    let mut order = partition.train.clone();
    order.shuffle(&mut rng_for(seed, Purpose::Split, &[]));
    let target = config.reward_target;

    let mut report = match config.algorithm {
        Algorithm::SoStandalone => {
            let mut policy = init_network(&config.policy.network, encoder, seed)?;
            let run =
                run_standalone(dataset, &order, &mut strategy, target, &mut policy, &config.standalone_config(seed))?;
            policy.save(dir.join(POLICY_FILE))?;
            run.log.write_csv(dir.join(VISITS_FILE))?;
            TrainingReport::from_search(&run)
        }
        Algorithm::SoIntegrated => {
            let mut policy = init_network(&config.policy.network, encoder, seed)?;
            let run =
                run_integrated(dataset, &order, &mut strategy, target, &mut policy, &config.integrated_config(seed))?;
            policy.save(dir.join(POLICY_FILE))?;
            run.log.write_csv(dir.join(VISITS_FILE))?;
            TrainingReport::from_search(&run)
        }
        Algorithm::MoIntegrated => {
            let mut policy = init_network(&config.policy.network, encoder, seed)?;
            let run = run_mo_integrated(dataset, &order, &mut strategy, target, &mut policy, &config.mo_config(seed))?;
            policy.save(dir.join(POLICY_FILE))?;
            run.search.log.write_csv(dir.join(VISITS_FILE))?;
            write_fronts(dir.join(FRONTS_FILE), &run.sample_fronts, &run.run_front)?;
            TrainingReport::from_search(&run.search)
        }
        Algorithm::Dqn => {
            let (policy, dqn) = dqn_train(dataset, &order, &mut strategy, target, encoder, &config.dqn_config(seed))?;
            policy.save(dir.join(DQN_FILE))?;
            TrainingReport {
                dqn_episode_losses: dqn.episode_losses,
                dqn_final_epsilon: Some(dqn.final_epsilon),
                ..TrainingReport::default()
            }
        }
        Algorithm::Random | Algorithm::Greedy => TrainingReport::default(),
    };
    report.classifier_retrains = strategy.retrain_count();
    strategy.save(dir.join(CLASSIFIER_FILE))?;
    write_json(&dir.join(TRAINING_FILE), &report)?;
    log::info!("finished split {} seed {}", partition.split, partition.seed);
    Ok(RunEntry {
        split: partition.split,
        seed: partition.seed,
        run_seed: seed,
        dir: name,
        trainings: report.policy_trainings,
        final_loss: report.policy_final_losses.last().copied(),
    })
}
