use std::io::{ErrorKind, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mctsfa_cli::compare::cmd_compare;
use mctsfa_cli::config::{Overrides, RunConfig};
use mctsfa_cli::evaluate::{cmd_evaluate, EvaluateOptions};
use mctsfa_cli::front::cmd_front;
use mctsfa_cli::presets::{preset, preset_names, DatasetPreset};
use mctsfa_cli::train::{cmd_train, TrainOptions};
use mctsfa_cli::{CliError, CliResult, OUTPUT_ROOT_ENV};

/// Train and evaluate cost-aware feature acquisition policies.
#[derive(Debug, Parser)]
#[command(name = "mctsfa", version)]
struct Cli {
    /// Directory under which run records are created.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV, default_value = "runs")]
    output_root: PathBuf,

    /// Worker threads for split x seed runs (0 = one per core).
    #[arg(long, short = 'j', global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train every split x seed run of a configuration.
    Train(TrainArgs),
    /// Roll out trained policies on their test splits and summarize F1 AUCs.
    Evaluate {
        record: PathBuf,
        /// Also write SVG plots of the curves.
        #[arg(long)]
        plot: bool,
        /// Replay acquisition orders from a trajectory CSV instead of the
        /// trained policy.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Export the Pareto fronts of a multi-objective run.
    Front {
        record: PathBuf,
        #[arg(long)]
        plot: bool,
    },
    /// Tabulate the evaluation summaries of several records.
    Compare {
        #[arg(required = true)]
        records: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// List or print the built-in presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
enum PresetAction {
    List,
    /// Print a preset as a config file.
    Show {
        name: String,
    },
    /// Print the fixed feature schema of a dataset preset (only `mnist`).
    Schema {
        dataset: String,
    },
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Config file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Start from a named preset instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    simulations: Option<usize>,
    #[arg(long)]
    exploration: Option<f64>,
    #[arg(long)]
    update_frequency: Option<usize>,
    #[arg(long)]
    splits: Option<usize>,
    /// Comma-separated root seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Retrain even if a record with the same config hash exists.
    #[arg(long)]
    force: bool,
}

fn load_config(args: &TrainArgs) -> CliResult<RunConfig> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => RunConfig::from_path(path)?,
        (None, Some(name)) => {
            preset(name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`; see `mctsfa preset list`")))?
        }
        (None, None) => return Err(CliError::Usage("give a config file or --preset".into())),
    };
    Overrides {
        name: args.name.clone(),
        data: args.data.clone(),
        schema: args.schema.clone(),
        simulations: args.simulations,
        exploration: args.exploration,
        update_frequency: args.update_frequency,
        splits: args.splits,
        seeds: args.seeds.clone(),
    }
    .apply(&mut config);
    Ok(config)
}

/// Writes to stdout. A closed pipe (`mctsfa ... | head`) ends output quietly.
fn emit(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(CliError::Runtime(e.into())),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| CliError::Runtime(e.into()))?;
    }
    match cli.command {
        Command::Train(args) => {
            let config = load_config(&args)?;
            let options = TrainOptions { output_root: cli.output_root, force: args.force };
            let dir = cmd_train(config, &options)?;
            emit(&format!("{}\n", dir.display()))?;
        }
        Command::Evaluate { record, plot, trace } => {
            let (dir, e) = cmd_evaluate(&record, &EvaluateOptions { plot, trace })?;
            let s = &e.summary;
            emit(&format!(
                "{}: {} runs, mean AUC {:.4} ({:.1}%), max AUC {:.4} ({:.1}%)\n{}\n",
                e.name,
                s.runs,
                s.mean_auc,
                s.mean_percent,
                s.max_auc,
                s.max_percent,
                dir.display()
            ))?;
        }
        Command::Front { record, plot } => {
            let (dir, merged) = cmd_front(&record, plot)?;
            emit(&format!("{} points on the merged front\n{}\n", merged.len(), dir.display()))?;
        }
        Command::Compare { records, csv } => {
            emit(&cmd_compare(&records, csv.as_deref())?)?;
        }
        Command::Preset { action } => match action {
            PresetAction::List => emit(&preset_names().iter().map(|n| format!("{n}\n")).collect::<String>())?,
            PresetAction::Show { name } => {
                let config = preset(&name).ok_or_else(|| CliError::Usage(format!("unknown preset `{name}`")))?;
                emit(&config.to_toml_string())?;
            }
            PresetAction::Schema { dataset } => {
                let schema = DatasetPreset::ALL
                    .into_iter()
                    .find(|d| d.key() == dataset)
                    .ok_or_else(|| CliError::Usage(format!("unknown dataset `{dataset}`")))?
                    .schema()
                    .ok_or_else(|| {
                        CliError::Usage(format!("`{dataset}` has no fixed schema; write one for your data"))
                    })?;
                emit(&schema.to_toml_string())?;
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            e.exit_code()
        }
    }
}
