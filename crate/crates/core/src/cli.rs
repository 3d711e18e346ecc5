//! Command-line front end: `train`, `compare` and `eval`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ddpg::AgentNets;
use crate::env::{ArmEnv, EnvState};
use crate::error::Error;
use crate::harness::{
    compare, read_records, run_experiment_with_progress, AgentKind, ExperimentConfig,
};
use crate::nn::DenseNet;

/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit code for failures while running a command.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "apf-ddpg", version, about = "Train and compare DDPG / APF-DDPG reaching agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment (all seeds of one agent) and write its episode CSV.
    Train(TrainArgs),
    /// Compare two episode CSVs: t-tests, final-100 means, failure counts.
    Compare(CompareArgs),
    /// Roll out a saved actor greedily and print the trajectory.
    Eval(EvalArgs),
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// JSON config file; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    agent: Option<AgentKind>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress per-episode progress on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Episode CSV of the first agent (the t statistic is mean(a) - mean(b)).
    a: PathBuf,
    /// Episode CSV of the second agent.
    b: PathBuf,
    #[arg(long)]
    label_a: Option<String>,
    #[arg(long)]
    label_b: Option<String>,
    /// Runs whose final-100 mean reward is below this count as failed.
    #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
    threshold: f64,
    /// Directory for `comparison.csv` (defaults to the directory of A).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Saved actor network.
    #[arg(long)]
    model: PathBuf,
    /// JSON config describing the environment.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    episodes: usize,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Train(args) => train(args),
        Command::Compare(args) => compare_cmd(args),
        Command::Eval(args) => eval(args),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig, Failure> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => ExperimentConfig::load(p).map_err(|e| match e {
            Error::Io { path, source } => {
                Failure::Usage(format!("cannot read config {}: {source}", path.display()))
            }
            other => Failure::Usage(other.to_string()),
        }),
    }
}

fn train(args: TrainArgs) -> Result<(), Failure> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(agent) = args.agent {
        config.agent = agent;
    }
    if let Some(episodes) = args.episodes {
        config.episodes = episodes;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    config.validate()?;

    let quiet = args.quiet;
    let total = config.episodes;
    let every = (total / 20).max(1);
    let progress = move |r: &crate::harness::EpisodeRecord| {
        if !quiet && (r.episode.is_multiple_of(every) || r.episode + 1 == total) {
            eprintln!(
                "run {:>2} episode {:>5}: reward {:>9.2} steps {:>3} {}",
                r.run_id, r.episode, r.reward, r.steps, r.terminal
            );
        }
    };
    let output = run_experiment_with_progress(&config, &progress)?;

    println!("wrote {}", output.csv_path.display());
    for run in &output.runs {
        if let Some(msg) = &run.divergence {
            eprintln!("warning: {msg}");
        }
    }
    let curves = crate::harness::RunCurves::from_records(&output.records)?;
    for (run, mean) in curves.final_means(crate::harness::FINAL_WINDOW) {
        println!("run {run:>2}: final-{} mean reward {mean:.3}", crate::harness::FINAL_WINDOW);
    }
    Ok(())
}

fn label_for(path: &Path, explicit: Option<String>) -> String {
    explicit.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().trim_end_matches("_episodes").to_owned())
            .unwrap_or_else(|| path.display().to_string())
    })
}

fn compare_cmd(args: CompareArgs) -> Result<(), Failure> {
    let a = read_records(&args.a)?;
    let b = read_records(&args.b)?;
    let label_a = label_for(&args.a, args.label_a);
    let mut label_b = label_for(&args.b, args.label_b);
    if label_b == label_a {
        label_b.push_str("(b)");
    }
    let report = compare(&label_a, &a, &label_b, &b, args.threshold)?;
    print!("{}", report.to_text());

    let dir = args
        .out
        .unwrap_or_else(|| args.a.parent().map(Path::to_path_buf).unwrap_or_default());
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(&dir).map_err(|e| Failure::Runtime(Error::Io { path: dir.clone(), source: e }))?;
    }
    let path = dir.join("comparison.csv");
    std::fs::write(&path, report.to_csv())
        .map_err(|e| Failure::Runtime(Error::Io { path: path.clone(), source: e }))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let config = load_config(args.config.as_deref())?;
    let actor = DenseNet::load(&args.model)?;
    // the critic is unused for greedy rollouts
    let critic = DenseNet::init(&[EnvState::DIM + 3, 1], crate::nn::OutputActivation::Identity, 0)?;
    let nets = AgentNets::from_parts(actor, critic)?;
    let mut env = ArmEnv::new(config.env_config())?;

    for episode in 0..args.episodes {
        let mut state = env.reset();
        println!("episode {episode}");
        println!("step,x,y,z,j1,j2,j4,d1,d2,d4,reward,distance,terminal");
        let mut total = 0.0;
        loop {
            let action = nets.act_greedy(&state)?;
            let out = env.step(&action)?;
            total += out.reward;
            let [x, y, z] = out.next_state.tip;
            let [j1, j2, j4] = out.next_state.joints;
            let [d1, d2, d4] = out.applied.deltas;
            println!(
                "{},{x:.4},{y:.4},{z:.4},{j1:.4},{j2:.4},{j4:.4},{d1:.4},{d2:.4},{d4:.4},{},{:.4},{:?}",
                env.steps(),
                out.reward,
                out.distance,
                out.terminal
            );
            state = out.next_state;
            if out.terminal.is_terminal() {
                break;
            }
        }
        println!("episode {episode}: reward {total} in {} steps", env.steps());
    }
    Ok(())
}
