use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use m2dqn::harness::{self, RunConfig, RunLog};
use m2dqn::qnet::checkpoint;
use m2dqn::{envs, Error};

#[derive(Parser)]
#[command(name = "m2dqn", version, about = "Max-mean multi-batch Double DQN")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one run per seed and write the JSON log, CSV curve and final network.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's seed list with a single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy evaluation of a saved network.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 50)]
        games: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Normalize variant runs against a DDQN baseline.
    Compare {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        variant: Vec<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

fn run_train(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = RunConfig::from_file(config).map_err(|e| Failure::Config(e.to_string()))?;
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    std::fs::create_dir_all(&cfg.output_dir)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", cfg.output_dir.display())))?;
    for &s in &cfg.seeds {
        let run = harness::train_with(&cfg, s, |_| std::ops::ControlFlow::Continue(()))?;
        let stem = cfg.output_dir.join(format!("{}-{}-seed{}", cfg.env, cfg.arm_label(), s));
        run.log.save_json(stem.with_extension("json"))?;
        harness::emit_csv(&run.log, stem.with_extension("csv"))?;
        checkpoint::save(&run.network, stem.with_extension("net"))?;
        let summary = &run.log.summary;
        let solved = summary
            .step_to_solve
            .map_or_else(|| "-".to_string(), |step| step.to_string());
        println!(
            "{} {} seed={} max_eval_score={:.2} step_to_solve={} time={:.1}s",
            cfg.env,
            cfg.arm_label(),
            s,
            summary.max_eval_score,
            solved,
            summary.wall_time_secs
        );
    }
    Ok(())
}

fn run_eval(path: &Path, env: &str, games: usize, seed: u64) -> Result<(), Failure> {
    if games == 0 {
        return Err(Failure::Config("--games must be positive".into()));
    }
    let mut env = envs::make(env)?;
    let net = checkpoint::load(path)?;
    let eval = harness::evaluate(&net, env.as_mut(), games, seed)?;
    println!("mean_score={:.4} games={}", eval.mean_score, games);
    Ok(())
}

fn run_compare(baseline: &Path, variants: &[PathBuf]) -> Result<(), Failure> {
    let base = RunLog::load_json(baseline)?;
    let variants = variants
        .iter()
        .map(RunLog::load_json)
        .collect::<Result<Vec<_>, _>>()?;
    print!("{}", harness::compare_against(&base, &variants)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Train { config, seed, out } => run_train(&config, seed, out),
        Command::Eval {
            checkpoint,
            env,
            games,
            seed,
        } => run_eval(&checkpoint, &env, games, seed),
        Command::Compare { baseline, variant } => run_compare(&baseline, &variant),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
