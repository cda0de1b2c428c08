use std::ops::ControlFlow;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, RunConfig};
use crate::agent::{self, UpdateReport};
use crate::envs::{self, Environment};
use crate::error::{Error, Result};
use crate::qnet::QNetwork;
use crate::replay::{ReplayBuffer, Transition};
use crate::seeding::{substream, Stream};

/// Returns of a batch of greedy evaluation games.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mean_score: f64,
    pub per_game: Vec<f64>,
}

/// Plays `n_games` greedy episodes, game `i` starting from `reset(seed + i)`.
pub fn evaluate(net: &QNetwork, env: &mut dyn Environment, n_games: usize, seed: u64) -> Result<Evaluation> {
    if n_games == 0 {
        return Err(Error::Config("n_games must be at least 1".into()));
    }
    let mut per_game = Vec::with_capacity(n_games);
    for i in 0..n_games {
        let mut state = env.reset(seed.wrapping_add(i as u64));
        let mut total = 0.0;
        loop {
            let step = env.step(agent::greedy_action(net, &state)?)?;
            total += step.reward;
            if step.done() {
                break;
            }
            state = step.next_state;
        }
        per_game.push(total);
    }
    let mean_score = per_game.iter().sum::<f64>() / n_games as f64;
    Ok(Evaluation { mean_score, per_game })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub step: usize,
    pub mean_eval_score: f64,
    /// Best single-game return in this evaluation.
    pub max_episode_score: f64,
    pub epsilon: f64,
    /// Mean of `max_j f_j` over updates since the previous record; `None`
    /// when no update ran.
    pub mean_phi: Option<f64>,
    /// Mean norm of the applied direction over the same updates.
    pub mean_step_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub max_eval_score: f64,
    /// First evaluation step whose mean score reached the solve threshold.
    pub step_to_solve: Option<usize>,
    /// Not covered by run determinism.
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub env: String,
    pub algorithm: Algorithm,
    pub group_size: usize,
    pub seed: u64,
    pub records: Vec<EvalRecord>,
    pub summary: RunSummary,
}

impl RunLog {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("run logs always serialize");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::RunLog {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Same run apart from wall-clock time.
    pub fn same_outcome(&self, other: &RunLog) -> bool {
        let strip = |l: &RunLog| {
            let mut l = l.clone();
            l.summary.wall_time_secs = 0.0;
            l
        };
        strip(self) == strip(other)
    }
}

/// A finished run together with its final online network.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub log: RunLog,
    pub network: QNetwork,
}

#[derive(Default)]
struct UpdateStats {
    phi: f64,
    norm: f64,
    count: usize,
}

impl UpdateStats {
    fn add(&mut self, r: &UpdateReport) {
        self.phi += r.max_loss();
        self.norm += r.step_norm;
        self.count += 1;
    }

    fn take(&mut self) -> (Option<f64>, Option<f64>) {
        let out = if self.count == 0 {
            (None, None)
        } else {
            (Some(self.phi / self.count as f64), Some(self.norm / self.count as f64))
        };
        *self = UpdateStats::default();
        out
    }
}

/// Runs one seeded training run to `max_step`.
pub fn train(config: &RunConfig, seed: u64) -> Result<RunLog> {
    Ok(train_with(config, seed, |_| ControlFlow::Continue(()))?.log)
}

/// Like [`train`], calling `on_eval` after every evaluation record; returning
/// `ControlFlow::Break` ends the run after that record.
pub fn train_with<F>(config: &RunConfig, seed: u64, mut on_eval: F) -> Result<TrainedRun>
where
    F: FnMut(&EvalRecord) -> ControlFlow<()>,
{
    config.validate()?;
    let started = Instant::now();
    let spec = envs::spec_for(&config.env)?;
    let mut env = envs::make(&config.env)?;
    let mut eval_env = envs::make(&config.env)?;
    let agent_cfg = config.agent_config();

    let mut env_rng = substream(seed, Stream::Env);
    let mut replay_rng = substream(seed, Stream::Replay);
    let mut explore_rng = substream(seed, Stream::Explore);
    let mut eval_rng = substream(seed, Stream::Eval);
    let init_seed: u64 = substream(seed, Stream::Init).gen();

    let mut online = QNetwork::init_with(&config.layer_sizes()?, config.activation, init_seed)?;
    let mut target = online.clone();
    let mut buffer = ReplayBuffer::new(config.replay_size)?;
    let mut stats = UpdateStats::default();
    let mut records = Vec::new();

    let mut record = |step: usize, net: &QNetwork, stats: &mut UpdateStats| -> Result<ControlFlow<()>> {
        let eval = evaluate(net, eval_env.as_mut(), config.eval_games, eval_rng.gen())?;
        let (mean_phi, mean_step_norm) = stats.take();
        let rec = EvalRecord {
            step,
            mean_eval_score: eval.mean_score,
            max_episode_score: eval.per_game.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            epsilon: agent_cfg.epsilon.value(step),
            mean_phi,
            mean_step_norm,
        };
        let flow = on_eval(&rec);
        records.push(rec);
        Ok(flow)
    };

    let mut flow = record(0, &online, &mut stats)?;
    let mut state = env.reset(env_rng.gen());
    let mut step = 0;
    while flow.is_continue() && step < config.max_step {
        step += 1;
        let epsilon = agent_cfg.epsilon.value(step - 1);
        let action = agent::select_action(&online, &state, epsilon, &mut explore_rng)?;
        let outcome = env.step(action)?;
        let done = outcome.done();
        buffer.push(Transition {
            state,
            action,
            reward: outcome.reward,
            next_state: outcome.next_state.clone(),
            terminal: outcome.terminated,
        });
        state = if done { env.reset(env_rng.gen()) } else { outcome.next_state };

        if buffer.len() >= agent_cfg.min_buffer() {
            let report = match config.algorithm {
                Algorithm::Ddqn => agent::ddqn_update(&mut online, &target, &buffer, &agent_cfg, &mut replay_rng)?,
                Algorithm::M2ddqn => agent::m2_update(&mut online, &target, &buffer, &agent_cfg, &mut replay_rng)?,
            };
            stats.add(&report);
        }
        agent::sync_target(&online, &mut target, step, &agent_cfg)?;

        if step % config.eval_interval == 0 || step == config.max_step {
            flow = record(step, &online, &mut stats)?;
        }
    }

    let max_eval_score = records.iter().map(|r| r.mean_eval_score).fold(f64::NEG_INFINITY, f64::max);
    let step_to_solve = spec
        .solve_threshold
        .and_then(|t| records.iter().find(|r| r.mean_eval_score >= t).map(|r| r.step));
    let log = RunLog {
        env: config.env.clone(),
        algorithm: config.algorithm,
        group_size: agent_cfg.group_size,
        seed,
        records,
        summary: RunSummary {
            max_eval_score,
            step_to_solve,
            wall_time_secs: started.elapsed().as_secs_f64(),
        },
    };
    Ok(TrainedRun { log, network: online })
}
