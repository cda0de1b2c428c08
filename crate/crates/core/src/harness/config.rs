//! Run configuration and its flat `key = value` file format.
//!
//! One setting per line, `#` starts a comment, keys are the field names of
//! [`RunConfig`]. `env` is required; every other key falls back to the
//! defaults for that environment. Lists (`hidden_layers`, `seeds`) are
//! comma separated, optionally wrapped in parentheses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::{AgentConfig, EpsilonSchedule};
use crate::envs;
use crate::error::{Error, Result};
use crate::qnet::Activation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ddqn,
    M2ddqn,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ddqn => "ddqn",
            Algorithm::M2ddqn => "m2ddqn",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "ddqn" => Some(Algorithm::Ddqn),
            "m2ddqn" => Some(Algorithm::M2ddqn),
            _ => None,
        }
    }
}

/// Network and schedule sizes per task.
struct TaskDefaults {
    hidden_layers: &'static [usize],
    max_step: usize,
    replay_size: usize,
}

fn task_defaults(env: &str) -> Result<TaskDefaults> {
    let d = match env {
        envs::CARTPOLE => TaskDefaults {
            hidden_layers: &[128, 64, 64],
            max_step: 200_000,
            replay_size: 10_000,
        },
        envs::LUNAR_LANDER => TaskDefaults {
            hidden_layers: &[128, 64, 64],
            max_step: 1_000_000,
            replay_size: 50_000,
        },
        envs::MOUNTAIN_CAR => TaskDefaults {
            hidden_layers: &[64, 32, 32],
            max_step: 1_000_000,
            replay_size: 50_000,
        },
        envs::ACROBOT => TaskDefaults {
            hidden_layers: &[64, 32, 32],
            max_step: 60_000,
            replay_size: 3_000,
        },
        other => return Err(Error::UnknownEnv(other.to_string())),
    };
    Ok(d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub algorithm: Algorithm,
    pub group_size: usize,
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub max_step: usize,
    pub replay_size: usize,
    pub batch_size: usize,
    pub gamma: f64,
    pub eval_interval: usize,
    pub eval_games: usize,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    pub target_sync_interval: usize,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// `None` decays over a tenth of `max_step`.
    pub epsilon_decay_steps: Option<usize>,
    pub warmup_steps: usize,
    pub activation: Activation,
    pub qp_tolerance: f64,
}

const KEYS: &[&str] = &[
    "env",
    "algorithm",
    "group_size",
    "hidden_layers",
    "learning_rate",
    "max_step",
    "replay_size",
    "batch_size",
    "gamma",
    "eval_interval",
    "eval_games",
    "seeds",
    "output_dir",
    "target_sync_interval",
    "epsilon_start",
    "epsilon_end",
    "epsilon_decay_steps",
    "warmup_steps",
    "activation",
    "qp_tolerance",
];

impl RunConfig {
    /// Defaults for `env`: its network size, step budget and replay size,
    /// with batch 128, learning rate 5e-4 and discount 0.99 everywhere.
    pub fn for_env(env: &str) -> Result<Self> {
        let d = task_defaults(env)?;
        Ok(RunConfig {
            env: env.to_string(),
            algorithm: Algorithm::M2ddqn,
            group_size: 5,
            hidden_layers: d.hidden_layers.to_vec(),
            learning_rate: 5e-4,
            max_step: d.max_step,
            replay_size: d.replay_size,
            batch_size: 128,
            gamma: 0.99,
            eval_interval: 2000,
            eval_games: 50,
            seeds: vec![0],
            output_dir: PathBuf::from("runs"),
            target_sync_interval: 500,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_steps: None,
            warmup_steps: 128,
            activation: Activation::Relu,
            qp_tolerance: 1e-10,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", idx + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::Config(format!("line {}: unknown key `{key}`", idx + 1)));
            }
            if entries.insert(key, (idx + 1, value.trim())).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", idx + 1)));
            }
        }
        let (_, env) = entries
            .remove("env")
            .ok_or_else(|| Error::Config("missing required key `env`".into()))?;
        let mut cfg = Self::for_env(env).map_err(|e| Error::Config(e.to_string()))?;
        for (key, (line, value)) in entries {
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {line}: `{key}`: {e}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("cannot parse `{v}`"))
        }
        fn list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
            let inner = v.trim().trim_start_matches('(').trim_end_matches(')');
            inner
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(num)
                .collect()
        }
        match key {
            "algorithm" => {
                self.algorithm = Algorithm::from_name(value).ok_or(format!("unknown algorithm `{value}`"))?
            }
            "group_size" => self.group_size = num(value)?,
            "hidden_layers" => self.hidden_layers = list(value)?,
            "learning_rate" => self.learning_rate = num(value)?,
            "max_step" => self.max_step = num(value)?,
            "replay_size" => self.replay_size = num(value)?,
            "batch_size" => self.batch_size = num(value)?,
            "gamma" => self.gamma = num(value)?,
            "eval_interval" => self.eval_interval = num(value)?,
            "eval_games" => self.eval_games = num(value)?,
            "seeds" => self.seeds = list(value)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "target_sync_interval" => self.target_sync_interval = num(value)?,
            "epsilon_start" => self.epsilon_start = num(value)?,
            "epsilon_end" => self.epsilon_end = num(value)?,
            "epsilon_decay_steps" => self.epsilon_decay_steps = Some(num(value)?),
            "warmup_steps" => self.warmup_steps = num(value)?,
            "activation" => {
                self.activation = Activation::from_name(value).ok_or(format!("unknown activation `{value}`"))?
            }
            "qp_tolerance" => self.qp_tolerance = num(value)?,
            _ => unreachable!("key list checked by the caller"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        envs::spec_for(&self.env).map_err(|e| Error::Config(e.to_string()))?;
        if self.hidden_layers.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".into()));
        }
        if self.replay_size == 0 {
            return Err(Error::Config("replay_size must be positive".into()));
        }
        if self.eval_interval == 0 {
            return Err(Error::Config("eval_interval must be positive".into()));
        }
        if self.eval_games == 0 {
            return Err(Error::Config("eval_games must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        self.agent_config().validate()
    }

    pub fn epsilon_schedule(&self) -> EpsilonSchedule {
        EpsilonSchedule {
            start: self.epsilon_start,
            end: self.epsilon_end,
            decay_steps: self.epsilon_decay_steps.unwrap_or(self.max_step / 10),
        }
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            group_size: match self.algorithm {
                Algorithm::Ddqn => 1,
                Algorithm::M2ddqn => self.group_size,
            },
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            gamma: self.gamma,
            target_sync_interval: self.target_sync_interval,
            epsilon: self.epsilon_schedule(),
            warmup_steps: self.warmup_steps,
            qp_tolerance: self.qp_tolerance,
        }
    }

    /// Full layer sizes including input and output.
    pub fn layer_sizes(&self) -> Result<Vec<usize>> {
        let spec = envs::spec_for(&self.env)?;
        let mut sizes = vec![spec.state_dim];
        sizes.extend_from_slice(&self.hidden_layers);
        sizes.push(spec.n_actions);
        Ok(sizes)
    }

    /// Short arm label such as `m2ddqn-n5` or `ddqn`.
    pub fn arm_label(&self) -> String {
        match self.algorithm {
            Algorithm::Ddqn => "ddqn".to_string(),
            Algorithm::M2ddqn => format!("m2ddqn-n{}", self.group_size),
        }
    }

    /// Serializes every field in the config-file format; `parse` reads it
    /// back unchanged.
    pub fn to_text(&self) -> String {
        let join = |v: &[String]| v.join(",");
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("env", self.env.clone());
        line("algorithm", self.algorithm.name().into());
        line("group_size", self.group_size.to_string());
        line("hidden_layers", join(&self.hidden_layers.iter().map(|v| v.to_string()).collect::<Vec<_>>()));
        line("learning_rate", format!("{:?}", self.learning_rate));
        line("max_step", self.max_step.to_string());
        line("replay_size", self.replay_size.to_string());
        line("batch_size", self.batch_size.to_string());
        line("gamma", format!("{:?}", self.gamma));
        line("eval_interval", self.eval_interval.to_string());
        line("eval_games", self.eval_games.to_string());
        line("seeds", join(&self.seeds.iter().map(|v| v.to_string()).collect::<Vec<_>>()));
        line("output_dir", self.output_dir.display().to_string());
        line("target_sync_interval", self.target_sync_interval.to_string());
        line("epsilon_start", format!("{:?}", self.epsilon_start));
        line("epsilon_end", format!("{:?}", self.epsilon_end));
        if let Some(d) = self.epsilon_decay_steps {
            line("epsilon_decay_steps", d.to_string());
        }
        line("warmup_steps", self.warmup_steps.to_string());
        line("activation", self.activation.name().into());
        line("qp_tolerance", format!("{:?}", self.qp_tolerance));
        s
    }
}
