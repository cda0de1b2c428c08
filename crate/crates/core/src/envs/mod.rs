//! Classic-control environments behind a single [`Environment`] interface.
//!
//! Every environment owns a seeded ChaCha generator that is re-seeded on
//! [`Environment::reset`], so a `(seed, action sequence)` pair fixes the
//! whole trajectory.

mod acrobot;
mod cartpole;
pub mod constants;
mod mountain_car;

pub use acrobot::Acrobot;
pub use cartpole::CartPole;
pub use mountain_car::MountainCar;

use crate::error::{Error, Result};

pub const CARTPOLE: &str = "CartPole-v1";
pub const MOUNTAIN_CAR: &str = "MountainCar-v0";
pub const ACROBOT: &str = "Acrobot-v1";
pub const LUNAR_LANDER: &str = "LunarLander-v2";

/// Static description of a task.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: &'static str,
    pub state_dim: usize,
    pub n_actions: usize,
    pub max_episode_steps: usize,
    /// Mean evaluation score that counts as solving the task. `None` for
    /// tasks without a reward threshold (Acrobot).
    pub solve_threshold: Option<f64>,
}

/// Outcome of a single environment tick.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_state: Vec<f64>,
    pub reward: f64,
    /// The task reached a terminal state.
    pub terminated: bool,
    /// The episode hit the time limit without terminating.
    pub truncated: bool,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

pub trait Environment: Send {
    fn spec(&self) -> EnvSpec;

    /// Draws a fresh initial state from a generator seeded with `seed` and
    /// zeroes the step counter.
    fn reset(&mut self, seed: u64) -> Vec<f64>;

    /// Advances the simulation one tick.
    ///
    /// Fails on an out-of-range action, or when the episode has already
    /// terminated or been truncated.
    fn step(&mut self, action: usize) -> Result<StepResult>;

    /// Current observation.
    fn observation(&self) -> Vec<f64>;
}

/// Looks up the static spec of a task by name without constructing it.
pub fn spec_for(name: &str) -> Result<EnvSpec> {
    match name {
        CARTPOLE => Ok(CartPole::SPEC),
        MOUNTAIN_CAR => Ok(MountainCar::SPEC),
        ACROBOT => Ok(Acrobot::SPEC),
        LUNAR_LANDER => Ok(EnvSpec {
            name: LUNAR_LANDER,
            state_dim: 8,
            n_actions: 4,
            max_episode_steps: 1000,
            solve_threshold: Some(constants::lunar_lander::SOLVE_THRESHOLD),
        }),
        other => Err(Error::UnknownEnv(other.to_string())),
    }
}

/// Builds an environment from its gym-style name.
pub fn make(name: &str) -> Result<Box<dyn Environment>> {
    match name {
        CARTPOLE => Ok(Box::new(CartPole::new())),
        MOUNTAIN_CAR => Ok(Box::new(MountainCar::new())),
        ACROBOT => Ok(Box::new(Acrobot::new())),
        LUNAR_LANDER => Err(Error::UnsupportedEnv {
            name: name.to_string(),
            reason: "it needs a Box2D rigid-body physics engine, which is not bundled",
        }),
        other => Err(Error::UnknownEnv(other.to_string())),
    }
}

/// Step counter and finished flag shared by all tasks.
#[derive(Debug, Clone, Default)]
pub(crate) struct EpisodeClock {
    steps: usize,
    finished: bool,
}

impl EpisodeClock {
    pub(crate) fn restart(&mut self) {
        self.steps = 0;
        self.finished = false;
    }

    pub(crate) fn check(&self, action: usize, n_actions: usize) -> Result<()> {
        if action >= n_actions {
            return Err(Error::InvalidAction { action, n_actions });
        }
        if self.finished {
            return Err(Error::EpisodeFinished);
        }
        Ok(())
    }

    /// Records one tick; returns the truncation flag.
    pub(crate) fn tick(&mut self, terminated: bool, limit: usize) -> bool {
        self.steps += 1;
        let truncated = !terminated && self.steps >= limit;
        self.finished = terminated || truncated;
        truncated
    }
}
