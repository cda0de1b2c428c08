use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::constants::cartpole::*;
use super::{EnvSpec, Environment, EpisodeClock, StepResult, CARTPOLE};
use crate::error::Result;

/// Pole balanced on a cart moving along a frictionless track.
///
/// State `[x, x_dot, theta, theta_dot]` is also the observation. Action 0
/// pushes left, action 1 pushes right. Every step, including the one that
/// terminates the episode, earns +1.
#[derive(Debug, Clone)]
pub struct CartPole {
    state: [f64; 4],
    clock: EpisodeClock,
    rng: ChaCha8Rng,
}

impl CartPole {
    pub const SPEC: EnvSpec = EnvSpec {
        name: CARTPOLE,
        state_dim: 4,
        n_actions: 2,
        max_episode_steps: MAX_EPISODE_STEPS,
        solve_threshold: Some(SOLVE_THRESHOLD),
    };

    pub fn new() -> Self {
        let mut env = CartPole {
            state: [0.0; 4],
            clock: EpisodeClock::default(),
            rng: ChaCha8Rng::seed_from_u64(0),
        };
        env.reset(0);
        env
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    /// Overwrites the physical state and restarts the episode clock.
    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.clock.restart();
    }

    /// One explicit-Euler tick of the cart-pole equations of motion.
    pub fn dynamics(state: [f64; 4], action: usize) -> [f64; 4] {
        let [x, x_dot, theta, theta_dot] = state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let cos_theta = theta.cos();
        let sin_theta = theta.sin();

        let temp = (force + POLE_MASS_LENGTH * (theta_dot * theta_dot) * sin_theta) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin_theta - cos_theta * temp)
            / (LENGTH * (4.0 / 3.0 - MASS_POLE * (cos_theta * cos_theta) / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_theta / TOTAL_MASS;

        [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ]
    }
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for CartPole {
    fn spec(&self) -> EnvSpec {
        Self::SPEC
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        for v in self.state.iter_mut() {
            *v = self.rng.gen_range(-INIT_BOUND..INIT_BOUND);
        }
        self.clock.restart();
        self.state.to_vec()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, Self::SPEC.n_actions)?;
        self.state = Self::dynamics(self.state, action);
        let [x, _, theta, _] = self.state;
        let terminated = !(-X_THRESHOLD..=X_THRESHOLD).contains(&x)
            || !(-THETA_THRESHOLD..=THETA_THRESHOLD).contains(&theta);
        let truncated = self.clock.tick(terminated, MAX_EPISODE_STEPS);
        Ok(StepResult {
            next_state: self.state.to_vec(),
            reward: 1.0,
            terminated,
            truncated,
        })
    }

    fn observation(&self) -> Vec<f64> {
        self.state.to_vec()
    }
}
