use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::constants::mountain_car::*;
use super::{EnvSpec, Environment, EpisodeClock, StepResult, MOUNTAIN_CAR};
use crate::error::Result;

/// Under-powered car in a valley that has to rock back and forth to reach
/// the flag at `GOAL_POSITION`.
///
/// Observation is `[position, velocity]`. Actions: 0 accelerate left,
/// 1 coast, 2 accelerate right. Reward is -1 every step.
#[derive(Debug, Clone)]
pub struct MountainCar {
    state: [f64; 2],
    clock: EpisodeClock,
    rng: ChaCha8Rng,
}

impl MountainCar {
    pub const SPEC: EnvSpec = EnvSpec {
        name: MOUNTAIN_CAR,
        state_dim: 2,
        n_actions: 3,
        max_episode_steps: MAX_EPISODE_STEPS,
        solve_threshold: Some(SOLVE_THRESHOLD),
    };

    pub fn new() -> Self {
        let mut env = MountainCar {
            state: [0.0; 2],
            clock: EpisodeClock::default(),
            rng: ChaCha8Rng::seed_from_u64(0),
        };
        env.reset(0);
        env
    }

    pub fn state(&self) -> [f64; 2] {
        self.state
    }

    pub fn set_state(&mut self, state: [f64; 2]) {
        self.state = state;
        self.clock.restart();
    }

    pub fn dynamics(state: [f64; 2], action: usize) -> [f64; 2] {
        let [mut position, mut velocity] = state;
        velocity += (action as f64 - 1.0) * FORCE + (3.0 * position).cos() * (-GRAVITY);
        velocity = velocity.clamp(-MAX_SPEED, MAX_SPEED);
        position += velocity;
        position = position.clamp(MIN_POSITION, MAX_POSITION);
        if position == MIN_POSITION && velocity < 0.0 {
            velocity = 0.0;
        }
        [position, velocity]
    }
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> EnvSpec {
        Self::SPEC
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.state = [self.rng.gen_range(INIT_LOW..INIT_HIGH), 0.0];
        self.clock.restart();
        self.state.to_vec()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, Self::SPEC.n_actions)?;
        self.state = Self::dynamics(self.state, action);
        let [position, velocity] = self.state;
        let terminated = position >= GOAL_POSITION && velocity >= GOAL_VELOCITY;
        let truncated = self.clock.tick(terminated, MAX_EPISODE_STEPS);
        Ok(StepResult {
            next_state: self.state.to_vec(),
            reward: -1.0,
            terminated,
            truncated,
        })
    }

    fn observation(&self) -> Vec<f64> {
        self.state.to_vec()
    }
}
