use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::constants::acrobot::*;
use super::{EnvSpec, Environment, EpisodeClock, StepResult, ACROBOT};
use crate::error::Result;

/// Two-link pendulum actuated at the middle joint.
///
/// Internal state is `[theta1, theta2, dtheta1, dtheta2]`; the observation is
/// `[cos theta1, sin theta1, cos theta2, sin theta2, dtheta1, dtheta2]`.
/// Reward is -1 per step and 0 on the step that lifts the tip above the bar.
/// Dynamics use the "book" equations integrated with one classic RK4 step of
/// length `DT`.
#[derive(Debug, Clone)]
pub struct Acrobot {
    state: [f64; 4],
    clock: EpisodeClock,
    rng: ChaCha8Rng,
}

impl Acrobot {
    pub const SPEC: EnvSpec = EnvSpec {
        name: ACROBOT,
        state_dim: 6,
        n_actions: 3,
        max_episode_steps: MAX_EPISODE_STEPS,
        solve_threshold: None,
    };

    pub fn new() -> Self {
        let mut env = Acrobot {
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

    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
        self.clock.restart();
    }

    pub fn observe(state: [f64; 4]) -> Vec<f64> {
        let [t1, t2, dt1, dt2] = state;
        vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), dt1, dt2]
    }

    pub fn is_terminal(state: [f64; 4]) -> bool {
        -state[0].cos() - (state[1] + state[0]).cos() > 1.0
    }

    /// Time derivative of the torque-augmented state `[.., torque]`.
    fn derivatives(s: [f64; 5]) -> [f64; 5] {
        let m1 = LINK_MASS_1;
        let m2 = LINK_MASS_2;
        let l1 = LINK_LENGTH_1;
        let lc1 = LINK_COM_POS_1;
        let lc2 = LINK_COM_POS_2;
        let i1 = LINK_MOI;
        let i2 = LINK_MOI;
        let g = GRAVITY;
        let [theta1, theta2, dtheta1, dtheta2, a] = s;

        let d1 = m1 * (lc1 * lc1) + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
        let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
        let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
        let phi1 = -m2 * l1 * lc2 * (dtheta2 * dtheta2) * theta2.sin()
            - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
            + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
            + phi2;
        let ddtheta2 = (a + d2 / d1 * phi1 - m2 * l1 * lc2 * (dtheta1 * dtheta1) * theta2.sin() - phi2)
            / (m2 * (lc2 * lc2) + i2 - (d2 * d2) / d1);
        let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
        [dtheta1, dtheta2, ddtheta1, ddtheta2, 0.0]
    }

    fn rk4(y0: [f64; 5], dt: f64) -> [f64; 5] {
        let dt2 = dt / 2.0;
        let axpy = |y: [f64; 5], h: f64, k: [f64; 5]| -> [f64; 5] {
            std::array::from_fn(|i| y[i] + h * k[i])
        };
        let k1 = Self::derivatives(y0);
        let k2 = Self::derivatives(axpy(y0, dt2, k1));
        let k3 = Self::derivatives(axpy(y0, dt2, k2));
        let k4 = Self::derivatives(axpy(y0, dt, k3));
        std::array::from_fn(|i| y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
    }

    /// One tick: RK4 integration, angle wrapping to `[-pi, pi]` and
    /// velocity clamping.
    pub fn dynamics(state: [f64; 4], action: usize) -> [f64; 4] {
        let torque = AVAIL_TORQUE[action];
        let [t1, t2, dt1, dt2] = state;
        let ns = Self::rk4([t1, t2, dt1, dt2, torque], DT);
        [
            wrap(ns[0], -PI, PI),
            wrap(ns[1], -PI, PI),
            ns[2].clamp(-MAX_VEL_1, MAX_VEL_1),
            ns[3].clamp(-MAX_VEL_2, MAX_VEL_2),
        ]
    }
}

fn wrap(mut x: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    while x > hi {
        x -= span;
    }
    while x < lo {
        x += span;
    }
    x
}

impl Default for Acrobot {
    fn default() -> Self {
        Self::new()
    }
}

impl Environment for Acrobot {
    fn spec(&self) -> EnvSpec {
        Self::SPEC
    }

    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        for v in self.state.iter_mut() {
            *v = self.rng.gen_range(-INIT_BOUND..INIT_BOUND);
        }
        self.clock.restart();
        Self::observe(self.state)
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        self.clock.check(action, Self::SPEC.n_actions)?;
        self.state = Self::dynamics(self.state, action);
        let terminated = Self::is_terminal(self.state);
        let truncated = self.clock.tick(terminated, MAX_EPISODE_STEPS);
        Ok(StepResult {
            next_state: Self::observe(self.state),
            reward: if terminated { 0.0 } else { -1.0 },
            terminated,
            truncated,
        })
    }

    fn observation(&self) -> Vec<f64> {
        Self::observe(self.state)
    }
}
