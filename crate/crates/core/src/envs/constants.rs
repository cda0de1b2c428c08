//! Physical constants of the classic-control tasks.
//!
//! Values follow the gym `CartPole-v1`, `MountainCar-v0` and `Acrobot-v1`
//! definitions. The integrators in the sibling modules evaluate each
//! expression in the same order as the gym sources, with `x * x` in place of
//! `x ** 2`, so that a re-implementation following the same order reproduces
//! trajectories bit for bit.

pub mod cartpole {
    pub const GRAVITY: f64 = 9.8;
    pub const MASS_CART: f64 = 1.0;
    pub const MASS_POLE: f64 = 0.1;
    pub const TOTAL_MASS: f64 = MASS_POLE + MASS_CART;
    /// Half the pole length.
    pub const LENGTH: f64 = 0.5;
    pub const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
    pub const FORCE_MAG: f64 = 10.0;
    /// Seconds between state updates (explicit Euler).
    pub const TAU: f64 = 0.02;
    /// 12 degrees in radians.
    pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
    pub const X_THRESHOLD: f64 = 2.4;
    /// Each state coordinate starts uniform in `[-INIT_BOUND, INIT_BOUND)`.
    pub const INIT_BOUND: f64 = 0.05;
    pub const MAX_EPISODE_STEPS: usize = 500;
    pub const SOLVE_THRESHOLD: f64 = 495.0;
}

pub mod mountain_car {
    pub const MIN_POSITION: f64 = -1.2;
    pub const MAX_POSITION: f64 = 0.6;
    pub const MAX_SPEED: f64 = 0.07;
    pub const GOAL_POSITION: f64 = 0.5;
    pub const GOAL_VELOCITY: f64 = 0.0;
    pub const FORCE: f64 = 0.001;
    pub const GRAVITY: f64 = 0.0025;
    pub const INIT_LOW: f64 = -0.6;
    pub const INIT_HIGH: f64 = -0.4;
    pub const MAX_EPISODE_STEPS: usize = 200;
    pub const SOLVE_THRESHOLD: f64 = -110.0;
}

pub mod acrobot {
    use std::f64::consts::PI;

    /// Integration step (one RK4 step per environment tick).
    pub const DT: f64 = 0.2;
    pub const LINK_LENGTH_1: f64 = 1.0;
    pub const LINK_MASS_1: f64 = 1.0;
    pub const LINK_MASS_2: f64 = 1.0;
    pub const LINK_COM_POS_1: f64 = 0.5;
    pub const LINK_COM_POS_2: f64 = 0.5;
    pub const LINK_MOI: f64 = 1.0;
    pub const GRAVITY: f64 = 9.8;
    pub const MAX_VEL_1: f64 = 4.0 * PI;
    pub const MAX_VEL_2: f64 = 9.0 * PI;
    /// Torque applied for actions 0, 1 and 2.
    pub const AVAIL_TORQUE: [f64; 3] = [-1.0, 0.0, 1.0];
    pub const INIT_BOUND: f64 = 0.1;
    pub const MAX_EPISODE_STEPS: usize = 500;
}

pub mod lunar_lander {
    pub const SOLVE_THRESHOLD: f64 = 200.0;
}
