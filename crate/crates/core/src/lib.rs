//! Deep Q-learning with a max-mean multi-batch loss.
//!
//! Instead of one replay batch per step, the learner draws `N` batches and
//! moves the Q-network along a direction that reduces the largest of the
//! per-batch mean squared TD errors. The direction comes from a small
//! simplex-constrained QP whose size is `N`, independent of the parameter
//! count.
//!
//! Modules:
//! - [`envs`]: CartPole, MountainCar and Acrobot dynamics.
//! - [`qnet`]: dense Q-network with exact gradients and checkpoints.
//! - [`replay`]: ring-buffer experience replay.
//! - [`minimax`]: dual QP solver and descent direction.
//! - [`agent`]: Double DQN and max-mean updates.
//! - [`harness`]: training runs, evaluation, reports and CSV output.

pub mod agent;
pub mod envs;
pub mod error;
pub mod harness;
pub mod minimax;
pub mod qnet;
pub mod replay;
pub mod seeding;

pub use error::{Error, Result};
