//! Double DQN learner and its max-mean multi-batch variant.
//!
//! Both updates share one pipeline: sample transitions, build double-Q
//! targets with the online network choosing the next action and the target
//! network scoring it, then take a plain gradient step. The max-mean update
//! samples `N` groups, solves the dual QP over their losses and gradients
//! and steps along `G^T lambda`; with `N = 1` it reduces exactly to the
//! single-batch update.

use rand::Rng;

use crate::error::{Error, Result};
use crate::minimax::{self, GroupObjective, SimplexWeights, SolverSettings};
use crate::qnet::{FlatGradient, QNetwork, Sample};
use crate::replay::{ReplayBuffer, Transition};

/// Linear decay from `start` to `end` over `decay_steps`, constant after.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_steps: usize,
}

impl EpsilonSchedule {
    pub fn value(&self, step: usize) -> f64 {
        if self.decay_steps == 0 || step >= self.decay_steps {
            return self.end;
        }
        let frac = step as f64 / self.decay_steps as f64;
        self.start + (self.end - self.start) * frac
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    /// Number of batches `N` per max-mean update.
    pub group_size: usize,
    /// Transitions per batch `K`.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub target_sync_interval: usize,
    pub epsilon: EpsilonSchedule,
    /// Updates start once the buffer holds at least this many transitions
    /// (and never before it holds `batch_size`).
    pub warmup_steps: usize,
    /// Dual QP stopping tolerance, relative to the scale of `f` and `G G^T`.
    pub qp_tolerance: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            group_size: 5,
            batch_size: 128,
            learning_rate: 5e-4,
            gamma: 0.99,
            target_sync_interval: 500,
            epsilon: EpsilonSchedule {
                start: 1.0,
                end: 0.05,
                decay_steps: 20_000,
            },
            warmup_steps: 128,
            qp_tolerance: 1e-10,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::Config(msg.to_string()));
        if self.group_size == 0 {
            return fail("group_size must be positive");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return fail("learning_rate must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail("gamma must lie in [0, 1]");
        }
        if self.target_sync_interval == 0 {
            return fail("target_sync_interval must be positive");
        }
        let e = self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) {
            return fail("epsilon values must lie in [0, 1]");
        }
        if !(self.qp_tolerance > 0.0) {
            return fail("qp_tolerance must be positive");
        }
        Ok(())
    }

    /// Buffer size required before the first update.
    pub fn min_buffer(&self) -> usize {
        self.warmup_steps.max(self.batch_size)
    }
}

/// Diagnostics from one update.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateReport {
    /// Group losses before the step.
    pub losses: Vec<f64>,
    pub weights: SimplexWeights,
    /// Norm of the applied direction `G^T lambda` (before scaling by the
    /// learning rate).
    pub step_norm: f64,
}

impl UpdateReport {
    /// `Phi = max_j f_j`.
    pub fn max_loss(&self) -> f64 {
        self.losses.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy action. One uniform draw decides exploration; a second
/// picks the random action when exploring.
pub fn select_action<R: Rng + ?Sized>(net: &QNetwork, state: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    if rng.gen::<f64>() < epsilon {
        return Ok(rng.gen_range(0..net.n_actions()));
    }
    Ok(argmax(&net.q_values(state)?))
}

pub fn greedy_action(net: &QNetwork, state: &[f64]) -> Result<usize> {
    Ok(argmax(&net.q_values(state)?))
}

/// Double-Q targets `r + gamma * Q'(s', argmax_a Q(s', a))`, or `r` for
/// terminal transitions.
pub fn compute_targets(online: &QNetwork, target: &QNetwork, batch: &[&Transition], gamma: f64) -> Result<Vec<f64>> {
    if !online.same_architecture(target) {
        return Err(Error::ArchitectureMismatch(
            online.layer_sizes().to_vec(),
            target.layer_sizes().to_vec(),
        ));
    }
    let n_actions = online.n_actions();
    let next: Vec<f64> = batch.iter().flat_map(|t| t.next_state.iter().copied()).collect();
    let q_online = online.forward(&next)?;
    let q_target = target.forward(&next)?;
    Ok(batch
        .iter()
        .enumerate()
        .map(|(k, t)| {
            if t.terminal {
                t.reward
            } else {
                let row = k * n_actions..(k + 1) * n_actions;
                let best = argmax(&q_online[row.clone()]);
                t.reward + gamma * q_target[row][best]
            }
        })
        .collect())
}

fn group_loss(net: &QNetwork, group: &[&Transition], targets: &[f64]) -> Result<(f64, FlatGradient)> {
    let samples: Vec<Sample> = group
        .iter()
        .zip(targets)
        .map(|(t, &y)| Sample {
            state: &t.state,
            action: t.action,
            target: y,
        })
        .collect();
    net.group_loss_and_grad(&samples)
}

/// Max-mean update: `theta <- theta - alpha * G^T lambda`.
pub fn m2_update<R: Rng + ?Sized>(
    online: &mut QNetwork,
    target: &QNetwork,
    buffer: &ReplayBuffer,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<UpdateReport> {
    let groups = buffer.sample_groups(config.group_size, config.batch_size, rng)?;
    let flat: Vec<&Transition> = groups.iter().flatten().copied().collect();
    let targets = compute_targets(online, target, &flat, config.gamma)?;

    let mut losses = Vec::with_capacity(groups.len());
    let mut rows = Vec::with_capacity(groups.len());
    for (j, group) in groups.iter().enumerate() {
        let k = config.batch_size;
        let (loss, grad) = group_loss(online, group, &targets[j * k..(j + 1) * k])?;
        losses.push(loss);
        rows.push(grad);
    }
    let objective = GroupObjective::from_rows(losses.clone(), &rows)?;
    let weights = solve_weights(&objective, config.qp_tolerance)?;
    let direction = objective.combine(&weights)?;
    online.apply_step(&direction, config.learning_rate)?;
    Ok(UpdateReport {
        losses,
        weights,
        step_norm: direction.norm(),
    })
}

/// Solves the dual QP with a tolerance scaled to the instance.
pub fn solve_weights(objective: &GroupObjective, relative_tolerance: f64) -> Result<SimplexWeights> {
    if objective.n_groups() == 1 {
        return Ok(SimplexWeights::vertex(1, 0));
    }
    let gram = objective.gram();
    let n = objective.n_groups();
    let scale = (0..n)
        .map(|i| gram[i * n + i])
        .chain(objective.losses().iter().copied())
        .fold(1.0, f64::max);
    let settings = SolverSettings::with_tolerance(relative_tolerance * scale);
    Ok(minimax::solve_dual_with(objective, &settings)?.weights)
}

/// Single-batch Double DQN update: `theta <- theta - alpha * grad f`.
pub fn ddqn_update<R: Rng + ?Sized>(
    online: &mut QNetwork,
    target: &QNetwork,
    buffer: &ReplayBuffer,
    config: &AgentConfig,
    rng: &mut R,
) -> Result<UpdateReport> {
    let batch = buffer.sample_batch(config.batch_size, rng)?;
    let targets = compute_targets(online, target, &batch, config.gamma)?;
    let (loss, grad) = group_loss(online, &batch, &targets)?;
    online.apply_step(&grad, config.learning_rate)?;
    Ok(UpdateReport {
        losses: vec![loss],
        weights: SimplexWeights::vertex(1, 0),
        step_norm: grad.norm(),
    })
}

/// Copies the online weights into the target network every
/// `target_sync_interval` steps. Returns whether a copy happened.
pub fn sync_target(online: &QNetwork, target: &mut QNetwork, step: usize, config: &AgentConfig) -> Result<bool> {
    if step % config.target_sync_interval == 0 {
        online.copy_into(target)?;
        return Ok(true);
    }
    Ok(false)
}
