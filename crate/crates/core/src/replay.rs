//! Fixed-capacity experience replay with uniform sampling.

use rand::Rng;

use crate::error::{Error, Result};

/// One `(s, a, r, s', terminal)` experience.
///
/// `terminal` is set only when the task itself ended the episode; a
/// time-limit truncation still bootstraps from `next_state`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Ring buffer holding the most recent `capacity` transitions.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    cursor: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::Config("replay capacity must be positive".into()));
        }
        Ok(ReplayBuffer {
            capacity,
            storage: Vec::with_capacity(capacity.min(1 << 16)),
            cursor: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Appends `t`, evicting the oldest transition once full.
    pub fn push(&mut self, t: Transition) {
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.cursor] = t;
        }
        self.cursor = (self.cursor + 1) % self.capacity;
    }

    /// Contents from oldest to newest.
    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.storage.len() < self.capacity { 0 } else { self.cursor };
        self.storage[split..].iter().chain(self.storage[..split].iter())
    }

    /// `k` independent uniform draws, with replacement.
    pub fn sample_batch<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Vec<&Transition>> {
        if self.storage.is_empty() {
            return Err(Error::Empty("replay buffer"));
        }
        Ok((0..k).map(|_| &self.storage[rng.gen_range(0..self.storage.len())]).collect())
    }

    /// `n` groups, each an independent [`sample_batch`](Self::sample_batch)
    /// of size `k`. Groups may share transitions.
    pub fn sample_groups<R: Rng + ?Sized>(&self, n: usize, k: usize, rng: &mut R) -> Result<Vec<Vec<&Transition>>> {
        (0..n).map(|_| self.sample_batch(k, rng)).collect()
    }
}
