//! Dense feed-forward Q-network with exact reverse-mode gradients.
//!
//! All parameters live in one flat vector in canonical layout: layers in
//! order, and within a layer the weight matrix (row-major, `fan_out x fan_in`)
//! before the bias vector. Gradients and update directions use the same
//! layout, so they can be stacked into the rows of a Jacobian.

pub mod checkpoint;
mod gemm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use gemm::{gemm, Layout};

/// Hidden-layer nonlinearity. The output layer is always linear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, v: &mut [f64]) {
        match self {
            Activation::Relu => v.iter_mut().for_each(|x| *x = x.max(0.0)),
            Activation::Tanh => v.iter_mut().for_each(|x| *x = x.tanh()),
        }
    }

    /// Multiplies `delta` by the derivative, expressed through the
    /// activation's output.
    fn backprop(self, delta: &mut [f64], out: &[f64]) {
        match self {
            Activation::Relu => {
                for (d, &o) in delta.iter_mut().zip(out) {
                    if o <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            Activation::Tanh => {
                for (d, &o) in delta.iter_mut().zip(out) {
                    *d *= 1.0 - o * o;
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// A flat parameter-space vector in the network's canonical layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatGradient(Vec<f64>);

impl FlatGradient {
    pub fn zeros(len: usize) -> Self {
        FlatGradient(vec![0.0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl From<Vec<f64>> for FlatGradient {
    fn from(v: Vec<f64>) -> Self {
        FlatGradient(v)
    }
}

/// One regression sample: the network output for `action` at `state` is
/// pulled toward the constant `target`.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub state: &'a [f64],
    pub action: usize,
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
}

impl Slot {
    fn weight_range(&self) -> std::ops::Range<usize> {
        self.weights..self.weights + self.fan_in * self.fan_out
    }

    fn bias_range(&self) -> std::ops::Range<usize> {
        self.bias..self.bias + self.fan_out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layer_sizes: Vec<usize>,
    activation: Activation,
    slots: Vec<Slot>,
    params: Vec<f64>,
}

fn layout(layer_sizes: &[usize]) -> Result<(Vec<Slot>, usize)> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidLayout(format!(
            "need at least input and output sizes, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::InvalidLayout(format!("zero-width layer in {layer_sizes:?}")));
    }
    let mut slots = Vec::with_capacity(layer_sizes.len() - 1);
    let mut offset = 0;
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let weights = offset;
        let bias = weights + fan_in * fan_out;
        offset = bias + fan_out;
        slots.push(Slot { fan_in, fan_out, weights, bias });
    }
    Ok((slots, offset))
}

impl QNetwork {
    /// ReLU network with weights uniform in `±1/sqrt(fan_in)` and zero biases.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        Self::init_with(layer_sizes, Activation::Relu, seed)
    }

    pub fn init_with(layer_sizes: &[usize], activation: Activation, seed: u64) -> Result<Self> {
        let (slots, n) = layout(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; n];
        for slot in &slots {
            let bound = 1.0 / (slot.fan_in as f64).sqrt();
            for w in &mut params[slot.weight_range()] {
                *w = rng.gen_range(-bound..bound);
            }
        }
        Ok(QNetwork {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            slots,
            params,
        })
    }

    pub fn from_params(layer_sizes: &[usize], activation: Activation, params: Vec<f64>) -> Result<Self> {
        let (slots, n) = layout(layer_sizes)?;
        if params.len() != n {
            return Err(Error::DimensionMismatch {
                context: "parameter vector",
                expected: n,
                actual: params.len(),
            });
        }
        Ok(QNetwork {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            slots,
            params,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn n_actions(&self) -> usize {
        *self.layer_sizes.last().expect("at least two layers")
    }

    /// Total parameter count `P = sum (fan_in + 1) * fan_out`.
    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.params.clone()
    }

    pub fn unflatten(&mut self, values: &[f64]) -> Result<()> {
        self.check_len("parameter vector", values.len())?;
        self.params.copy_from_slice(values);
        Ok(())
    }

    /// Weight matrix of `layer` (row-major, `fan_out x fan_in`) and its bias.
    pub fn layer(&self, layer: usize) -> (&[f64], &[f64]) {
        let slot = self.slots[layer];
        (&self.params[slot.weight_range()], &self.params[slot.bias_range()])
    }

    pub fn layer_mut(&mut self, layer: usize) -> (&mut [f64], &mut [f64]) {
        let slot = self.slots[layer];
        let (head, tail) = self.params.split_at_mut(slot.bias);
        (&mut head[slot.weights..], &mut tail[..slot.fan_out])
    }

    fn check_len(&self, context: &'static str, actual: usize) -> Result<()> {
        if actual != self.params.len() {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.params.len(),
                actual,
            });
        }
        Ok(())
    }

    fn rows_of(&self, inputs: &[f64]) -> Result<usize> {
        let d = self.input_dim();
        if inputs.len() % d != 0 {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: d,
                actual: inputs.len() % d,
            });
        }
        Ok(inputs.len() / d)
    }

    /// Outputs of every layer for a row-major batch; the last entry holds
    /// the q-values.
    fn trace(&self, inputs: &[f64], rows: usize) -> Vec<Vec<f64>> {
        let mut outs: Vec<Vec<f64>> = Vec::with_capacity(self.slots.len());
        for (i, slot) in self.slots.iter().enumerate() {
            let prev: &[f64] = if i == 0 { inputs } else { &outs[i - 1] };
            let mut out = Vec::with_capacity(rows * slot.fan_out);
            let bias = &self.params[slot.bias_range()];
            for _ in 0..rows {
                out.extend_from_slice(bias);
            }
            gemm(
                prev,
                Layout::row_major(rows, slot.fan_in),
                &self.params[slot.weight_range()],
                Layout::transposed(slot.fan_out, slot.fan_in),
                1.0,
                &mut out,
                Layout::row_major(rows, slot.fan_out),
            );
            if i + 1 < self.slots.len() {
                self.activation.apply(&mut out);
            }
            outs.push(out);
        }
        outs
    }

    /// Q-values for a row-major batch of states; the result is
    /// `rows x n_actions`, row-major.
    pub fn forward(&self, states: &[f64]) -> Result<Vec<f64>> {
        let rows = self.rows_of(states)?;
        Ok(self.trace(states, rows).pop().expect("at least one layer"))
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "state",
                expected: self.input_dim(),
                actual: state.len(),
            });
        }
        self.forward(state)
    }

    /// Mean squared error `f = (1/K) sum_k (target_k - Q(s_k, a_k))^2` and its
    /// exact gradient. Targets are constants.
    pub fn group_loss_and_grad(&self, batch: &[Sample<'_>]) -> Result<(f64, FlatGradient)> {
        if batch.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let d = self.input_dim();
        let n_out = self.n_actions();
        let rows = batch.len();
        let mut inputs = Vec::with_capacity(rows * d);
        for s in batch {
            if s.state.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "state",
                    expected: d,
                    actual: s.state.len(),
                });
            }
            if s.action >= n_out {
                return Err(Error::InvalidAction {
                    action: s.action,
                    n_actions: n_out,
                });
            }
            if !s.target.is_finite() {
                return Err(Error::NonFinite("target"));
            }
            inputs.extend_from_slice(s.state);
        }

        let outs = self.trace(&inputs, rows);
        let q = outs.last().expect("at least one layer");
        let scale = 2.0 / rows as f64;
        let mut sum_sq = 0.0;
        let mut delta = vec![0.0; rows * n_out];
        for (k, s) in batch.iter().enumerate() {
            let residual = q[k * n_out + s.action] - s.target;
            sum_sq += residual * residual;
            delta[k * n_out + s.action] = scale * residual;
        }
        let loss = sum_sq / rows as f64;

        let mut grad = vec![0.0; self.params.len()];
        for i in (0..self.slots.len()).rev() {
            let slot = self.slots[i];
            let prev: &[f64] = if i == 0 { &inputs } else { &outs[i - 1] };
            gemm(
                &delta,
                Layout::transposed(rows, slot.fan_out),
                prev,
                Layout::row_major(rows, slot.fan_in),
                0.0,
                &mut grad[slot.weight_range()],
                Layout::row_major(slot.fan_out, slot.fan_in),
            );
            let gb = &mut grad[slot.bias_range()];
            for row in delta.chunks_exact(slot.fan_out) {
                for (g, v) in gb.iter_mut().zip(row) {
                    *g += v;
                }
            }
            if i > 0 {
                let mut next = vec![0.0; rows * slot.fan_in];
                gemm(
                    &delta,
                    Layout::row_major(rows, slot.fan_out),
                    &self.params[slot.weight_range()],
                    Layout::row_major(slot.fan_out, slot.fan_in),
                    0.0,
                    &mut next,
                    Layout::row_major(rows, slot.fan_in),
                );
                self.activation.backprop(&mut next, prev);
                delta = next;
            }
        }
        Ok((loss, FlatGradient(grad)))
    }

    /// `theta <- theta + (-alpha) * direction`.
    pub fn apply_step(&mut self, direction: &FlatGradient, alpha: f64) -> Result<()> {
        self.check_len("direction", direction.len())?;
        for (p, d) in self.params.iter_mut().zip(direction.as_slice()) {
            *p += -alpha * d;
        }
        Ok(())
    }

    pub fn same_architecture(&self, other: &QNetwork) -> bool {
        self.layer_sizes == other.layer_sizes && self.activation == other.activation
    }

    /// Overwrites `dest` with a bit-exact copy of these parameters.
    pub fn copy_into(&self, dest: &mut QNetwork) -> Result<()> {
        if !self.same_architecture(dest) {
            return Err(Error::ArchitectureMismatch(
                self.layer_sizes.clone(),
                dest.layer_sizes.clone(),
            ));
        }
        dest.params.copy_from_slice(&self.params);
        Ok(())
    }
}
