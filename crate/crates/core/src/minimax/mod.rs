//! Descent direction for the max of several group losses.
//!
//! Given group losses `f_j` and their gradients `g_j` (the rows of `G`), the
//! regularized linearized problem
//!
//! ```text
//! min_d  max_j { f_j + <g_j, d> } + 1/2 |d|^2
//! ```
//!
//! has the dual
//!
//! ```text
//! min_{lambda in simplex}  1/2 lambda^T (G G^T) lambda - f^T lambda
//! ```
//!
//! whose size is the number of groups, not the number of parameters. The
//! primal minimizer is recovered as `d = -G^T lambda`.
//!
//! The dual is solved by accelerated projected gradient on the simplex. The
//! stopping rule is the duality gap
//! `lambda . grad - min_i grad_i` with `grad = G G^T lambda - f`, which upper
//! bounds the suboptimality of the dual objective and equals the primal
//! objective at `d` minus the dual value.

pub mod oracle;
mod simplex;

pub use simplex::{project_onto_simplex, SimplexWeights, NEGATIVE_TOLERANCE, SUM_TOLERANCE};

use crate::error::{Error, Result};
use crate::qnet::FlatGradient;

/// Group losses `f` and the Jacobian `G` (row `j` is the gradient of `f_j`).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupObjective {
    f: Vec<f64>,
    jacobian: Vec<f64>,
    n_params: usize,
}

impl GroupObjective {
    /// `jacobian` is row-major `f.len() x n_params`.
    pub fn new(f: Vec<f64>, jacobian: Vec<f64>, n_params: usize) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::Empty("group objective"));
        }
        if jacobian.len() != f.len() * n_params {
            return Err(Error::DimensionMismatch {
                context: "jacobian",
                expected: f.len() * n_params,
                actual: jacobian.len(),
            });
        }
        if f.iter().any(|&v| v < 0.0) {
            return Err(Error::Config("group losses must be non-negative".into()));
        }
        Ok(GroupObjective { f, jacobian, n_params })
    }

    pub fn from_rows(f: Vec<f64>, rows: &[FlatGradient]) -> Result<Self> {
        if rows.len() != f.len() {
            return Err(Error::DimensionMismatch {
                context: "jacobian rows",
                expected: f.len(),
                actual: rows.len(),
            });
        }
        let n_params = rows.first().map_or(0, FlatGradient::len);
        let mut jacobian = Vec::with_capacity(rows.len() * n_params);
        for r in rows {
            if r.len() != n_params {
                return Err(Error::DimensionMismatch {
                    context: "jacobian row",
                    expected: n_params,
                    actual: r.len(),
                });
            }
            jacobian.extend_from_slice(r.as_slice());
        }
        Self::new(f, jacobian, n_params)
    }

    pub fn n_groups(&self) -> usize {
        self.f.len()
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn losses(&self) -> &[f64] {
        &self.f
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.jacobian[j * self.n_params..(j + 1) * self.n_params]
    }

    /// `Phi = max_j f_j`.
    pub fn max_loss(&self) -> f64 {
        self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `N x N` Gram matrix `G G^T`, row-major.
    pub fn gram(&self) -> Vec<f64> {
        let n = self.n_groups();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        gram
    }

    fn check_finite(&self) -> Result<()> {
        if self.f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("group losses"));
        }
        if self.jacobian.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("jacobian"));
        }
        Ok(())
    }

    fn check_weights(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.n_groups() {
            return Err(Error::DimensionMismatch {
                context: "simplex weights",
                expected: self.n_groups(),
                actual: lambda.len(),
            });
        }
        Ok(())
    }

    /// `G^T lambda`, accumulated in group order.
    pub fn combine(&self, lambda: &SimplexWeights) -> Result<FlatGradient> {
        self.check_weights(lambda.as_slice())?;
        let mut out = vec![0.0; self.n_params];
        for (j, &w) in lambda.as_slice().iter().enumerate() {
            for (o, g) in out.iter_mut().zip(self.row(j)) {
                *o += w * g;
            }
        }
        Ok(out.into())
    }

    /// Objective of the regularized linearized max problem at step `d`:
    /// `max_j (f_j + <g_j, d>) + 1/2 |d|^2`.
    pub fn primal_value(&self, d: &[f64]) -> Result<f64> {
        if d.len() != self.n_params {
            return Err(Error::DimensionMismatch {
                context: "step",
                expected: self.n_params,
                actual: d.len(),
            });
        }
        let worst = (0..self.n_groups())
            .map(|j| self.f[j] + dot(self.row(j), d))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(worst + 0.5 * dot(d, d))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The dual QP in Gram form.
struct DualQp<'a> {
    gram: Vec<f64>,
    f: &'a [f64],
}

impl DualQp<'_> {
    fn n(&self) -> usize {
        self.f.len()
    }

    fn gradient(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| dot(&self.gram[i * n..(i + 1) * n], lambda) - self.f[i])
            .collect()
    }

    fn value(&self, lambda: &[f64]) -> f64 {
        let n = self.n();
        let quad: f64 = (0..n)
            .map(|i| lambda[i] * dot(&self.gram[i * n..(i + 1) * n], lambda))
            .sum();
        0.5 * quad - dot(self.f, lambda)
    }

    fn gap(&self, lambda: &[f64]) -> f64 {
        let grad = self.gradient(lambda);
        let min = grad.iter().copied().fold(f64::INFINITY, f64::min);
        (dot(&grad, lambda) - min).max(0.0)
    }

    /// Exact minimizer on the support of `lambda`, found by solving the
    /// equality-constrained KKT system there. Components that come out
    /// negative are dropped and the system re-solved. `None` when the
    /// reduced system is singular.
    fn polish(&self, lambda: &[f64]) -> Option<Vec<f64>> {
        let n = self.n();
        let mut support: Vec<usize> = (0..n).filter(|&j| lambda[j] > 0.0).collect();
        while !support.is_empty() {
            let m = support.len();
            // [Q_SS 1; 1^T 0] [x; nu] = [f_S; 1]
            let w = m + 2;
            let mut a = vec![0.0; (m + 1) * w];
            for (r, &i) in support.iter().enumerate() {
                for (c, &j) in support.iter().enumerate() {
                    a[r * w + c] = self.gram[i * n + j];
                }
                a[r * w + m] = 1.0;
                a[r * w + m + 1] = self.f[i];
            }
            for c in 0..m {
                a[m * w + c] = 1.0;
            }
            a[m * w + m + 1] = 1.0;
            let x = solve_augmented(&mut a, m + 1)?;
            let mut out = vec![0.0; n];
            let mut most_negative: Option<usize> = None;
            for (r, &j) in support.iter().enumerate() {
                out[j] = x[r];
                if x[r] < 0.0 && most_negative.is_none_or(|k| x[r] < x[k]) {
                    most_negative = Some(r);
                }
            }
            match most_negative {
                None => return Some(out),
                Some(r) => {
                    support.remove(r);
                }
            }
        }
        None
    }

    /// Gershgorin bound on the largest eigenvalue.
    fn lipschitz(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| self.gram[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Gaussian elimination with partial pivoting on an `m x (m + 1)` augmented
/// matrix.
fn solve_augmented(a: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let w = m + 1;
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for col in 0..m {
        let pivot = (col..m).max_by(|&r, &s| a[r * w + col].abs().total_cmp(&a[s * w + col].abs()))?;
        if a[pivot * w + col].abs() <= 1e-12 * scale {
            return None;
        }
        for c in 0..w {
            a.swap(col * w + c, pivot * w + c);
        }
        for r in col + 1..m {
            let factor = a[r * w + col] / a[col * w + col];
            if factor != 0.0 {
                for c in col..w {
                    a[r * w + c] -= factor * a[col * w + c];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = (r + 1..m).map(|c| a[r * w + c] * x[c]).sum();
        x[r] = (a[r * w + m] - tail) / a[r * w + r];
    }
    Some(x)
}

/// `1/2 lambda^T G G^T lambda - f^T lambda`.
pub fn dual_objective(obj: &GroupObjective, lambda: &SimplexWeights) -> Result<f64> {
    obj.check_weights(lambda.as_slice())?;
    let qp = DualQp { gram: obj.gram(), f: &obj.f };
    Ok(qp.value(lambda.as_slice()))
}

/// Duality gap at `lambda`; an upper bound on how far its dual objective is
/// from the optimum.
pub fn duality_gap(obj: &GroupObjective, lambda: &SimplexWeights) -> Result<f64> {
    obj.check_weights(lambda.as_slice())?;
    let qp = DualQp { gram: obj.gram(), f: &obj.f };
    Ok(qp.gap(lambda.as_slice()))
}

/// `d = -G^T lambda`.
pub fn descent_direction(obj: &GroupObjective, lambda: &SimplexWeights) -> Result<FlatGradient> {
    let mut d = obj.combine(lambda)?;
    d.as_mut_slice().iter_mut().for_each(|v| *v = -*v);
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Absolute bound on the duality gap of the returned point.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// A run stops early once no weight moves by more than this in one
    /// iteration.
    pub stall_tolerance: f64,
    /// Fresh starts from a simplex vertex allowed when a run ends without
    /// certifying `tolerance`.
    pub max_restarts: usize,
}

impl SolverSettings {
    pub fn with_tolerance(tolerance: f64) -> Self {
        SolverSettings {
            tolerance,
            ..Self::default()
        }
    }
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tolerance: 1e-10,
            max_iterations: 10_000,
            stall_tolerance: 1e-10,
            max_restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub weights: SimplexWeights,
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub restarts: usize,
}

impl DualSolution {
    pub fn converged(&self, tolerance: f64) -> bool {
        self.gap <= tolerance
    }
}

/// Solves the dual QP to a duality gap of at most `tolerance`.
pub fn solve_dual(obj: &GroupObjective, tolerance: f64) -> Result<SimplexWeights> {
    Ok(solve_dual_with(obj, &SolverSettings::with_tolerance(tolerance))?.weights)
}

pub fn solve_dual_with(obj: &GroupObjective, settings: &SolverSettings) -> Result<DualSolution> {
    if !(settings.tolerance > 0.0) {
        return Err(Error::Config(format!("solver tolerance must be positive, got {}", settings.tolerance)));
    }
    obj.check_finite()?;
    let n = obj.n_groups();
    let qp = DualQp { gram: obj.gram(), f: &obj.f };

    let finish = |lambda: Vec<f64>, iterations, restarts| -> Result<DualSolution> {
        let weights = SimplexWeights::new(lambda)?;
        Ok(DualSolution {
            objective: qp.value(weights.as_slice()),
            gap: qp.gap(weights.as_slice()),
            weights,
            iterations,
            restarts,
        })
    };

    let lipschitz = qp.lipschitz();
    if n == 1 || lipschitz == 0.0 {
        // A single point, or a linear objective whose minimum is the vertex
        // of the largest loss (lowest index on ties).
        let best = (0..n).fold(0, |b, j| if obj.f[j] > obj.f[b] { j } else { b });
        return finish(SimplexWeights::vertex(n, best).into_vec(), 0, 0);
    }
    let step = 1.0 / lipschitz;

    // Vertices ranked by objective; each run starts from the next one.
    let vertex_value = |j: usize| 0.5 * qp.gram[j * n + j] - obj.f[j];
    let mut starts: Vec<usize> = (0..n).collect();
    starts.sort_by(|&a, &b| vertex_value(a).total_cmp(&vertex_value(b)).then(a.cmp(&b)));

    let mut best = SimplexWeights::vertex(n, starts[0]).into_vec();
    let mut best_value = qp.value(&best);
    let mut iterations = 0;
    let mut restarts = 0;

    for &start in starts.iter().take(settings.max_restarts + 1) {
        if qp.gap(&best) <= settings.tolerance {
            break;
        }
        let mut x = SimplexWeights::vertex(n, start).into_vec();
        if restarts > 0 {
            // Blend the vertex with the incumbent so the restart keeps progress.
            x.iter_mut().zip(&best).for_each(|(xi, bi)| *xi = 0.5 * *xi + 0.5 * bi);
        }
        let mut y = x.clone();
        let mut momentum = 1.0f64;
        let mut prev_value = qp.value(&x);
        while iterations < settings.max_iterations {
            iterations += 1;
            let grad = qp.gradient(&y);
            let trial: Vec<f64> = y.iter().zip(&grad).map(|(yi, gi)| yi - step * gi).collect();
            let next = project_onto_simplex(&trial);
            let value = qp.value(&next);
            if value < best_value {
                best_value = value;
                best.clone_from(&next);
            }
            if value > prev_value {
                // objective went up: drop the momentum
                momentum = 1.0;
                y.clone_from(&next);
            } else {
                let m_next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
                let beta = (momentum - 1.0) / m_next;
                y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
                momentum = m_next;
            }
            let moved = next.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            x = next;
            if iterations % 8 == 0 && qp.gap(&best) <= settings.tolerance {
                break;
            }
            prev_value = value;
            if moved <= settings.stall_tolerance {
                break;
            }
        }
        if let Some(p) = qp.polish(&best) {
            if qp.gap(&p) < qp.gap(&best) {
                best_value = qp.value(&p);
                best = p;
            }
        }
        if qp.gap(&best) <= settings.tolerance || iterations >= settings.max_iterations {
            break;
        }
        restarts += 1;
    }
    finish(best, iterations, restarts)
}
