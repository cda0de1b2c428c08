use crate::error::{Error, Result};

/// Maximum allowed deviation of `sum(lambda)` from one.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Entries down to this value are treated as rounding noise and clamped to 0.
pub const NEGATIVE_TOLERANCE: f64 = -1e-12;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexWeights(Vec<f64>);

impl SimplexWeights {
    pub fn new(mut lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Empty("simplex weights"));
        }
        if lambda.iter().any(|v| !v.is_finite() || *v < NEGATIVE_TOLERANCE) {
            return Err(Error::Config(format!("weights outside the simplex: {lambda:?}")));
        }
        lambda.iter_mut().for_each(|v| *v = v.max(0.0));
        let sum: f64 = lambda.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::Config(format!("weights sum to {sum}, not 1")));
        }
        Ok(SimplexWeights(lambda))
    }

    pub fn uniform(n: usize) -> Self {
        SimplexWeights(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, j: usize) -> Self {
        let mut v = vec![0.0; n];
        v[j] = 1.0;
        SimplexWeights(v)
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

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Euclidean projection of `v` onto `{x : x >= 0, sum x = 1}` by the
/// sort-and-threshold method.
pub fn project_onto_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}
