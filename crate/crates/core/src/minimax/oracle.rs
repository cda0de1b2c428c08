//! Exhaustive active-set solver for the dual QP, used as a reference.
//!
//! Every nonempty support `S` of the simplex weights is tried: the
//! equality-constrained problem on `S` is solved exactly through its KKT
//! system
//!
//! ```text
//! [ Q_SS  1 ] [ lambda_S ]   [ f_S ]
//! [ 1^T   0 ] [   nu     ] = [  1  ]
//! ```
//!
//! and the best feasible candidate is kept. Some minimal-support optimum
//! always has a nonsingular KKT matrix, so singular supports are skipped.
//! Cost is `O(2^N N^3)`; only meant for small `N`.

use super::{GroupObjective, SimplexWeights};
use crate::error::{Error, Result};

pub const MAX_GROUPS: usize = 16;

/// Returns the optimal weights and the optimal dual objective.
pub fn enumerate_active_sets(obj: &GroupObjective) -> Result<(SimplexWeights, f64)> {
    let n = obj.n_groups();
    if n > MAX_GROUPS {
        return Err(Error::Config(format!("active-set enumeration limited to {MAX_GROUPS} groups, got {n}")));
    }
    let p = obj.n_params();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..p {
                q[i][j] += obj.row(i)[k] * obj.row(j)[k];
            }
        }
    }
    let f = obj.losses();
    let value = |lambda: &[f64]| {
        let mut v = 0.0;
        for i in 0..n {
            for j in 0..n {
                v += 0.5 * lambda[i] * q[i][j] * lambda[j];
            }
            v -= f[i] * lambda[i];
        }
        v
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1u32 << n) {
        let support: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let s = support.len();
        let mut system = vec![vec![0.0; s + 2]; s + 1];
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                system[r][c] = q[i][j];
            }
            system[r][s] = 1.0;
            system[r][s + 1] = f[i];
        }
        for c in 0..s {
            system[s][c] = 1.0;
        }
        system[s][s + 1] = 1.0;
        let Some(solution) = solve_full_pivot(system) else {
            continue;
        };
        if solution[..s].iter().any(|&v| v < -1e-10) {
            continue;
        }
        let mut lambda = vec![0.0; n];
        for (r, &i) in support.iter().enumerate() {
            lambda[i] = solution[r].max(0.0);
        }
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|v| *v /= total);
        let v = value(&lambda);
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((lambda, v));
        }
    }
    let (lambda, v) = best.ok_or_else(|| Error::Config("no feasible support found".into()))?;
    Ok((SimplexWeights::new(lambda)?, v))
}

/// Gaussian elimination with full pivoting on an augmented matrix; `None`
/// when the system is numerically singular.
fn solve_full_pivot(mut a: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let m = a.len();
    let scale = a
        .iter()
        .flat_map(|row| row[..m].iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let mut cols: Vec<usize> = (0..m).collect();
    for k in 0..m {
        let (mut pr, mut pc, mut pv) = (k, k, 0.0);
        for (r, row) in a.iter().enumerate().skip(k) {
            for (c, v) in row.iter().enumerate().take(m).skip(k) {
                if v.abs() > pv {
                    (pr, pc, pv) = (r, c, v.abs());
                }
            }
        }
        if pv <= 1e-11 * scale {
            return None;
        }
        a.swap(k, pr);
        if pc != k {
            for row in a.iter_mut() {
                row.swap(k, pc);
            }
            cols.swap(k, pc);
        }
        for r in k + 1..m {
            let factor = a[r][k] / a[k][k];
            if factor != 0.0 {
                for c in k..=m {
                    a[r][c] -= factor * a[k][c];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let mut acc = a[k][m];
        for c in k + 1..m {
            acc -= a[k][c] * x[c];
        }
        x[k] = acc / a[k][k];
    }
    let mut out = vec![0.0; m];
    for (k, &c) in cols.iter().enumerate() {
        out[c] = x[k];
    }
    Some(out)
}
