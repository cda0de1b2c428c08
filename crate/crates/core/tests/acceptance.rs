//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any blocking criterion fails.
//!
//! Run a subset by listing criterion numbers:
//! `cargo test --test acceptance -- 1 2 7`.

use std::ops::ControlFlow;
use std::process::ExitCode;
use std::time::Instant;

use m2dqn::agent::{self, AgentConfig};
use m2dqn::envs::{self, Acrobot, CartPole, Environment, MountainCar};
use m2dqn::harness::{train_with, Algorithm, RunConfig, RunLog};
use m2dqn::minimax::{self, oracle, GroupObjective};
use m2dqn::qnet::{Activation, QNetwork, Sample};
use m2dqn::replay::{ReplayBuffer, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    pass: bool,
    blocking: bool,
    detail: String,
}

impl Outcome {
    fn check(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            blocking: true,
            detail,
        }
    }

    fn report(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            blocking: false,
            detail,
        }
    }
}

// ---------------------------------------------------------------- 1

fn gradient_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let mut nets = 0;
    let mut coords = 0;
    let mut kinks = 0;
    while nets < 50 {
        let depth = rng.gen_range(1..=3);
        let mut sizes = vec![rng.gen_range(1..=5)];
        for _ in 0..depth {
            sizes.push(rng.gen_range(2..=8));
        }
        sizes.push(rng.gen_range(1..=4));
        let activation = if nets % 2 == 0 { Activation::Tanh } else { Activation::Relu };
        let net = QNetwork::init_with(&sizes, activation, rng.gen()).unwrap();
        if net.n_params() > 200 {
            continue;
        }
        nets += 1;
        let d = net.input_dim();
        let rows = rng.gen_range(1..=8);
        let states: Vec<f64> = (0..rows * d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let actions: Vec<usize> = (0..rows).map(|_| rng.gen_range(0..net.n_actions())).collect();
        let targets: Vec<f64> = (0..rows).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let batch: Vec<Sample> = (0..rows)
            .map(|k| Sample {
                state: &states[k * d..(k + 1) * d],
                action: actions[k],
                target: targets[k],
            })
            .collect();
        let (_, grad) = net.group_loss_and_grad(&batch).unwrap();

        // mean squared error evaluated row by row through the forward pass
        let loss = |params: &[f64]| {
            let probe = QNetwork::from_params(&sizes, activation, params.to_vec()).unwrap();
            let mut sum = 0.0;
            for s in &batch {
                let r = s.target - probe.q_values(s.state).unwrap()[s.action];
                sum += r * r;
            }
            sum / rows as f64
        };
        let mut params = net.flatten();
        let h = 1e-6;
        for i in 0..params.len() {
            let orig = params[i];
            params[i] = orig + h;
            let up = loss(&params);
            let up_pattern = relu_pattern(&sizes, &params, &states);
            params[i] = orig - h;
            let down = loss(&params);
            let down_pattern = relu_pattern(&sizes, &params, &states);
            params[i] = orig;
            let fd = (up - down) / (2.0 * h);
            let g = grad.as_slice()[i];
            // relative error, with an absolute floor where both are ~0
            let err = (g - fd).abs() / fd.abs().max(g.abs()).max(1e-3);
            // a ReLU switching inside [-h, h] makes the difference quotient meaningless
            let kink = activation == Activation::Relu && up_pattern != down_pattern;
            coords += 1;
            if kink {
                kinks += 1;
            } else {
                worst = worst.max(err);
            }
        }
    }
    Outcome::check(worst <= 1e-4, format!("max relative error {worst:.2e} over 50 nets, {coords} coordinates, {kinks} skipped at ReLU kinks (tol 1e-4)"))
}

/// Signs of every hidden pre-activation over a batch, from a plain
/// reference forward pass over the flat parameter layout.
fn relu_pattern(sizes: &[usize], params: &[f64], states: &[f64]) -> Vec<bool> {
    let d = sizes[0];
    let mut pattern = Vec::new();
    for state in states.chunks_exact(d) {
        let mut x = state.to_vec();
        let mut offset = 0;
        for (l, w) in sizes.windows(2).enumerate() {
            let (fan_in, fan_out) = (w[0], w[1]);
            let weights = &params[offset..offset + fan_in * fan_out];
            let bias = &params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
            offset += fan_in * fan_out + fan_out;
            let z: Vec<f64> = (0..fan_out)
                .map(|o| bias[o] + (0..fan_in).map(|k| weights[o * fan_in + k] * x[k]).sum::<f64>())
                .collect();
            if l + 2 < sizes.len() {
                pattern.extend(z.iter().map(|&v| v > 0.0));
                x = z.iter().map(|&v| v.max(0.0)).collect();
            }
        }
    }
    pattern
}

// ---------------------------------------------------------------- 2

fn random_objective(rng: &mut ChaCha8Rng, n: usize, p: usize) -> GroupObjective {
    let f = (0..n).map(|_| rng.gen_range(0.0..3.0)).collect();
    let g = (0..n * p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GroupObjective::new(f, g, p).unwrap()
}

fn qp_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_obj = 0.0f64;
    let mut worst_feas = 0.0f64;
    for _ in 0..200 {
        let n = rng.gen_range(2..=10);
        let p = rng.gen_range(3..=50);
        let obj = random_objective(&mut rng, n, p);
        let lambda = minimax::solve_dual(&obj, 1e-12).unwrap();
        let (_, best) = oracle::enumerate_active_sets(&obj).unwrap();
        let value = minimax::dual_objective(&obj, &lambda).unwrap();
        worst_obj = worst_obj.max((value - best).abs());
        let l = lambda.as_slice();
        let sum: f64 = l.iter().sum();
        let neg = l.iter().fold(0.0f64, |m, &v| m.max(-v));
        worst_feas = worst_feas.max((sum - 1.0).abs()).max(neg);
    }
    Outcome::check(
        worst_obj <= 1e-6 && worst_feas <= 1e-9,
        format!("max |objective - oracle| {worst_obj:.2e} (tol 1e-6), max infeasibility {worst_feas:.2e} (tol 1e-9)"),
    )
}

// ---------------------------------------------------------------- 3

/// Solves `a x = b` for a square system by Gaussian elimination with
/// partial pivoting. `None` if numerically singular.
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..m {
            let factor = a[r][col] / a[col][col];
            for c in col..m {
                a[r][c] -= factor * a[col][c];
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; m];
    for r in (0..m).rev() {
        let tail: f64 = (r + 1..m).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / a[r][r];
    }
    Some(x)
}

/// `max_j (f_j + g_j . d) + |d|^2 / 2`, straight from the definition.
fn primal(f: &[f64], g: &[Vec<f64>], d: &[f64]) -> f64 {
    let worst = f
        .iter()
        .zip(g)
        .map(|(fj, gj)| fj + gj.iter().zip(d).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    worst + 0.5 * d.iter().map(|v| v * v).sum::<f64>()
}

/// Primal oracle on the epigraph form `min t + |d|^2/2 s.t. f_j + g_j.d <= t`.
/// For every subset A of constraints taken as active, the stationarity and
/// equality conditions form the linear system
/// `[I 0 G_A^T; 0 0 -1^T; G_A -1 0] [d; t; mu] = [0; -1; -f_A]`.
/// Each solution gives a candidate `d`; the optimum is among them, and every
/// candidate's primal value bounds it from above.
fn primal_oracle(f: &[f64], g: &[Vec<f64>]) -> f64 {
    let n = f.len();
    let p = g[0].len();
    let mut best = primal(f, g, &vec![0.0; p]);
    for mask in 1u32..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let m = p + 1 + active.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![0.0; m];
        for i in 0..p {
            a[i][i] = 1.0;
            for (k, &j) in active.iter().enumerate() {
                a[i][p + 1 + k] = g[j][i];
            }
        }
        for k in 0..active.len() {
            a[p][p + 1 + k] = -1.0;
        }
        b[p] = -1.0;
        for (k, &j) in active.iter().enumerate() {
            a[p + 1 + k][..p].copy_from_slice(&g[j]);
            a[p + 1 + k][p] = -1.0;
            b[p + 1 + k] = -f[j];
        }
        if let Some(x) = solve_linear(a, b) {
            best = best.min(primal(f, g, &x[..p]));
        }
    }
    best
}

fn primal_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3);
        let p = rng.gen_range(1..=5);
        let obj = random_objective(&mut rng, n, p);
        let lambda = minimax::solve_dual(&obj, 1e-12).unwrap();
        let d = minimax::descent_direction(&obj, &lambda).unwrap();
        let g: Vec<Vec<f64>> = (0..n).map(|j| obj.row(j).to_vec()).collect();
        let value = primal(obj.losses(), &g, d.as_slice());
        worst = worst.max((value - primal_oracle(obj.losses(), &g)).abs());
    }
    Outcome::check(worst <= 1e-5, format!("max |primal(d) - oracle| {worst:.2e} (tol 1e-5)"))
}

// ---------------------------------------------------------------- 4

fn cartpole_buffer(seed: u64, size: usize) -> ReplayBuffer {
    let mut env = CartPole::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buffer = ReplayBuffer::new(size).unwrap();
    let mut state = env.reset(rng.gen());
    while buffer.len() < size {
        let action = rng.gen_range(0..2);
        let r = env.step(action).unwrap();
        buffer.push(Transition {
            state: state.clone(),
            action,
            reward: r.reward,
            next_state: r.next_state.clone(),
            terminal: r.terminated,
        });
        state = if r.done() { env.reset(rng.gen()) } else { r.next_state };
    }
    buffer
}

fn n1_reduction() -> Outcome {
    let buffer = cartpole_buffer(4, 2000);
    let sizes = [4, 128, 64, 64, 2];
    let cfg = AgentConfig {
        group_size: 1,
        target_sync_interval: 100,
        ..AgentConfig::default()
    };
    let mut m2 = QNetwork::init(&sizes, 9).unwrap();
    let mut m2_target = m2.clone();
    let mut dd = m2.clone();
    let mut dd_target = m2.clone();
    let mut rng_m2 = ChaCha8Rng::seed_from_u64(10);
    let mut rng_dd = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for step in 1..=1000 {
        agent::m2_update(&mut m2, &m2_target, &buffer, &cfg, &mut rng_m2).unwrap();
        agent::ddqn_update(&mut dd, &dd_target, &buffer, &cfg, &mut rng_dd).unwrap();
        agent::sync_target(&m2, &mut m2_target, step, &cfg).unwrap();
        agent::sync_target(&dd, &mut dd_target, step, &cfg).unwrap();
        let diff = m2
            .params()
            .iter()
            .zip(dd.params())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(diff);
    }

    // the same reduction through the full training loop
    let mut config = RunConfig::for_env(envs::CARTPOLE).unwrap();
    config.max_step = 1128;
    config.eval_interval = 1128;
    config.eval_games = 2;
    config.group_size = 1;
    let run_m2 = train_with(&config, 5, |_| ControlFlow::Continue(())).unwrap();
    config.algorithm = Algorithm::Ddqn;
    let run_dd = train_with(&config, 5, |_| ControlFlow::Continue(())).unwrap();
    let loop_diff = run_m2
        .network
        .params()
        .iter()
        .zip(run_dd.network.params())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    Outcome::check(
        worst <= 1e-9 && loop_diff <= 1e-9,
        format!("max parameter difference over 1000 updates {worst:.2e}, after training loop {loop_diff:.2e} (tol 1e-9)"),
    )
}

// ---------------------------------------------------------------- 5

fn phi(obj_at: &dyn Fn(&[f64]) -> Vec<f64>, theta: &[f64]) -> f64 {
    obj_at(theta).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn descent_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = 0;
    let mut checked = 0;
    for case in 0..100 {
        let n = rng.gen_range(2..=8);
        let (theta, losses, rows, value_at): (Vec<f64>, Vec<f64>, Vec<Vec<f64>>, Box<dyn Fn(&[f64]) -> Vec<f64>>) =
            if case % 2 == 0 {
                // f_j(x) = |A_j x - b_j|^2 / m
                let p = rng.gen_range(2..=12);
                let m = rng.gen_range(2..=6);
                let a: Vec<Vec<f64>> = (0..n * m).map(|_| (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
                let b: Vec<f64> = (0..n * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let theta: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let value_at = move |x: &[f64]| -> Vec<f64> {
                    (0..n)
                        .map(|j| {
                            (0..m)
                                .map(|i| {
                                    let r: f64 = a[j * m + i].iter().zip(x).map(|(u, v)| u * v).sum::<f64>() - b[j * m + i];
                                    r * r
                                })
                                .sum::<f64>()
                                / m as f64
                        })
                        .collect()
                };
                let h = 1e-6;
                let base = value_at(&theta);
                let mut rows = vec![vec![0.0; p]; n];
                let mut probe = theta.clone();
                for k in 0..p {
                    probe[k] = theta[k] + h;
                    let up = value_at(&probe);
                    probe[k] = theta[k] - h;
                    let down = value_at(&probe);
                    probe[k] = theta[k];
                    for j in 0..n {
                        rows[j][k] = (up[j] - down[j]) / (2.0 * h);
                    }
                }
                (theta, base, rows, Box::new(value_at))
            } else {
                // per-group TD losses of a small tanh network
                let sizes = vec![3, rng.gen_range(3..=8), 2];
                let net = QNetwork::init_with(&sizes, Activation::Tanh, rng.gen()).unwrap();
                let k = rng.gen_range(2..=6);
                let states: Vec<f64> = (0..n * k * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let actions: Vec<usize> = (0..n * k).map(|_| rng.gen_range(0..2)).collect();
                let targets: Vec<f64> = (0..n * k).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let groups = move |params: &[f64]| -> Vec<(f64, Vec<f64>)> {
                    let probe = QNetwork::from_params(&sizes, Activation::Tanh, params.to_vec()).unwrap();
                    (0..n)
                        .map(|j| {
                            let batch: Vec<Sample> = (j * k..(j + 1) * k)
                                .map(|i| Sample {
                                    state: &states[i * 3..i * 3 + 3],
                                    action: actions[i],
                                    target: targets[i],
                                })
                                .collect();
                            let (l, g) = probe.group_loss_and_grad(&batch).unwrap();
                            (l, g.into_vec())
                        })
                        .collect()
                };
                let theta = net.flatten();
                let (losses, rows): (Vec<f64>, Vec<Vec<f64>>) = groups(&theta).into_iter().unzip();
                let value_at = move |x: &[f64]| groups(x).into_iter().map(|(l, _)| l).collect();
                (theta, losses, rows, Box::new(value_at))
            };
        let p = theta.len();
        let obj = GroupObjective::new(losses, rows.concat(), p).unwrap();
        let lambda = minimax::solve_dual(&obj, 1e-12).unwrap();
        let d = minimax::descent_direction(&obj, &lambda).unwrap();
        if d.norm() <= 1e-8 {
            continue;
        }
        checked += 1;
        let start = phi(&*value_at, &theta);
        let decreased = (0..=20).any(|e| {
            let alpha = 0.5f64.powi(e);
            let moved: Vec<f64> = theta.iter().zip(d.as_slice()).map(|(t, di)| t + alpha * di).collect();
            phi(&*value_at, &moved) < start
        });
        if !decreased {
            failures += 1;
        }
    }
    Outcome::check(failures == 0, format!("{failures} failures on {checked} instances with |d| > 1e-8"))
}

// ---------------------------------------------------------------- 6

fn replay_statistics() -> Outcome {
    let mut buffer = ReplayBuffer::new(100).unwrap();
    for i in 0..100 {
        buffer.push(Transition {
            state: vec![i as f64],
            action: 0,
            reward: i as f64,
            next_state: vec![i as f64],
            terminal: false,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut counts = [0u64; 100];
    for _ in 0..1000 {
        for t in buffer.sample_batch(100, &mut rng).unwrap() {
            counts[t.reward as usize] += 1;
        }
    }
    let draws: u64 = counts.iter().sum();
    let expected = draws as f64 / 100.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let p = ChiSquared::new(99.0).unwrap().sf(stat);
    Outcome::check(p > 0.001, format!("chi-square {stat:.1} on 99 dof over {draws} draws, p = {p:.4} (need > 0.001)"))
}

// ---------------------------------------------------------------- 7

/// Reference dynamics, written out independently of the library with the
/// same order of floating-point operations.
mod reference {
    use std::f64::consts::PI;

    pub fn cartpole(s: [f64; 4], action: usize) -> ([f64; 4], bool) {
        let (gravity, masscart, masspole, length, force_mag, tau) = (9.8, 1.0, 0.1, 0.5, 10.0, 0.02);
        let total_mass = masspole + masscart;
        let polemass_length = masspole * length;
        let [x, x_dot, theta, theta_dot] = s;
        let force = if action == 1 { force_mag } else { -force_mag };
        let costheta = theta.cos();
        let sintheta = theta.sin();
        let temp = (force + polemass_length * (theta_dot * theta_dot) * sintheta) / total_mass;
        let thetaacc = (gravity * sintheta - costheta * temp)
            / (length * (4.0 / 3.0 - masspole * (costheta * costheta) / total_mass));
        let xacc = temp - polemass_length * thetaacc * costheta / total_mass;
        let x = x + tau * x_dot;
        let x_dot = x_dot + tau * xacc;
        let theta = theta + tau * theta_dot;
        let theta_dot = theta_dot + tau * thetaacc;
        let limit = 12.0 * 2.0 * PI / 360.0;
        let done = x < -2.4 || x > 2.4 || theta < -limit || theta > limit;
        ([x, x_dot, theta, theta_dot], done)
    }

    pub fn mountain_car(s: [f64; 2], action: usize) -> ([f64; 2], bool) {
        let [mut position, mut velocity] = s;
        velocity += (action as f64 - 1.0) * 0.001 + (3.0 * position).cos() * (-0.0025);
        velocity = velocity.clamp(-0.07, 0.07);
        position += velocity;
        position = position.clamp(-1.2, 0.6);
        if position == -1.2 && velocity < 0.0 {
            velocity = 0.0;
        }
        let done = position >= 0.5 && velocity >= 0.0;
        ([position, velocity], done)
    }

    fn dsdt(y: [f64; 5]) -> [f64; 5] {
        let (m1, m2, l1, lc1, lc2, i1, i2, g) = (1.0, 1.0, 1.0, 0.5, 0.5, 1.0, 1.0, 9.8);
        let [theta1, theta2, dtheta1, dtheta2, a] = y;
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

    fn axpy(y: [f64; 5], h: f64, k: [f64; 5]) -> [f64; 5] {
        std::array::from_fn(|i| y[i] + h * k[i])
    }

    fn wrap(mut x: f64) -> f64 {
        let diff = PI - (-PI);
        while x > PI {
            x -= diff;
        }
        while x < -PI {
            x += diff;
        }
        x
    }

    pub fn acrobot(s: [f64; 4], action: usize) -> ([f64; 4], bool) {
        let torque = [-1.0, 0.0, 1.0][action];
        let y0 = [s[0], s[1], s[2], s[3], torque];
        let dt = 0.2 - 0.0;
        let dt2 = dt / 2.0;
        let k1 = dsdt(y0);
        let k2 = dsdt(axpy(y0, dt2, k1));
        let k3 = dsdt(axpy(y0, dt2, k2));
        let k4 = dsdt(axpy(y0, dt, k3));
        let y: [f64; 5] = std::array::from_fn(|i| y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        let ns = [
            wrap(y[0]),
            wrap(y[1]),
            y[2].clamp(-4.0 * PI, 4.0 * PI),
            y[3].clamp(-9.0 * PI, 9.0 * PI),
        ];
        let done = -ns[0].cos() - (ns[1] + ns[0]).cos() > 1.0;
        (ns, done)
    }
}

fn same_bits(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn environment_fidelity() -> Outcome {
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(700 + seed);

        let mut cp = CartPole::new();
        cp.reset(seed);
        let mut s = cp.state();
        for _ in 0..10 {
            let a = rng.gen_range(0..2);
            let r = cp.step(a).unwrap();
            let (next, done) = reference::cartpole(s, a);
            compared += 1;
            if !same_bits(&r.next_state, &next) || r.terminated != done || r.reward != 1.0 {
                mismatches.push(format!("CartPole seed {seed}"));
                break;
            }
            s = next;
            if r.done() {
                break;
            }
        }

        let mut mc = MountainCar::new();
        mc.reset(seed);
        let mut s = mc.state();
        for _ in 0..10 {
            let a = rng.gen_range(0..3);
            let r = mc.step(a).unwrap();
            let (next, done) = reference::mountain_car(s, a);
            compared += 1;
            if !same_bits(&r.next_state, &next) || r.terminated != done || r.reward != -1.0 {
                mismatches.push(format!("MountainCar seed {seed}"));
                break;
            }
            s = next;
            if r.done() {
                break;
            }
        }

        let mut ab = Acrobot::new();
        ab.reset(seed);
        let mut s = ab.state();
        for _ in 0..10 {
            let a = rng.gen_range(0..3);
            let r = ab.step(a).unwrap();
            let (next, done) = reference::acrobot(s, a);
            let obs = [next[0].cos(), next[0].sin(), next[1].cos(), next[1].sin(), next[2], next[3]];
            compared += 1;
            let reward = if done { 0.0 } else { -1.0 };
            if !same_bits(&ab.state(), &next) || !same_bits(&r.next_state, &obs) || r.terminated != done || r.reward != reward {
                mismatches.push(format!("Acrobot seed {seed}"));
                break;
            }
            s = next;
            if r.done() {
                break;
            }
        }
    }
    Outcome::check(
        mismatches.is_empty(),
        format!("{compared} steps compared bitwise, mismatches: {mismatches:?}"),
    )
}

// ---------------------------------------------------------------- 8, 9

const SMOKE_SEEDS: [u64; 3] = [0, 1, 2];

fn smoke_run(algorithm: Algorithm, seed: u64) -> RunLog {
    let mut config = RunConfig::for_env(envs::CARTPOLE).unwrap();
    config.algorithm = algorithm;
    let threshold = envs::spec_for(envs::CARTPOLE).unwrap().solve_threshold.unwrap();
    train_with(&config, seed, |r| {
        if r.mean_eval_score >= threshold {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .unwrap()
    .log
}

fn smoke_reproduction(m2: &[RunLog], dd: &[RunLog], secs: f64) -> Outcome {
    let m2_solved = m2.iter().filter(|l| l.summary.step_to_solve.is_some()).count();
    let dd_ok = dd.iter().filter(|l| l.summary.max_eval_score >= 450.0).count();
    let show = |logs: &[RunLog]| {
        logs.iter()
            .map(|l| match l.summary.step_to_solve {
                Some(s) => format!("{s}"),
                None => format!("unsolved(max {:.1})", l.summary.max_eval_score),
            })
            .collect::<Vec<_>>()
            .join("/")
    };
    Outcome::check(
        m2_solved >= 2 && dd_ok >= 2,
        format!(
            "M2DDQN(N=5) solved {m2_solved}/3 [{}], DDQN mean >= 450 in {dd_ok}/3 [{}], {:.1} min",
            show(m2),
            show(dd),
            secs / 60.0
        ),
    )
}

fn trend(m2: &[RunLog], dd: &[RunLog]) -> Outcome {
    // unsolved runs count as the full budget
    let budget = RunConfig::for_env(envs::CARTPOLE).unwrap().max_step as f64;
    let steps = |l: &RunLog| l.summary.step_to_solve.map_or(budget, |s| s as f64);
    let mut ratios: Vec<f64> = m2.iter().zip(dd).map(|(a, b)| steps(a) / steps(b)).collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios[ratios.len() / 2];
    Outcome::report(
        median <= 1.0,
        format!("median step_to_solve ratio M2DDQN(N=5)/DDQN = {median:.3} over {ratios:.3?}"),
    )
}

// ---------------------------------------------------------------- main

fn main() -> ExitCode {
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wants = |k: u32| selected.is_empty() || selected.contains(&k);
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut run = |k: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        if wants(k) {
            let t = Instant::now();
            let outcome = f();
            let secs = t.elapsed().as_secs_f64();
            print_line(k, name, &outcome, secs);
            results.push((k, name, outcome, secs));
        }
    };
    run(1, "gradient exactness", &gradient_exactness);
    run(2, "QP correctness", &qp_correctness);
    run(3, "primal-dual recovery", &primal_recovery);
    run(4, "N=1 reduction", &n1_reduction);
    run(5, "descent property", &descent_property);
    run(6, "replay statistics", &replay_statistics);
    run(7, "environment fidelity", &environment_fidelity);

    if wants(8) || wants(9) {
        let t = Instant::now();
        let m2: Vec<RunLog> = SMOKE_SEEDS.iter().map(|&s| smoke_run(Algorithm::M2ddqn, s)).collect();
        let dd: Vec<RunLog> = SMOKE_SEEDS.iter().map(|&s| smoke_run(Algorithm::Ddqn, s)).collect();
        let secs = t.elapsed().as_secs_f64();
        if wants(8) {
            let o = smoke_reproduction(&m2, &dd, secs);
            print_line(8, "smoke reproduction", &o, secs);
            results.push((8, "smoke reproduction", o, secs));
        }
        if wants(9) {
            let o = trend(&m2, &dd);
            print_line(9, "trend check", &o, 0.0);
            results.push((9, "trend check", o, 0.0));
        }
    }
    if wants(10) {
        println!("INFO 10 extended benchmarks: MountainCar and Acrobot long runs are optional, see README");
    }

    let failed: Vec<u32> = results.iter().filter(|r| r.2.blocking && !r.2.pass).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all blocking criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}

fn print_line(k: u32, name: &str, o: &Outcome, secs: f64) {
    let status = match (o.pass, o.blocking) {
        (true, _) => "PASS",
        (false, true) => "FAIL",
        (false, false) => "WARN",
    };
    println!("{status} {k:>2} {name}: {} [{secs:.1}s]", o.detail);
}
