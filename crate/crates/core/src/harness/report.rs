//! Normalized comparison of training runs against a baseline arm.

use std::fmt;

use super::config::Algorithm;
use super::train::RunLog;
use crate::envs;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub method: String,
    /// Max evaluation score as a percentage of the baseline's.
    pub max_score_pct: Option<f64>,
    /// Steps to solve as a percentage of the baseline's; `None` when either
    /// arm never solved or the task has no threshold.
    pub step_to_solve_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub env: String,
    pub rows: Vec<ComparisonRow>,
}

pub fn method_label(log: &RunLog) -> String {
    match log.algorithm {
        Algorithm::Ddqn => "DDQN".to_string(),
        Algorithm::M2ddqn => format!("M2DDQN (N={})", log.group_size),
    }
}

fn ratio(value: f64, base: f64) -> Option<f64> {
    if base == 0.0 {
        return (value == 0.0).then_some(100.0);
    }
    Some(100.0 * value / base)
}

/// Normalizes every variant against `baseline` (which reads 100%/100%).
pub fn compare_against(baseline: &RunLog, variants: &[RunLog]) -> Result<Comparison> {
    if variants.is_empty() {
        return Err(Error::Config("comparison needs at least one variant".into()));
    }
    if let Some(v) = variants.iter().find(|v| v.env != baseline.env) {
        return Err(Error::Config(format!(
            "cannot compare runs on different environments: {} vs {}",
            baseline.env, v.env
        )));
    }
    let has_threshold = envs::spec_for(&baseline.env)?.solve_threshold.is_some();
    let row = |log: &RunLog| ComparisonRow {
        method: method_label(log),
        max_score_pct: ratio(log.summary.max_eval_score, baseline.summary.max_eval_score),
        step_to_solve_pct: match (has_threshold, baseline.summary.step_to_solve, log.summary.step_to_solve) {
            (true, Some(b), Some(v)) => ratio(v as f64, b as f64),
            _ => None,
        },
    };
    let mut rows = vec![row(baseline)];
    rows.extend(variants.iter().map(row));
    Ok(Comparison {
        env: baseline.env.clone(),
        rows,
    })
}

/// Uses the first DDQN log as the baseline and every other log as a variant.
pub fn compare(logs: &[RunLog]) -> Result<Comparison> {
    if logs.len() < 2 {
        return Err(Error::Config("comparison needs at least two runs".into()));
    }
    let base = logs
        .iter()
        .position(|l| l.algorithm == Algorithm::Ddqn)
        .ok_or_else(|| Error::Config("missing DDQN baseline arm".into()))?;
    let variants: Vec<RunLog> = logs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != base)
        .map(|(_, l)| l.clone())
        .collect();
    compare_against(&logs[base], &variants)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |p| format!("{p:.2}%"))
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:<16} {:>10} {:>12}", "Environment", "Method", "MaxScore", "StepToSolve")?;
        for (i, row) in self.rows.iter().enumerate() {
            let env = if i == 0 { self.env.as_str() } else { "" };
            writeln!(
                f,
                "{:<16} {:<16} {:>10} {:>12}",
                env,
                row.method,
                pct(row.max_score_pct),
                pct(row.step_to_solve_pct)
            )?;
        }
        Ok(())
    }
}
